#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "smp/data.hpp"
#include "smp/io.hpp"
#include "smp/rng.hpp"

using namespace smp;
namespace fs = std::filesystem;

namespace {

const char* kPostHeader =
    "uid,pid,timestamp,latitude,longitude,geoaccuracy,category,subcategory,concept,"
    "mediatype,ispublic,label";

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("smp_io_test_" + std::to_string(::getpid()) +
                                                "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("posts: header-only file loads to an empty list") {
    const auto dir = temp_dir();
    const auto path = write_file(dir / "posts.csv", std::string(kPostHeader) + "\n");
    CHECK(io::load_posts(path).empty());
}

TEST_CASE("posts: three-row fixture round trips preserving order") {
    const auto dir = temp_dir();
    const std::string body =
        std::string(kPostHeader) + "\n" +
        "u1,10,1690000000,48.85,2.35,12,art,art_1,museum,photo,1,5.25\n" +
        "u2,11,0,,,,,,,,,\n" +
        "u1,12,-86400,-33.9,151.2,8,travel,travel_2,beach,video,0,2.5\n";
    const auto path = write_file(dir / "posts.csv", body);
    const auto posts = io::load_posts(path);
    REQUIRE(posts.size() == 3);
    CHECK(posts[0].pid == 10);
    CHECK(posts[1].pid == 11);
    CHECK(posts[2].pid == 12);
    CHECK(posts[0].uid == "u1");
    CHECK(posts[0].label == doctest::Approx(5.25));
    CHECK_FALSE(posts[1].latitude.has_value());
    CHECK_FALSE(posts[1].label.has_value());
    CHECK(posts[2].timestamp == -86400);
    CHECK(posts[2].ispublic == false);

    // write -> load reproduces the records exactly
    const auto copy = (dir / "copy.csv").string();
    io::save_posts_csv(copy, posts);
    const auto again = io::load_posts(copy);
    REQUIRE(again.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(again[i].pid == posts[i].pid);
        CHECK(again[i].uid == posts[i].uid);
        CHECK(again[i].timestamp == posts[i].timestamp);
        CHECK(again[i].latitude == posts[i].latitude);
        CHECK(again[i].label == posts[i].label);
        CHECK(again[i].ispublic == posts[i].ispublic);
    }
}

TEST_CASE("posts: duplicate pid is an error naming the pid") {
    const auto dir = temp_dir();
    const auto path = write_file(dir / "posts.csv",
                                 std::string(kPostHeader) + "\nu1,7,0,,,,,,,,,\nu2,7,1,,,,,,,,,\n");
    CHECK_THROWS_WITH_AS(io::load_posts(path), doctest::Contains("duplicate pid 7"),
                         std::runtime_error);
}

TEST_CASE("posts: out-of-range and inconsistent geo are rejected") {
    const auto dir = temp_dir();
    CHECK_THROWS_WITH_AS(
        io::load_posts(write_file(dir / "a.csv",
                                  std::string(kPostHeader) + "\nu1,1,0,95,10,,,,,,,\n")),
        doctest::Contains("latitude out of range"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        io::load_posts(write_file(dir / "b.csv",
                                  std::string(kPostHeader) + "\nu1,1,0,10,181,,,,,,,\n")),
        doctest::Contains("longitude out of range"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        io::load_posts(write_file(dir / "c.csv",
                                  std::string(kPostHeader) + "\nu1,1,0,10,,,,,,,,\n")),
        doctest::Contains("present together"), std::runtime_error);
}

TEST_CASE("posts: a bad row reports its line number") {
    const auto dir = temp_dir();
    const auto path = write_file(dir / "posts.csv",
                                 std::string(kPostHeader) +
                                     "\nu1,1,0,,,,,,,,,\nu2,not_a_pid,0,,,,,,,,,\n");
    CHECK_THROWS_WITH_AS(io::load_posts(path), doctest::Contains(":3"), std::runtime_error);
}

TEST_CASE("posts: jsonl carries the same schema") {
    const auto dir = temp_dir();
    const auto path = write_file(
        dir / "posts.jsonl",
        R"({"uid":"u1","pid":10,"timestamp":1690000000,"latitude":1.5,"longitude":2.5,)"
        R"("geoaccuracy":12,"category":"art","ispublic":true,"label":4.5})"
        "\n"
        R"({"uid":"u2","pid":11,"timestamp":0,"label":null})"
        "\n");
    const auto posts = io::load_posts(path);
    REQUIRE(posts.size() == 2);
    CHECK(posts[0].latitude == doctest::Approx(1.5));
    CHECK(posts[0].ispublic == true);
    CHECK_FALSE(posts[1].label.has_value());
}

TEST_CASE("profiles: header-only file loads to an empty map") {
    const auto dir = temp_dir();
    const auto path = write_file(
        dir / "profiles.csv",
        "uid,follower,following,totalViews,totalFaves,totalInGroup,totalTags,totalGeotagged,"
        "totalImages\n");
    CHECK(io::load_profiles(path).empty());
}

TEST_CASE("profiles: direct parse of one row") {
    const auto dir = temp_dir();
    const auto path = write_file(
        dir / "profiles.csv",
        "uid,follower,following,totalViews,totalFaves,totalInGroup,totalTags,totalGeotagged,"
        "totalImages\nu1,10,5,100,3,2,7,1,40\n");
    const auto profiles = io::load_profiles(path);
    REQUIRE(profiles.size() == 1);
    const auto& p = profiles.at("u1");
    CHECK(p.follower == doctest::Approx(10));
    CHECK(p.following == doctest::Approx(5));
    CHECK(p.total_views == doctest::Approx(100));
    CHECK(p.total_faves == doctest::Approx(3));
    CHECK(p.total_in_group == doctest::Approx(2));
    CHECK(p.total_tags == doctest::Approx(7));
    CHECK(p.total_geotagged == doctest::Approx(1));
    CHECK(p.total_images == doctest::Approx(40));
}

TEST_CASE("profiles: negative counter and duplicate uid are errors") {
    const auto dir = temp_dir();
    const std::string header =
        "uid,follower,following,totalViews,totalFaves,totalInGroup,totalTags,totalGeotagged,"
        "totalImages\n";
    CHECK_THROWS_WITH_AS(
        io::load_profiles(write_file(dir / "neg.csv", header + "u1,-1,5,100,3,2,7,1,40\n")),
        doctest::Contains("negative follower"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        io::load_profiles(write_file(dir / "dup.csv", header + "u1,1,,,,,,,\nu1,2,,,,,,,\n")),
        doctest::Contains("duplicate uid"), std::runtime_error);
}

TEST_CASE("femb: empty block with dim 4 round trips") {
    const auto dir = temp_dir();
    EmbeddingBlock block;
    block.name = "cap";
    block.dim = 4;
    const auto path = (dir / "cap.femb").string();
    io::save_embedding_block_femb(path, block);
    const auto loaded = io::load_embedding_block(path);
    CHECK(loaded.name == "cap");
    CHECK(loaded.dim == 4);
    CHECK(loaded.rows.empty());
}

TEST_CASE("femb: write then read is bit-identical") {
    const auto dir = temp_dir();
    Rng rng(77);
    EmbeddingBlock block;
    block.name = "image";
    block.dim = 7;
    for (std::uint64_t pid = 1; pid <= 25; ++pid) {
        std::vector<float> v(7);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        block.rows.emplace(pid, std::move(v));
    }
    const auto path = (dir / "image.femb").string();
    io::save_embedding_block_femb(path, block);
    const auto loaded = io::load_embedding_block(path);
    REQUIRE(loaded.rows.size() == block.rows.size());
    for (const auto& [pid, vec] : block.rows) {
        const auto& got = loaded.rows.at(pid);
        REQUIRE(got.size() == vec.size());
        CHECK(std::memcmp(got.data(), vec.data(), vec.size() * sizeof(float)) == 0);
    }
    // and the file itself is reproduced byte for byte
    const auto path2 = (dir / "image2.femb").string();
    io::save_embedding_block_femb(path2, loaded);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("femb: truncated payload is an error") {
    const auto dir = temp_dir();
    EmbeddingBlock block;
    block.name = "m";
    block.dim = 3;
    block.rows.emplace(1, std::vector<float>{1.f, 2.f, 3.f});
    block.rows.emplace(2, std::vector<float>{4.f, 5.f, 6.f});
    const auto path = (dir / "m.femb").string();
    io::save_embedding_block_femb(path, block);

    // keep the header and the first record only
    std::string bytes = slurp(path);
    const std::size_t record = 8 + 3 * sizeof(float);
    bytes.resize(bytes.size() - record - 4);  // second record cut mid-way
    const auto cut = write_file(dir / "cut.femb", bytes);
    CHECK_THROWS_WITH_AS(io::load_embedding_block(cut), doctest::Contains("truncated"),
                         std::runtime_error);
}

TEST_CASE("femb: bad magic and non-finite components are errors") {
    const auto dir = temp_dir();
    const auto bad = write_file(dir / "bad.femb", "NOPE rest of file");
    CHECK_THROWS_WITH_AS(io::load_embedding_block(bad), doctest::Contains("bad magic"),
                         std::runtime_error);

    EmbeddingBlock block;
    block.name = "x";
    block.dim = 2;
    block.rows.emplace(5, std::vector<float>{1.f, 2.f});
    const auto path = (dir / "x.femb").string();
    io::save_embedding_block_femb(path, block);
    std::string bytes = slurp(path);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + bytes.size() - sizeof(float), &nan, sizeof(float));
    const auto nan_path = write_file(dir / "nan.femb", bytes);
    CHECK_THROWS_WITH_AS(io::load_embedding_block(nan_path), doctest::Contains("non-finite"),
                         std::runtime_error);
}

TEST_CASE("femb: csv fallback reads pid,v0,... and is named after the stem") {
    const auto dir = temp_dir();
    const auto path = write_file(dir / "single_lang.csv", "pid,v0,v1\n3,0.5,-1.25\n9,2,4\n");
    const auto block = io::load_embedding_block(path);
    CHECK(block.name == "single_lang");
    CHECK(block.dim == 2);
    REQUIRE(block.rows.size() == 2);
    CHECK(block.rows.at(3)[1] == doctest::Approx(-1.25));
}

TEST_CASE("dataset dir: falls back to posts.jsonl when posts.csv is absent") {
    const auto dir = temp_dir();
    write_file(dir / "posts.jsonl",
               R"({"uid":"u1","pid":1,"timestamp":100,"label":2.5})"
               "\n"
               R"({"uid":"u2","pid":2,"timestamp":200,"label":3.5})"
               "\n");
    write_file(dir / "profiles.csv",
               "uid,follower,following,totalViews,totalFaves,totalInGroup,totalTags,"
               "totalGeotagged,totalImages\nu1,5,,,,,,,\n");
    EmbeddingBlock cap;
    cap.name = "cap";
    cap.dim = 2;
    cap.rows.emplace(1, std::vector<float>{1.f, 2.f});
    io::save_embedding_block_femb((dir / "cap.femb").string(), cap);

    const Dataset ds = io::load_dataset_dir(dir.string());
    REQUIRE(ds.posts.size() == 2);
    CHECK(ds.posts[0].pid == 1);
    CHECK(ds.profile_missing == std::vector<std::uint8_t>{0, 1});
    CHECK(ds.embedding_missing[0] == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("join: resolved lookups leave no flags; missing profile is flagged") {
    std::vector<PostRecord> posts(2);
    posts[0].uid = "u1";
    posts[0].pid = 1;
    posts[1].uid = "u2";
    posts[1].pid = 2;

    std::unordered_map<std::string, UserProfile> profiles;
    UserProfile p1;
    p1.uid = "u1";
    p1.follower = 10;
    profiles.emplace("u1", p1);
    UserProfile p2;
    p2.uid = "u2";
    p2.follower = 20;
    profiles.emplace("u2", p2);

    EmbeddingBlock block;
    block.name = "cap";
    block.dim = 2;
    block.rows.emplace(1, std::vector<float>{1.f, 0.f});
    block.rows.emplace(2, std::vector<float>{0.f, 1.f});

    const Dataset full = join_dataset(posts, profiles, {block});
    CHECK(full.profile_missing == std::vector<std::uint8_t>{0, 0});
    CHECK(full.embedding_missing[0] == std::vector<std::uint8_t>{0, 0});

    profiles.erase("u2");
    const Dataset missing = join_dataset(posts, profiles, {block});
    CHECK(missing.profile_missing == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("join: an embedding row with an unknown pid is an orphan error") {
    std::vector<PostRecord> posts(1);
    posts[0].uid = "u1";
    posts[0].pid = 1;
    EmbeddingBlock block;
    block.name = "cap";
    block.dim = 1;
    block.rows.emplace(99, std::vector<float>{1.f});
    CHECK_THROWS_WITH_AS(join_dataset(posts, {}, {block}), doctest::Contains("pid 99"),
                         std::runtime_error);
}

TEST_CASE("join: post order is never changed") {
    Rng rng(3);
    std::vector<PostRecord> posts(50);
    for (std::size_t i = 0; i < posts.size(); ++i) {
        posts[i].uid = "u" + std::to_string(rng.bounded(10));
        posts[i].pid = 1000 - i;  // descending pids; order must be preserved as given
    }
    const Dataset ds = join_dataset(posts, {}, {});
    for (std::size_t i = 0; i < posts.size(); ++i) CHECK(ds.posts[i].pid == 1000 - i);
}

TEST_CASE("impute: clean dataset is unchanged and indicators stay zero") {
    std::vector<PostRecord> posts(2);
    for (int i = 0; i < 2; ++i) {
        posts[i].uid = "u1";
        posts[i].pid = i + 1;
        posts[i].geoaccuracy = 5;
        posts[i].category = "art";
        posts[i].subcategory = "art_1";
        posts[i].concept_tag = "museum";
        posts[i].mediatype = "photo";
        posts[i].ispublic = true;
        posts[i].label = 1.0;
    }
    UserProfile prof;
    prof.uid = "u1";
    for (std::size_t c = 0; c < kProfileCounterCount; ++c) prof.counter(c) = 10.0 * (c + 1);

    const Dataset ds = join_dataset(posts, {{"u1", prof}}, {});
    auto [imputed, stats] = impute_missing(ds);
    CHECK(stats.fitted);
    CHECK(imputed.profile_missing == std::vector<std::uint8_t>{0, 0});
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(imputed.posts[i].geoaccuracy == doctest::Approx(5));
        CHECK(imputed.posts[i].category == "art");
    }
}

TEST_CASE("impute: missing follower takes the fitted training median") {
    // training medians framed as prior stats with follower = 10
    ImputeStats stats;
    stats.fitted = true;
    stats.medians["geoaccuracy"] = 3.0;
    for (std::size_t c = 0; c < kProfileCounterCount; ++c)
        stats.medians[kProfileCounterNames[c]] = 10.0;

    std::vector<PostRecord> posts(1);
    posts[0].uid = "u1";
    posts[0].pid = 1;
    UserProfile prof;
    prof.uid = "u1";  // follower left missing
    const Dataset ds = join_dataset(posts, {{"u1", prof}}, {});

    const auto [imputed, used] = impute_missing(ds, stats);
    CHECK(imputed.profiles.at("u1").follower == doctest::Approx(10.0));
    CHECK(used.medians.at("follower") == doctest::Approx(10.0));
}

TEST_CASE("impute: median of {1,2,100} with one missing row is 2") {
    std::vector<PostRecord> posts(4);
    const double values[] = {1.0, 2.0, 100.0};
    std::unordered_map<std::string, UserProfile> profiles;
    for (int i = 0; i < 4; ++i) {
        posts[i].uid = "u" + std::to_string(i);
        posts[i].pid = i + 1;
        UserProfile prof;
        prof.uid = posts[i].uid;
        if (i < 3) prof.follower = values[i];  // fourth row missing
        profiles.emplace(prof.uid, prof);
    }
    const Dataset ds = join_dataset(posts, profiles, {});
    auto [imputed, stats] = impute_missing(ds);
    CHECK(stats.medians.at("follower") == doctest::Approx(oracle::median({1, 2, 100})));
    CHECK(imputed.profiles.at("u3").follower == doctest::Approx(2.0));
}

TEST_CASE("impute: missing embedding rows become zero vectors, flags survive") {
    std::vector<PostRecord> posts(2);
    posts[0].uid = "u1";
    posts[0].pid = 1;
    posts[1].uid = "u1";
    posts[1].pid = 2;
    EmbeddingBlock block;
    block.name = "cap";
    block.dim = 3;
    block.rows.emplace(1, std::vector<float>{1.f, 2.f, 3.f});

    const Dataset ds = join_dataset(posts, {}, {block});
    CHECK(ds.embedding_missing[0] == std::vector<std::uint8_t>{0, 1});
    auto [imputed, stats] = impute_missing(ds);
    CHECK(imputed.blocks[0].rows.at(2) == std::vector<float>{0.f, 0.f, 0.f});
    CHECK(imputed.embedding_missing[0] == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("impute: applying twice with the same stats changes nothing") {
    Rng rng(11);
    std::vector<PostRecord> posts(30);
    std::unordered_map<std::string, UserProfile> profiles;
    for (std::size_t i = 0; i < posts.size(); ++i) {
        posts[i].uid = "u" + std::to_string(rng.bounded(8));
        posts[i].pid = i + 1;
        if (rng.uniform01() < 0.7) posts[i].geoaccuracy = static_cast<double>(rng.bounded(16));
        if (rng.uniform01() < 0.7) posts[i].category = "c" + std::to_string(rng.bounded(3));
        posts[i].label = rng.normal();
    }
    for (int u = 0; u < 8; ++u) {
        if (u == 3) continue;  // one uid with no profile at all
        UserProfile prof;
        prof.uid = "u" + std::to_string(u);
        for (std::size_t c = 0; c < kProfileCounterCount; ++c)
            if (rng.uniform01() < 0.8) prof.counter(c) = static_cast<double>(rng.bounded(100));
        profiles.emplace(prof.uid, prof);
    }
    EmbeddingBlock block;
    block.name = "cap";
    block.dim = 2;
    for (std::size_t i = 0; i < posts.size(); ++i)
        if (rng.uniform01() < 0.9)
            block.rows.emplace(posts[i].pid,
                               std::vector<float>{static_cast<float>(rng.normal()),
                                                  static_cast<float>(rng.normal())});

    const Dataset ds = join_dataset(posts, profiles, {block});
    auto [once, stats] = impute_missing(ds);
    auto [twice, stats2] = impute_missing(once, stats);

    CHECK(once.profile_missing == twice.profile_missing);
    CHECK(once.embedding_missing == twice.embedding_missing);
    REQUIRE(once.posts.size() == twice.posts.size());
    for (std::size_t i = 0; i < once.posts.size(); ++i) {
        CHECK(once.posts[i].geoaccuracy == twice.posts[i].geoaccuracy);
        CHECK(once.posts[i].category == twice.posts[i].category);
    }
    for (const auto& [uid, prof] : once.profiles)
        for (std::size_t c = 0; c < kProfileCounterCount; ++c)
            CHECK(prof.counter(c) == twice.profiles.at(uid).counter(c));
    CHECK(once.blocks[0].rows == twice.blocks[0].rows);
}

TEST_CASE("impute: a column absent from prior stats is an error") {
    ImputeStats stats;
    stats.fitted = true;
    stats.medians["geoaccuracy"] = 1.0;  // counters missing
    std::vector<PostRecord> posts(1);
    posts[0].uid = "u1";
    posts[0].pid = 1;
    const Dataset ds = join_dataset(posts, {}, {});
    CHECK_THROWS_WITH_AS(impute_missing(ds, stats), doctest::Contains("no fitted statistic"),
                         std::runtime_error);
}

TEST_CASE("round trip: profiles survive write/load byte for byte") {
    const auto dir = temp_dir();
    Rng rng(555);
    std::unordered_map<std::string, UserProfile> profiles;
    for (int u = 0; u < 15; ++u) {
        UserProfile prof;
        prof.uid = "user" + std::to_string(u);
        for (std::size_t c = 0; c < kProfileCounterCount; ++c)
            if (rng.uniform01() < 0.85) prof.counter(c) = std::floor(rng.uniform(0, 1e6));
        profiles.emplace(prof.uid, std::move(prof));
    }
    const auto p1 = (dir / "prof_a.csv").string();
    const auto p2 = (dir / "prof_b.csv").string();
    io::save_profiles_csv(p1, profiles);
    io::save_profiles_csv(p2, io::load_profiles(p1));
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("round trip: random datasets survive write/load byte for byte") {
    const auto dir = temp_dir();
    Rng rng(1234);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<PostRecord> posts(20);
        for (std::size_t i = 0; i < posts.size(); ++i) {
            posts[i].uid = "user_" + std::to_string(rng.bounded(6));
            posts[i].pid = i + 1;
            posts[i].timestamp = static_cast<std::int64_t>(rng.bounded(2000000000));
            if (rng.uniform01() < 0.8) {
                posts[i].latitude = rng.uniform(-90.0, 90.0);
                posts[i].longitude = rng.uniform(-180.0, 180.0);
            }
            if (rng.uniform01() < 0.8) posts[i].geoaccuracy = static_cast<double>(rng.bounded(17));
            if (rng.uniform01() < 0.8) posts[i].category = "cat_" + std::to_string(rng.bounded(4));
            if (rng.uniform01() < 0.5) posts[i].ispublic = rng.uniform01() < 0.5;
            if (rng.uniform01() < 0.9) posts[i].label = rng.normal(5.0, 2.0);
        }
        const auto p1 = (dir / ("t" + std::to_string(trial) + "_a.csv")).string();
        const auto p2 = (dir / ("t" + std::to_string(trial) + "_b.csv")).string();
        io::save_posts_csv(p1, posts);
        io::save_posts_csv(p2, io::load_posts(p1));
        CHECK(slurp(p1) == slurp(p2));
    }
}
