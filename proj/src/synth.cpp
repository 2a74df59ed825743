#include "smp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "smp/data.hpp"
#include "smp/features.hpp"
#include "smp/io.hpp"
#include "smp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace smp::synth {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

constexpr double kTwoPi = 6.283185307179586476925286766559;

const std::vector<std::string> kCategories = {"animals", "art",    "food",   "nature",
                                              "people",  "sports", "travel", "urban"};
const std::vector<std::string> kConcepts = {"beach",  "bridge", "concert", "forest",
                                            "market", "museum", "party",   "pet",
                                            "portrait", "stadium", "street", "sunset"};
const std::vector<std::string> kMediaTypes = {"photo", "video"};

}  // namespace

void SynthConfig::validate() const {
    if (n_users < 2) fail("synth config: n_users must be >= 2");
    if (posts_per_user_min < 1 || posts_per_user_max < posts_per_user_min)
        fail("synth config: bad posts_per_user range");
    if (!(noise_sigma >= 0.0)) fail("synth config: noise_sigma must be >= 0");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        fail("synth config: test_fraction must be in [0,1)");
    if (!std::isfinite(beta_follower) || !std::isfinite(beta_hour) || !std::isfinite(beta_embed))
        fail("synth config: signal weights must be finite");
    if (embedding_dims.count(signal_block) == 0)
        fail("synth config: signal_block '" + signal_block + "' has no embedding dims entry");
    for (const auto& [tag, dim] : embedding_dims)
        if (dim == 0) fail("synth config: embedding dim for '" + tag + "' must be positive");
    for (double p : {p_missing_geo, p_missing_profile, p_missing_embedding,
                     p_missing_categorical, p_missing_counter})
        if (!(p >= 0.0 && p < 1.0)) fail("synth config: missing-rates must be in [0,1)");
}

SynthOutput generate_synthetic(const SynthConfig& cfg, const std::string& out_dir) {
    cfg.validate();

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "train", ec);
    fs::create_directories(fs::path(out_dir) / "test", ec);
    if (!fs::is_directory(fs::path(out_dir) / "train") ||
        !fs::is_directory(fs::path(out_dir) / "test"))
        fail("generate_synthetic: cannot create output directories under " + out_dir);

    Rng rng(cfg.seed);

    // --- users -------------------------------------------------------------
    struct User {
        std::string uid;
        double follower = 0.0;
        UserProfile profile;
        bool profile_omitted = false;
        bool is_test = false;
    };

    const std::size_t n_users = cfg.n_users;
    std::vector<User> users(n_users);
    for (std::size_t u = 0; u < n_users; ++u) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "u%05zu", u);
        users[u].uid = buf;

        const double follower = std::round(std::exp(rng.uniform(0.0, std::log(1e6))));
        users[u].follower = std::max(1.0, follower);

        // other counters scale with follower through noisy power laws, so the
        // external group shares the identity signal with varying strength
        auto counter = [&](double expo, double sigma) {
            const double v = std::pow(users[u].follower, expo) * std::exp(rng.normal(0.0, sigma));
            return std::round(std::max(0.0, v));
        };
        UserProfile& prof = users[u].profile;
        prof.uid = users[u].uid;
        prof.follower = users[u].follower;
        prof.following = counter(0.7, 0.6);
        prof.total_views = counter(1.1, 0.7);
        prof.total_faves = counter(0.9, 0.7);
        prof.total_in_group = counter(0.8, 0.6);
        prof.total_tags = counter(0.5, 0.6);
        prof.total_geotagged = counter(0.6, 0.7);
        prof.total_images = std::round(std::exp(rng.uniform(0.0, std::log(1e4))));

        users[u].profile_omitted = rng.uniform01() < cfg.p_missing_profile;
        for (std::size_t c = 0; c < kProfileCounterCount; ++c)
            if (rng.uniform01() < cfg.p_missing_counter) prof.counter(c).reset();
    }

    // user-disjoint test split
    {
        std::vector<std::size_t> order(n_users);
        for (std::size_t i = 0; i < n_users; ++i) order[i] = i;
        rng.shuffle(order);
        std::size_t n_test_users = 0;
        if (cfg.test_fraction > 0.0) {
            n_test_users = static_cast<std::size_t>(
                std::llround(cfg.test_fraction * static_cast<double>(n_users)));
            n_test_users = std::max<std::size_t>(1, std::min(n_test_users, n_users - 1));
        }
        for (std::size_t i = 0; i < n_test_users; ++i) users[order[i]].is_test = true;
    }

    // --- geo clusters and the planted embedding direction -------------------
    // posts cluster around a handful of city-like centers; the fine geo grid
    // then has a vocabulary of ~150 cells rather than thousands
    struct Cluster {
        double lat, lon;
    };
    std::vector<Cluster> clusters(16);
    for (auto& c : clusters) {
        c.lat = rng.uniform(-60.0, 70.0);
        c.lon = rng.uniform(-180.0, 180.0);
    }

    const std::size_t signal_dim = cfg.embedding_dims.at(cfg.signal_block);
    std::vector<double> u_dir(signal_dim);
    {
        double norm = 0.0;
        for (auto& v : u_dir) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) u_dir[0] = norm = 1.0;
        for (auto& v : u_dir) v /= norm;
    }

    // --- posts ---------------------------------------------------------------
    struct SplitData {
        std::vector<PostRecord> posts;
        std::unordered_map<std::string, UserProfile> profiles;
        std::map<std::string, EmbeddingBlock> blocks;
    };
    SplitData train, test;
    for (const auto& [tag, dim] : cfg.embedding_dims) {
        for (SplitData* split : {&train, &test}) {
            EmbeddingBlock block;
            block.name = tag;
            block.dim = dim;
            split->blocks.emplace(tag, std::move(block));
        }
    }

    const std::int64_t t0 = 1672531200;  // 2023-01-01T00:00:00Z
    const std::int64_t span = 365LL * 86400LL;
    std::uint64_t next_pid = 1;

    auto pick = [&](const std::vector<std::string>& v) {
        return v[static_cast<std::size_t>(rng.bounded(v.size()))];
    };

    for (auto& user : users) {
        SplitData& split = user.is_test ? test : train;
        if (!user.profile_omitted) split.profiles.emplace(user.uid, user.profile);

        const int n_posts = cfg.posts_per_user_min +
                            static_cast<int>(rng.bounded(static_cast<std::uint64_t>(
                                cfg.posts_per_user_max - cfg.posts_per_user_min + 1)));
        for (int p = 0; p < n_posts; ++p) {
            PostRecord rec;
            rec.uid = user.uid;
            rec.pid = next_pid++;
            rec.timestamp = t0 + static_cast<std::int64_t>(rng.bounded(span));

            if (rng.uniform01() >= cfg.p_missing_geo) {
                const Cluster& c = clusters[static_cast<std::size_t>(rng.bounded(clusters.size()))];
                rec.latitude = std::clamp(c.lat + rng.normal(0.0, 0.5), -90.0, 90.0);
                rec.longitude = std::clamp(c.lon + rng.normal(0.0, 0.5), -180.0, 180.0);
            }
            rec.geoaccuracy = static_cast<double>(1 + rng.bounded(16));

            const std::string category = pick(kCategories);
            rec.category = category;
            rec.subcategory = category + "_" + std::to_string(1 + rng.bounded(3));
            rec.concept_tag = pick(kConcepts);
            rec.mediatype = pick(kMediaTypes);
            rec.ispublic = rng.uniform01() < 0.9;
            if (rng.uniform01() < cfg.p_missing_categorical) rec.category.reset();
            if (rng.uniform01() < cfg.p_missing_categorical) rec.subcategory.reset();
            if (rng.uniform01() < cfg.p_missing_categorical) rec.concept_tag.reset();
            if (rng.uniform01() < cfg.p_missing_categorical) rec.mediatype.reset();
            if (rng.uniform01() < cfg.p_missing_categorical) rec.ispublic.reset();

            // embeddings; label uses the true signal vector even when the row
            // is later dropped from the file
            double planted = 0.0;
            for (const auto& [tag, dim] : cfg.embedding_dims) {
                std::vector<float> vec(dim);
                for (auto& v : vec) v = static_cast<float>(rng.normal());
                if (tag == cfg.signal_block) {
                    for (std::size_t j = 0; j < dim; ++j)
                        planted += static_cast<double>(vec[j]) * u_dir[j];
                }
                if (rng.uniform01() >= cfg.p_missing_embedding)
                    split.blocks.at(tag).rows.emplace(rec.pid, std::move(vec));
            }

            const int hour = feat::decompose_timestamp(rec.timestamp).hour;
            double label = cfg.beta_follower * std::log1p(user.follower) +
                           cfg.beta_hour * std::sin(kTwoPi * hour / 24.0) +
                           cfg.beta_embed * planted;
            if (cfg.noise_sigma > 0.0) label += rng.normal(0.0, cfg.noise_sigma);
            rec.label = label;

            split.posts.push_back(std::move(rec));
        }
    }

    // --- write ----------------------------------------------------------------
    SynthOutput out;
    out.train_dir = (fs::path(out_dir) / "train").string();
    out.test_dir = (fs::path(out_dir) / "test").string();
    out.train_posts = train.posts.size();
    out.test_posts = test.posts.size();

    auto write_split = [&](const SplitData& split, const std::string& dir) {
        io::save_posts_csv((fs::path(dir) / "posts.csv").string(), split.posts);
        io::save_profiles_csv((fs::path(dir) / "profiles.csv").string(), split.profiles);
        for (const auto& [tag, block] : split.blocks)
            io::save_embedding_block_femb((fs::path(dir) / (tag + ".femb")).string(), block);
    };
    write_split(train, out.train_dir);
    write_split(test, out.test_dir);

    json manifest;
    manifest["generator"] = "smp synth";
    manifest["seed"] = cfg.seed;
    manifest["config"] = {{"n_users", cfg.n_users},
                          {"posts_per_user_min", cfg.posts_per_user_min},
                          {"posts_per_user_max", cfg.posts_per_user_max},
                          {"embedding_dims", cfg.embedding_dims},
                          {"signal_block", cfg.signal_block},
                          {"beta_follower", cfg.beta_follower},
                          {"beta_hour", cfg.beta_hour},
                          {"beta_embed", cfg.beta_embed},
                          {"noise_sigma", cfg.noise_sigma},
                          {"test_fraction", cfg.test_fraction},
                          {"p_missing_geo", cfg.p_missing_geo},
                          {"p_missing_profile", cfg.p_missing_profile},
                          {"p_missing_embedding", cfg.p_missing_embedding},
                          {"p_missing_categorical", cfg.p_missing_categorical},
                          {"p_missing_counter", cfg.p_missing_counter}};
    manifest["ground_truth"] = {{"signal_block", cfg.signal_block},
                                {"signal_direction", u_dir},
                                {"label_formula",
                                 "beta_follower*log1p(follower) + beta_hour*sin(2*pi*hour/24) + "
                                 "beta_embed*dot(signal_block,u) + N(0,sigma)"}};
    manifest["train_posts"] = out.train_posts;
    manifest["test_posts"] = out.test_posts;
    json digests = json::object();
    for (const std::string& dir : {out.train_dir, out.test_dir}) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string rel =
                fs::relative(entry.path(), fs::path(out_dir)).generic_string();
            digests[rel] = io::file_digest(entry.path().string());
        }
    }
    manifest["file_digests"] = digests;

    out.manifest_path = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream mf(out.manifest_path);
    if (!mf) fail("cannot write manifest: " + out.manifest_path);
    mf << manifest.dump(2) << "\n";
    if (!mf) fail("write failed: " + out.manifest_path);
    return out;
}

}  // namespace smp::synth
