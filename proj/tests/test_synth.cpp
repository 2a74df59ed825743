#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "smp/features.hpp"
#include "smp/io.hpp"
#include "smp/metrics.hpp"
#include "smp/synth.hpp"

using namespace smp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("smp_synth_" + std::to_string(::getpid()) + "_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

synth::SynthConfig small_cfg() {
    synth::SynthConfig cfg;
    cfg.n_users = 60;
    cfg.posts_per_user_min = 2;
    cfg.posts_per_user_max = 5;
    cfg.embedding_dims = {{"cap", 6}, {"image", 4}};
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("identical config and seed produce byte-identical files") {
    const auto dir_a = temp_dir("det_a");
    const auto dir_b = temp_dir("det_b");
    const auto cfg = small_cfg();
    synth::generate_synthetic(cfg, dir_a.string());
    synth::generate_synthetic(cfg, dir_b.string());

    for (const char* split : {"train", "test"}) {
        for (const auto& entry : fs::directory_iterator(dir_a / split)) {
            const auto other = dir_b / split / entry.path().filename();
            REQUIRE(fs::exists(other));
            CHECK(slurp(entry.path()) == slurp(other));
        }
    }
    // different seeds diverge
    auto cfg2 = cfg;
    cfg2.seed = 8;
    const auto dir_c = temp_dir("det_c");
    synth::generate_synthetic(cfg2, dir_c.string());
    CHECK(slurp(dir_a / "train" / "posts.csv") != slurp(dir_c / "train" / "posts.csv"));
}

TEST_CASE("generated directories load, join and match the manifest counts") {
    const auto dir = temp_dir("load");
    const auto cfg = small_cfg();
    const auto out = synth::generate_synthetic(cfg, dir.string());

    const Dataset train = io::load_dataset_dir(out.train_dir);
    const Dataset test = io::load_dataset_dir(out.test_dir);
    CHECK(train.posts.size() == out.train_posts);
    CHECK(test.posts.size() == out.test_posts);
    CHECK(train.blocks.size() == cfg.embedding_dims.size());

    // user-disjoint splits
    std::set<std::string> train_uids, test_uids;
    for (const auto& p : train.posts) train_uids.insert(p.uid);
    for (const auto& p : test.posts) test_uids.insert(p.uid);
    for (const auto& uid : test_uids) CHECK(train_uids.count(uid) == 0);

    // labels present everywhere
    for (const auto& p : train.posts) CHECK(p.label.has_value());
    for (const auto& p : test.posts) CHECK(p.label.has_value());
}

TEST_CASE("noiseless follower-only labels are perfectly rank-correlated with follower") {
    auto cfg = small_cfg();
    cfg.noise_sigma = 0.0;
    cfg.beta_hour = 0.0;
    cfg.beta_embed = 0.0;
    cfg.p_missing_profile = 0.0;
    cfg.p_missing_counter = 0.0;
    const auto dir = temp_dir("mono");
    const auto out = synth::generate_synthetic(cfg, dir.string());

    const Dataset train = io::load_dataset_dir(out.train_dir);
    auto [matrix, state] = feat::fit_transform(train, {"time", "n", "eu"});
    std::vector<double> labels;
    for (const auto& p : train.posts) labels.push_back(*p.label);

    const auto report = metrics::feature_correlation_report(matrix, labels);
    REQUIRE_FALSE(report.rows.empty());
    CHECK(report.rows[0].feature == "eu.follower");
    CHECK(report.rows[0].abs_src == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pinned default config keeps a strong follower signal") {
    synth::SynthConfig cfg;  // defaults: 500 users, 4-10 posts, seed 42
    const auto dir = temp_dir("default");
    const auto out = synth::generate_synthetic(cfg, dir.string());

    const Dataset train = io::load_dataset_dir(out.train_dir);
    auto [matrix, state] = feat::fit_transform(train, {"eu"});
    std::vector<double> labels;
    for (const auto& p : train.posts) labels.push_back(*p.label);

    std::size_t follower_col = 0;
    for (std::size_t j = 0; j < matrix.cols; ++j)
        if (matrix.col_names[j] == "eu.follower") follower_col = j;
    std::vector<double> follower(matrix.rows);
    for (std::size_t i = 0; i < matrix.rows; ++i) follower[i] = matrix.at(i, follower_col);

    const double src = std::fabs(metrics::spearman_src(follower, labels).value);
    CHECK(src > 0.5);   // the spec-level floor
    CHECK(src > 0.90);  // regression pin for the shipped seed (measured 0.952)
}

TEST_CASE("config validation rejects bad values") {
    synth::SynthConfig cfg;
    cfg.n_users = 1;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.noise_sigma = -0.5;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.posts_per_user_max = 0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.signal_block = "nope";
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.test_fraction = 1.0;
    CHECK_THROWS(cfg.validate());
}
