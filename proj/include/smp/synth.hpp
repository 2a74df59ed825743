#ifndef SMP_SYNTH_HPP
#define SMP_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>

namespace smp::synth {

/// Seeded generator config. The label construction plants an identity
/// signal (follower), a diurnal signal (hour) and one embedding direction:
///   label = beta_follower * log(1 + follower)
///         + beta_hour * sin(2*pi*hour / 24)
///         + beta_embed * (signal_block vector . u)
///         + Normal(0, noise_sigma)
/// with follower log-uniform over [1, 1e6] per user and u a fixed unit
/// direction recorded in the manifest.
struct SynthConfig {
    std::size_t n_users = 500;
    int posts_per_user_min = 4;
    int posts_per_user_max = 10;
    std::map<std::string, std::size_t> embedding_dims = {
        {"cap", 16}, {"image", 16}, {"single_lang", 12}, {"multi_lang", 12}, {"m", 8}};
    std::string signal_block = "cap";
    double beta_follower = 1.0;
    double beta_hour = 0.3;
    double beta_embed = 0.5;
    double noise_sigma = 0.5;
    std::uint64_t seed = 42;
    double test_fraction = 0.2;  // user-disjoint test split

    // missing-data rates so imputation paths see real work
    double p_missing_geo = 0.05;
    double p_missing_profile = 0.03;
    double p_missing_embedding = 0.02;
    double p_missing_categorical = 0.05;
    double p_missing_counter = 0.02;

    void validate() const;
};

struct SynthOutput {
    std::string train_dir;
    std::string test_dir;
    std::string manifest_path;
    std::size_t train_posts = 0;
    std::size_t test_posts = 0;
};

/// Writes <out>/train and <out>/test dataset directories (posts.csv,
/// profiles.csv, <tag>.femb) plus a ground-truth manifest at
/// <out>/manifest.json. Byte-identical for identical config and seed.
SynthOutput generate_synthetic(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace smp::synth

#endif
