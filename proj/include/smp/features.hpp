#ifndef SMP_FEATURES_HPP
#define SMP_FEATURES_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "smp/data.hpp"
#include "smp/linalg.hpp"

namespace smp::feat {

// Canonical block order of the assembled matrix. Ablation subsets preserve
// this order.
inline const std::vector<std::string> kBlockOrder = {
    "cap", "image", "time", "geo", "n", "eu", "single_lang", "multi_lang", "cat", "m"};

inline const std::vector<std::string> kEmbeddingTags = {
    "cap", "image", "single_lang", "multi_lang", "m"};

bool is_embedding_tag(const std::string& tag);

struct TimeParts {
    std::int64_t year;
    int month;    // 1..12
    int day;      // 1..31
    int weekday;  // 0..6, Monday = 0
    int hour;     // 0..23
};

/// Split a Unix timestamp (UTC, proleptic Gregorian) into calendar parts.
/// Accepts any 64-bit value.
TimeParts decompose_timestamp(std::int64_t ts);

/// Grid cell id "g{row}_{col}" at the given resolution in degrees. The
/// upper boundary (lat 90 / lon 180) is clamped into the last cell.
std::string bucket_geo(double lat, double lon, double resolution_deg);

/// Fitted one-hot vocabulary. Index 0 is reserved for "unknown"; fitted
/// categories follow in lexicographic order.
struct OneHotMap {
    std::vector<std::string> categories;  // sorted, excludes "unknown"

    std::size_t width() const { return categories.size() + 1; }
    std::size_t index_of(const std::string& value) const;
};

OneHotMap fit_one_hot(const std::vector<std::string>& column);
std::vector<double> apply_one_hot(const OneHotMap& map, const std::string& value);

/// Mean and sample std (n-1 denominator); std below 1e-12 is floored to 1
/// so constant columns map to 0.
std::pair<double, double> fit_standardize(const std::vector<double>& column);
double apply_standardize(double mean, double std, double x) ;

struct BlockSpan {
    std::string name;
    std::size_t start = 0;
    std::size_t width = 0;
};

/// Contiguous, non-overlapping named column ranges.
struct BlockSchema {
    std::vector<BlockSpan> blocks;

    std::size_t total_width() const;
    const BlockSpan* find(const std::string& name) const;
    void check() const;  // throws if spans are not contiguous from 0 or names repeat
};

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
    BlockSchema schema;
    std::vector<std::string> col_names;  // block-prefixed, e.g. "eu.follower"
    std::vector<std::uint64_t> pids;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

/// Fit-time knobs. PCA width = smallest count reaching `pca_target_variance`
/// of cumulative explained variance, capped at `pca_max_dims`, floor 1.
struct TransformOptions {
    double geo_res_coarse = 10.0;
    double geo_res_fine = 1.0;
    double pca_target_variance = 0.95;
    std::size_t pca_max_dims = 64;
    // per embedding tag overrides of (target variance, max dims)
    std::map<std::string, std::pair<double, std::size_t>> pca_per_block;

    std::pair<double, std::size_t> pca_params(const std::string& tag) const;
};

/// Everything fitted on a training split: imputation medians, one-hot
/// vocabularies, PCA bases, and column standardization stats for the neural
/// input path. Applying it is deterministic and never updates it.
struct TransformState {
    int version = 1;
    std::vector<std::string> enabled;  // canonical-order subset
    TransformOptions options;
    ImputeStats impute;
    OneHotMap geo_coarse;
    OneHotMap geo_fine;
    std::map<std::string, OneHotMap> categorical;  // field -> vocabulary

    struct EmbeddingState {
        std::size_t source_dim = 0;
        std::size_t width = 0;  // kept principal components
        linalg::PCAModel pca;   // truncated to `width`
    };
    std::map<std::string, EmbeddingState> embeddings;  // tag -> state

    // Per-column conditioning for the neural input path only; tree models
    // read the raw matrix. Non-negative heavy-tailed counters (the eu block)
    // go through log1p before the z-score.
    struct ColumnScaler {
        bool log1p = false;
        double mean = 0.0;
        double std = 1.0;

        double apply(double x) const;
    };
    std::map<std::string, ColumnScaler> standardize;

    std::string to_json_string() const;
    static TransformState from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static TransformState load(const std::string& path);
};

/// Choose the PCA width for an embedding block per the options and fit the
/// projection on the given rows (training rows only).
TransformState::EmbeddingState fit_embedding_reduction(const linalg::Mat& train_rows,
                                                       double target_variance,
                                                       std::size_t max_dims);

/// Fit the whole transform on a training dataset (joined, pre-imputation)
/// and return the feature matrix plus the fitted state.
std::pair<FeatureMatrix, TransformState> fit_transform(const Dataset& dataset,
                                                       const std::set<std::string>& enabled_blocks,
                                                       const TransformOptions& options = {});

/// Apply a fitted state to another dataset. Never reads labels or updates
/// the state.
FeatureMatrix apply_transform(const Dataset& dataset, const TransformState& state);

/// Restrict a matrix to the named blocks, keeping their relative order and
/// re-basing the schema at 0.
FeatureMatrix select_blocks(const FeatureMatrix& matrix, const std::set<std::string>& keep);

/// Standardized copy of the matrix for the neural input path.
FeatureMatrix standardize_matrix(const FeatureMatrix& matrix, const TransformState& state);

/// Debug export: header pid,<block-prefixed column names>.
void export_matrix_csv(const FeatureMatrix& matrix, const std::string& path);

}  // namespace smp::feat

#endif
