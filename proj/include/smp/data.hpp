#ifndef SMP_DATA_HPP
#define SMP_DATA_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace smp {

/// One social post's metadata. Blank CSV cells map to empty optionals.
struct PostRecord {
    std::string uid;
    std::uint64_t pid = 0;
    std::int64_t timestamp = 0;
    std::optional<double> latitude;   // degrees, [-90, 90]
    std::optional<double> longitude;  // degrees, [-180, 180]
    std::optional<double> geoaccuracy;  // 0..16 in the data; double so an
                                        // imputed median survives exactly
    std::optional<std::string> category;
    std::optional<std::string> subcategory;
    std::optional<std::string> concept_tag;
    std::optional<std::string> mediatype;
    std::optional<bool> ispublic;
    std::optional<double> label;  // absent on unlabeled test rows
};

/// Per-user identity counters. Non-negative integers in the data; stored as
/// doubles so an imputed median survives exactly. Missing cells stay missing
/// until imputation.
struct UserProfile {
    std::string uid;
    std::optional<double> follower;
    std::optional<double> following;
    std::optional<double> total_views;
    std::optional<double> total_faves;
    std::optional<double> total_in_group;
    std::optional<double> total_tags;
    std::optional<double> total_geotagged;
    std::optional<double> total_images;

    std::optional<double>& counter(std::size_t i);
    const std::optional<double>& counter(std::size_t i) const;
};

inline constexpr std::size_t kProfileCounterCount = 8;
// column order of the profiles CSV after uid
extern const char* const kProfileCounterNames[kProfileCounterCount];

/// Named dense vector table keyed by pid. Values stay float32 so a
/// write/load round trip is bit-identical.
struct EmbeddingBlock {
    std::string name;
    std::size_t dim = 0;
    std::unordered_map<std::uint64_t, std::vector<float>> rows;
};

/// Joined view over posts, profiles and embedding blocks. Missing lookups
/// are flagged here (not errors); impute_missing fills them in.
struct Dataset {
    std::vector<PostRecord> posts;
    std::unordered_map<std::string, UserProfile> profiles;
    std::vector<EmbeddingBlock> blocks;

    // set by join_dataset, one entry per post, preserved by impute_missing
    std::vector<std::uint8_t> profile_missing;
    // per block (same order as `blocks`), one entry per post
    std::vector<std::vector<std::uint8_t>> embedding_missing;

    std::size_t block_index(const std::string& name) const;  // npos if absent
    bool joined() const { return profile_missing.size() == posts.size(); }
};

/// Training medians for the numeric columns. Keyed by column name
/// ("geoaccuracy", "follower", ... "totalImages"); map keeps serialization
/// order deterministic.
struct ImputeStats {
    std::map<std::string, double> medians;
    bool fitted = false;
};

/// Resolve per-post profile and embedding lookups. Posts keep their order.
/// An embedding row whose pid appears in no post is an ingestion error.
Dataset join_dataset(std::vector<PostRecord> posts,
                     std::unordered_map<std::string, UserProfile> profiles,
                     std::vector<EmbeddingBlock> blocks);

/// Fill missing values: numerics get the training median, categoricals get
/// the literal category "unknown", absent embedding rows get a zero vector.
/// The missing flags set at join time are what later becomes the indicator
/// columns; they are left untouched so the operation is idempotent.
///
/// Pass an unfitted ImputeStats to fit on `dataset` (training split only).
std::pair<Dataset, ImputeStats> impute_missing(Dataset dataset, ImputeStats stats = {});

/// Median by sort; even count averages the middle pair. Empty -> 0.
double median_of(std::vector<double> values);

}  // namespace smp

#endif
