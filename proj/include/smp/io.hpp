#ifndef SMP_IO_HPP
#define SMP_IO_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "smp/data.hpp"

namespace smp::io {

enum class PostFormat { Csv, Jsonl };

/// posts file: header uid,pid,timestamp,latitude,longitude,geoaccuracy,
/// category,subcategory,concept,mediatype,ispublic,label. Blank = missing.
/// JSONL uses the same keys (null/absent = missing).
std::vector<PostRecord> load_posts(const std::string& path, PostFormat format);
std::vector<PostRecord> load_posts(const std::string& path);  // by extension

void save_posts_csv(const std::string& path, const std::vector<PostRecord>& posts);

/// profiles file: header uid,follower,following,totalViews,totalFaves,
/// totalInGroup,totalTags,totalGeotagged,totalImages.
std::unordered_map<std::string, UserProfile> load_profiles(const std::string& path);
void save_profiles_csv(const std::string& path,
                       const std::unordered_map<std::string, UserProfile>& profiles);

/// FEMB little-endian binary: magic "FEMB", u32 version=1, u8 name length,
/// name bytes, u32 dim, u64 count, then count * (u64 pid, dim * f32).
/// A .csv path falls back to header pid,v0,...,v{dim-1}; the block is then
/// named after the file stem.
EmbeddingBlock load_embedding_block(const std::string& path);
void save_embedding_block_femb(const std::string& path, const EmbeddingBlock& block);
void save_embedding_block_csv(const std::string& path, const EmbeddingBlock& block);

/// A dataset directory holds posts.csv (or posts.jsonl), profiles.csv and
/// any number of *.femb blocks. Returns the joined dataset.
Dataset load_dataset_dir(const std::string& dir);

/// prediction / label files: CSV with header pid,<value-name>.
struct PidValueFile {
    std::vector<std::uint64_t> pids;
    std::vector<double> values;
};
PidValueFile load_pid_values(const std::string& path);
void save_pid_values(const std::string& path, const std::string& value_name,
                     const std::vector<std::uint64_t>& pids, const std::vector<double>& values);

/// Round-trip-exact decimal rendering of a double (shortest %.17g form).
std::string format_double(double v);

/// Split one CSV record; supports quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

/// FNV-1a 64-bit digest of a file, hex-encoded. Used in run manifests.
std::string file_digest(const std::string& path);

}  // namespace smp::io

#endif
