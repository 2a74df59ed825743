#include "smp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace smp::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::ifstream open_input(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) fail("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) fail("cannot open file for writing: " + path);
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool parse_double_strict(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

bool parse_u64_strict(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return false;
    try {
        std::size_t pos = 0;
        out = std::stoull(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_i64_strict(const std::string& s, std::int64_t& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool(const std::string& s, bool& out) {
    if (s == "1" || s == "true") { out = true; return true; }
    if (s == "0" || s == "false") { out = false; return true; }
    return false;
}

const std::vector<std::string> kPostHeader = {
    "uid", "pid", "timestamp", "latitude", "longitude", "geoaccuracy",
    "category", "subcategory", "concept", "mediatype", "ispublic", "label"};

const std::vector<std::string> kProfileHeader = {
    "uid", "follower", "following", "totalViews", "totalFaves",
    "totalInGroup", "totalTags", "totalGeotagged", "totalImages"};

void check_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                  const std::string& path) {
    if (got != want) {
        std::string expect;
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (i) expect += ',';
            expect += want[i];
        }
        fail(path + ": header mismatch, expected '" + expect + "'");
    }
}

void validate_post(PostRecord& rec, const std::string& where) {
    if (rec.latitude.has_value() != rec.longitude.has_value())
        fail(where + ": latitude and longitude must be present together");
    if (rec.latitude && (*rec.latitude < -90.0 || *rec.latitude > 90.0))
        fail(where + ": latitude out of range [-90,90]");
    if (rec.longitude && (*rec.longitude < -180.0 || *rec.longitude > 180.0))
        fail(where + ": longitude out of range [-180,180]");
    if (rec.label && !std::isfinite(*rec.label)) fail(where + ": label not finite");
}

PostRecord parse_post_fields(const std::vector<std::string>& f, const std::string& where) {
    if (f.size() != kPostHeader.size()) fail(where + ": expected 12 fields, got " +
                                             std::to_string(f.size()));
    PostRecord rec;
    rec.uid = f[0];
    if (rec.uid.empty()) fail(where + ": uid must not be blank");
    if (!parse_u64_strict(f[1], rec.pid)) fail(where + ": bad pid '" + f[1] + "'");
    if (!parse_i64_strict(f[2], rec.timestamp)) fail(where + ": bad timestamp '" + f[2] + "'");

    auto opt_num = [&](const std::string& s, const char* name) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        double v;
        if (!parse_double_strict(s, v)) fail(where + ": bad " + name + " '" + s + "'");
        return v;
    };
    rec.latitude = opt_num(f[3], "latitude");
    rec.longitude = opt_num(f[4], "longitude");
    rec.geoaccuracy = opt_num(f[5], "geoaccuracy");
    if (!f[6].empty()) rec.category = f[6];
    if (!f[7].empty()) rec.subcategory = f[7];
    if (!f[8].empty()) rec.concept_tag = f[8];
    if (!f[9].empty()) rec.mediatype = f[9];
    if (!f[10].empty()) {
        bool b;
        if (!parse_bool(f[10], b)) fail(where + ": bad ispublic '" + f[10] + "'");
        rec.ispublic = b;
    }
    rec.label = opt_num(f[11], "label");
    validate_post(rec, where);
    return rec;
}

PostRecord parse_post_json(const json& j, const std::string& where) {
    PostRecord rec;
    auto get = [&](const char* key) -> const json* {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return nullptr;
        return &*it;
    };
    const json* v = get("uid");
    if (!v || !v->is_string()) fail(where + ": uid missing or not a string");
    rec.uid = v->get<std::string>();
    v = get("pid");
    if (!v || !v->is_number_unsigned()) fail(where + ": pid missing or not unsigned");
    rec.pid = v->get<std::uint64_t>();
    v = get("timestamp");
    if (!v || !v->is_number_integer()) fail(where + ": timestamp missing or not integer");
    rec.timestamp = v->get<std::int64_t>();

    auto opt_num = [&](const char* key) -> std::optional<double> {
        const json* p = get(key);
        if (!p) return std::nullopt;
        if (!p->is_number()) fail(where + ": " + key + " not numeric");
        return p->get<double>();
    };
    auto opt_str = [&](const char* key) -> std::optional<std::string> {
        const json* p = get(key);
        if (!p) return std::nullopt;
        if (!p->is_string()) fail(where + ": " + key + " not a string");
        return p->get<std::string>();
    };
    rec.latitude = opt_num("latitude");
    rec.longitude = opt_num("longitude");
    rec.geoaccuracy = opt_num("geoaccuracy");
    rec.category = opt_str("category");
    rec.subcategory = opt_str("subcategory");
    rec.concept_tag = opt_str("concept");
    rec.mediatype = opt_str("mediatype");
    if (const json* p = get("ispublic")) {
        if (!p->is_boolean()) fail(where + ": ispublic not boolean");
        rec.ispublic = p->get<bool>();
    }
    rec.label = opt_num("label");
    validate_post(rec, where);
    return rec;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back;
        if (parse_double_strict(buf, back) && back == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<PostRecord> load_posts(const std::string& path, PostFormat format) {
    auto in = open_input(path);
    std::vector<PostRecord> posts;
    std::unordered_set<std::uint64_t> seen;
    std::string line;
    std::size_t line_no = 0;

    if (format == PostFormat::Csv) {
        if (!std::getline(in, line)) fail(path + ": empty file, expected header");
        strip_cr(line);
        ++line_no;
        check_header(split_csv_line(line), kPostHeader, path);
    }

    while (std::getline(in, line)) {
        strip_cr(line);
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        PostRecord rec = (format == PostFormat::Csv)
                             ? parse_post_fields(split_csv_line(line), where)
                             : parse_post_json(json::parse(line, nullptr, true), where);
        if (!seen.insert(rec.pid).second)
            fail(where + ": duplicate pid " + std::to_string(rec.pid));
        posts.push_back(std::move(rec));
    }
    return posts;
}

std::vector<PostRecord> load_posts(const std::string& path) {
    const auto ext = fs::path(path).extension().string();
    return load_posts(path, ext == ".jsonl" ? PostFormat::Jsonl : PostFormat::Csv);
}

void save_posts_csv(const std::string& path, const std::vector<PostRecord>& posts) {
    auto out = open_output(path);
    out << "uid,pid,timestamp,latitude,longitude,geoaccuracy,category,subcategory,"
           "concept,mediatype,ispublic,label\n";
    auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : ""; };
    auto str = [](const std::optional<std::string>& v) { return v ? *v : ""; };
    for (const auto& p : posts) {
        out << p.uid << ',' << p.pid << ',' << p.timestamp << ',' << num(p.latitude) << ','
            << num(p.longitude) << ',' << num(p.geoaccuracy) << ',' << str(p.category) << ','
            << str(p.subcategory) << ',' << str(p.concept_tag) << ',' << str(p.mediatype) << ','
            << (p.ispublic ? (*p.ispublic ? "1" : "0") : "") << ',' << num(p.label) << '\n';
    }
    if (!out) fail("write failed: " + path);
}

std::unordered_map<std::string, UserProfile> load_profiles(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file, expected header");
    strip_cr(line);
    check_header(split_csv_line(line), kProfileHeader, path);

    std::unordered_map<std::string, UserProfile> profiles;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        strip_cr(line);
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto f = split_csv_line(line);
        if (f.size() != kProfileHeader.size())
            fail(where + ": expected 9 fields, got " + std::to_string(f.size()));
        UserProfile prof;
        prof.uid = f[0];
        if (prof.uid.empty()) fail(where + ": uid must not be blank");
        for (std::size_t c = 0; c < kProfileCounterCount; ++c) {
            const std::string& cell = f[c + 1];
            if (cell.empty()) continue;
            double v;
            if (!parse_double_strict(cell, v))
                fail(where + ": bad " + kProfileCounterNames[c] + " '" + cell + "'");
            if (v < 0.0)
                fail(where + ": negative " + kProfileCounterNames[c] + " (" + cell + ")");
            prof.counter(c) = v;
        }
        if (!profiles.emplace(prof.uid, std::move(prof)).second)
            fail(where + ": duplicate uid '" + f[0] + "'");
    }
    return profiles;
}

void save_profiles_csv(const std::string& path,
                       const std::unordered_map<std::string, UserProfile>& profiles) {
    auto out = open_output(path);
    out << "uid,follower,following,totalViews,totalFaves,totalInGroup,totalTags,"
           "totalGeotagged,totalImages\n";
    std::vector<const UserProfile*> ordered;
    ordered.reserve(profiles.size());
    for (const auto& [uid, prof] : profiles) ordered.push_back(&prof);
    std::sort(ordered.begin(), ordered.end(),
              [](const UserProfile* a, const UserProfile* b) { return a->uid < b->uid; });
    for (const UserProfile* prof : ordered) {
        out << prof->uid;
        for (std::size_t c = 0; c < kProfileCounterCount; ++c) {
            out << ',';
            if (prof->counter(c)) out << format_double(*prof->counter(c));
        }
        out << '\n';
    }
    if (!out) fail("write failed: " + path);
}

namespace {

template <typename T>
void write_le(std::ofstream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& path, const char* what) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        fail(path + ": truncated file while reading " + what);
    return v;
}

EmbeddingBlock load_embedding_block_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file, expected header");
    strip_cr(line);
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "pid")
        fail(path + ": embedding CSV header must be pid,v0,...");
    for (std::size_t i = 1; i < header.size(); ++i)
        if (header[i] != "v" + std::to_string(i - 1))
            fail(path + ": embedding CSV header must be pid,v0,...,v" +
                 std::to_string(header.size() - 2));

    EmbeddingBlock block;
    block.name = fs::path(path).stem().string();
    block.dim = header.size() - 1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        strip_cr(line);
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto f = split_csv_line(line);
        if (f.size() != block.dim + 1)
            fail(where + ": expected " + std::to_string(block.dim + 1) + " fields");
        std::uint64_t pid;
        if (!parse_u64_strict(f[0], pid)) fail(where + ": bad pid '" + f[0] + "'");
        std::vector<float> vec(block.dim);
        for (std::size_t j = 0; j < block.dim; ++j) {
            double v;
            if (!parse_double_strict(f[j + 1], v)) fail(where + ": bad component '" + f[j + 1] + "'");
            vec[j] = static_cast<float>(v);
        }
        if (!block.rows.emplace(pid, std::move(vec)).second)
            fail(where + ": duplicate pid " + std::to_string(pid));
    }
    return block;
}

}  // namespace

EmbeddingBlock load_embedding_block(const std::string& path) {
    if (fs::path(path).extension() == ".csv") return load_embedding_block_csv(path);

    auto in = open_input(path, /*binary=*/true);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "FEMB", 4) != 0)
        fail(path + ": bad magic, not a FEMB file");
    const auto version = read_le<std::uint32_t>(in, path, "version");
    if (version != 1) fail(path + ": unsupported FEMB version " + std::to_string(version));
    const auto name_len = read_le<std::uint8_t>(in, path, "name length");

    EmbeddingBlock block;
    block.name.resize(name_len);
    if (name_len > 0 && !in.read(block.name.data(), name_len))
        fail(path + ": truncated file while reading name");
    const auto dim = read_le<std::uint32_t>(in, path, "dim");
    if (dim == 0) fail(path + ": dim must be positive");
    block.dim = dim;
    const auto count = read_le<std::uint64_t>(in, path, "count");

    block.rows.reserve(count);
    std::vector<float> vec(block.dim);
    for (std::uint64_t r = 0; r < count; ++r) {
        const auto pid = read_le<std::uint64_t>(in, path, "record pid");
        if (!in.read(reinterpret_cast<char*>(vec.data()),
                     static_cast<std::streamsize>(block.dim * sizeof(float))))
            fail(path + ": truncated file, row " + std::to_string(r) + " of " +
                 std::to_string(count) + " incomplete");
        for (float v : vec)
            if (!std::isfinite(v))
                fail(path + ": non-finite component in pid " + std::to_string(pid));
        if (!block.rows.emplace(pid, vec).second)
            fail(path + ": duplicate pid " + std::to_string(pid));
    }
    char extra;
    if (in.read(&extra, 1)) fail(path + ": trailing bytes after the last record");
    return block;
}

void save_embedding_block_femb(const std::string& path, const EmbeddingBlock& block) {
    if (block.name.size() > 255) fail("block name too long for FEMB: " + block.name);
    if (block.dim == 0) fail("FEMB dim must be positive");
    auto out = open_output(path, /*binary=*/true);
    out.write("FEMB", 4);
    write_le<std::uint32_t>(out, 1);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(block.name.size()));
    out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(block.dim));
    write_le<std::uint64_t>(out, block.rows.size());

    // sorted by pid so identical blocks serialize to identical bytes
    std::vector<std::uint64_t> pids;
    pids.reserve(block.rows.size());
    for (const auto& [pid, vec] : block.rows) pids.push_back(pid);
    std::sort(pids.begin(), pids.end());
    for (std::uint64_t pid : pids) {
        const auto& vec = block.rows.at(pid);
        if (vec.size() != block.dim) fail("block row length mismatch for pid " + std::to_string(pid));
        write_le<std::uint64_t>(out, pid);
        out.write(reinterpret_cast<const char*>(vec.data()),
                  static_cast<std::streamsize>(block.dim * sizeof(float)));
    }
    if (!out) fail("write failed: " + path);
}

void save_embedding_block_csv(const std::string& path, const EmbeddingBlock& block) {
    auto out = open_output(path);
    out << "pid";
    for (std::size_t j = 0; j < block.dim; ++j) out << ",v" << j;
    out << '\n';
    std::vector<std::uint64_t> pids;
    pids.reserve(block.rows.size());
    for (const auto& [pid, vec] : block.rows) pids.push_back(pid);
    std::sort(pids.begin(), pids.end());
    for (std::uint64_t pid : pids) {
        out << pid;
        for (float v : block.rows.at(pid)) out << ',' << format_double(static_cast<double>(v));
        out << '\n';
    }
    if (!out) fail("write failed: " + path);
}

Dataset load_dataset_dir(const std::string& dir) {
    const fs::path base(dir);
    if (!fs::is_directory(base)) fail("not a dataset directory: " + dir);

    fs::path posts_path;
    if (fs::exists(base / "posts.csv")) posts_path = base / "posts.csv";
    else if (fs::exists(base / "posts.jsonl")) posts_path = base / "posts.jsonl";
    else fail(dir + ": no posts.csv or posts.jsonl");

    auto posts = load_posts(posts_path.string());

    std::unordered_map<std::string, UserProfile> profiles;
    if (fs::exists(base / "profiles.csv")) profiles = load_profiles((base / "profiles.csv").string());

    std::set<std::string> block_files;  // sorted for a deterministic block order
    for (const auto& entry : fs::directory_iterator(base))
        if (entry.is_regular_file() && entry.path().extension() == ".femb")
            block_files.insert(entry.path().string());

    std::vector<EmbeddingBlock> blocks;
    for (const auto& f : block_files) blocks.push_back(load_embedding_block(f));

    return join_dataset(std::move(posts), std::move(profiles), std::move(blocks));
}

PidValueFile load_pid_values(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file, expected header");
    strip_cr(line);
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "pid")
        fail(path + ": expected header pid,<value>");

    PidValueFile out;
    std::unordered_set<std::uint64_t> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        strip_cr(line);
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto f = split_csv_line(line);
        if (f.size() != 2) fail(where + ": expected 2 fields");
        std::uint64_t pid;
        double v;
        if (!parse_u64_strict(f[0], pid)) fail(where + ": bad pid '" + f[0] + "'");
        if (!parse_double_strict(f[1], v)) fail(where + ": bad value '" + f[1] + "'");
        if (!seen.insert(pid).second) fail(where + ": duplicate pid " + std::to_string(pid));
        out.pids.push_back(pid);
        out.values.push_back(v);
    }
    return out;
}

void save_pid_values(const std::string& path, const std::string& value_name,
                     const std::vector<std::uint64_t>& pids, const std::vector<double>& values) {
    if (pids.size() != values.size()) fail("save_pid_values: length mismatch");
    auto out = open_output(path);
    out << "pid," << value_name << '\n';
    for (std::size_t i = 0; i < pids.size(); ++i)
        out << pids[i] << ',' << format_double(values[i]) << '\n';
    if (!out) fail("write failed: " + path);
}

std::string file_digest(const std::string& path) {
    auto in = open_input(path, /*binary=*/true);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (in.eof()) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace smp::io
