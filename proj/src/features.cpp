#include "smp/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "smp/io.hpp"

using nlohmann::json;

namespace smp::feat {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// blocks whose columns feed the neural input adapter standardized; one-hot
// blocks (geo, cat) stay 0/1
bool is_standardized_tag(const std::string& tag) { return tag != "geo" && tag != "cat"; }

const std::vector<std::string> kCatFields = {"category", "subcategory", "concept",
                                             "mediatype", "ispublic"};

}  // namespace

bool is_embedding_tag(const std::string& tag) {
    return std::find(kEmbeddingTags.begin(), kEmbeddingTags.end(), tag) != kEmbeddingTags.end();
}

TimeParts decompose_timestamp(std::int64_t ts) {
    std::int64_t days = ts / 86400;
    std::int64_t sod = ts % 86400;
    if (sod < 0) {
        days -= 1;
        sod += 86400;
    }

    // civil-from-days, proleptic Gregorian
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;                                      // [0, 146096]
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365; // [0, 399]
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);               // [0, 365]
    const std::int64_t mp = (5 * doy + 2) / 153;                                    // [0, 11]
    const int day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    const int month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    std::int64_t year = yoe + era * 400 + (month <= 2 ? 1 : 0);

    TimeParts parts;
    parts.year = year;
    parts.month = month;
    parts.day = day;
    parts.weekday = static_cast<int>(((days + 3) % 7 + 7) % 7);  // 1970-01-01 is a Thursday
    parts.hour = static_cast<int>(sod / 3600);
    return parts;
}

std::string bucket_geo(double lat, double lon, double resolution_deg) {
    if (!(resolution_deg > 0.0)) fail("bucket_geo: resolution must be positive");
    if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0)
        fail("bucket_geo: latitude out of range [-90,90]");
    if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0)
        fail("bucket_geo: longitude out of range [-180,180]");

    const auto cell = [resolution_deg](double v, double span) {
        auto idx = static_cast<std::int64_t>(std::floor(v / resolution_deg));
        const auto last = static_cast<std::int64_t>(std::ceil(span / resolution_deg)) - 1;
        return std::min(idx, last);
    };
    return "g" + std::to_string(cell(lat + 90.0, 180.0)) + "_" +
           std::to_string(cell(lon + 180.0, 360.0));
}

std::size_t OneHotMap::index_of(const std::string& value) const {
    const auto it = std::lower_bound(categories.begin(), categories.end(), value);
    if (it != categories.end() && *it == value)
        return static_cast<std::size_t>(it - categories.begin()) + 1;
    return 0;  // unknown slot
}

OneHotMap fit_one_hot(const std::vector<std::string>& column) {
    OneHotMap map;
    map.categories.assign(column.begin(), column.end());
    std::sort(map.categories.begin(), map.categories.end());
    map.categories.erase(std::unique(map.categories.begin(), map.categories.end()),
                         map.categories.end());
    // the literal "unknown" always lives in slot 0
    map.categories.erase(std::remove(map.categories.begin(), map.categories.end(), "unknown"),
                         map.categories.end());
    return map;
}

std::vector<double> apply_one_hot(const OneHotMap& map, const std::string& value) {
    std::vector<double> v(map.width(), 0.0);
    v[map.index_of(value)] = 1.0;
    return v;
}

std::pair<double, double> fit_standardize(const std::vector<double>& column) {
    if (column.empty()) fail("fit_standardize: empty column");
    const double n = static_cast<double>(column.size());
    double mean = 0.0;
    for (double x : column) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : column) ss += (x - mean) * (x - mean);
    double std_ = column.size() >= 2 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    if (std_ < 1e-12) std_ = 1.0;
    return {mean, std_};
}

double apply_standardize(double mean, double std_, double x) { return (x - mean) / std_; }

std::size_t BlockSchema::total_width() const {
    std::size_t w = 0;
    for (const auto& b : blocks) w += b.width;
    return w;
}

const BlockSpan* BlockSchema::find(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return &b;
    return nullptr;
}

void BlockSchema::check() const {
    std::size_t expect = 0;
    std::set<std::string> names;
    for (const auto& b : blocks) {
        if (b.start != expect) fail("BlockSchema: blocks not contiguous at '" + b.name + "'");
        if (b.width == 0) fail("BlockSchema: zero-width block '" + b.name + "'");
        if (!names.insert(b.name).second) fail("BlockSchema: duplicate block '" + b.name + "'");
        expect = b.start + b.width;
    }
}

std::pair<double, std::size_t> TransformOptions::pca_params(const std::string& tag) const {
    const auto it = pca_per_block.find(tag);
    if (it != pca_per_block.end()) return it->second;
    return {pca_target_variance, pca_max_dims};
}

TransformState::EmbeddingState fit_embedding_reduction(const linalg::Mat& train_rows,
                                                       double target_variance,
                                                       std::size_t max_dims) {
    if (train_rows.rows < 2) fail("embedding reduction: need at least 2 training rows");

    linalg::PCAModel full = linalg::fit_pca(train_rows);
    const std::size_t d = full.input_dim();

    double total = 0.0;
    for (double ev : full.eigenvalues) total += ev;

    std::size_t width = d;
    if (total <= 0.0) {
        width = 1;  // zero variance: one all-zero output column
    } else {
        double cum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            cum += full.explained_ratio[i];
            if (cum >= target_variance - 1e-12) {
                width = i + 1;
                break;
            }
        }
    }
    width = std::max<std::size_t>(1, std::min(width, max_dims));

    TransformState::EmbeddingState st;
    st.source_dim = d;
    st.width = width;
    st.pca = linalg::truncate_pca(full, width);
    return st;
}

namespace {

std::string ispublic_as_category(const std::optional<bool>& v) {
    if (!v) return "unknown";
    return *v ? "1" : "0";
}

std::string cat_field_value(const PostRecord& p, const std::string& field) {
    if (field == "category") return p.category.value_or("unknown");
    if (field == "subcategory") return p.subcategory.value_or("unknown");
    if (field == "concept") return p.concept_tag.value_or("unknown");
    if (field == "mediatype") return p.mediatype.value_or("unknown");
    if (field == "ispublic") return ispublic_as_category(p.ispublic);
    fail("unknown categorical field: " + field);
}

std::string geo_cell_or_unknown(const PostRecord& p, double res) {
    if (!p.latitude || !p.longitude) return "unknown";
    return bucket_geo(*p.latitude, *p.longitude, res);
}

linalg::Mat embedding_rows(const Dataset& ds, const EmbeddingBlock& block) {
    linalg::Mat X(ds.posts.size(), block.dim);
    for (std::size_t i = 0; i < ds.posts.size(); ++i) {
        const auto it = block.rows.find(ds.posts[i].pid);
        if (it == block.rows.end())
            fail("internal: embedding row missing after imputation for pid " +
                 std::to_string(ds.posts[i].pid));
        for (std::size_t j = 0; j < block.dim; ++j) X(i, j) = static_cast<double>(it->second[j]);
    }
    return X;
}

struct ColumnSink {
    FeatureMatrix m;
    std::vector<std::vector<double>> pending_cols;
    std::vector<std::string> pending_names;

    void add_column(std::string name, std::vector<double> col) {
        pending_names.push_back(std::move(name));
        pending_cols.push_back(std::move(col));
    }

    void finish_block(const std::string& tag) {
        if (pending_cols.empty()) fail("block '" + tag + "' produced no columns");
        const std::size_t start = m.schema.total_width();
        m.schema.blocks.push_back({tag, start, pending_cols.size()});
        for (auto& n : pending_names) m.col_names.push_back(std::move(n));
        for (auto& c : pending_cols) {
            if (c.size() != m.rows) fail("block '" + tag + "' column length mismatch");
        }
        // columns are gathered per block, then written row-major at the end
        finished_cols.insert(finished_cols.end(), std::make_move_iterator(pending_cols.begin()),
                             std::make_move_iterator(pending_cols.end()));
        pending_cols.clear();
        pending_names.clear();
    }

    std::vector<std::vector<double>> finished_cols;

    FeatureMatrix take() {
        m.cols = finished_cols.size();
        m.values.assign(m.rows * m.cols, 0.0);
        for (std::size_t j = 0; j < m.cols; ++j)
            for (std::size_t i = 0; i < m.rows; ++i) m.values[i * m.cols + j] = finished_cols[j][i];
        m.schema.check();
        return std::move(m);
    }
};

// Shared assembly path. In fit mode the state's vocabularies / PCA / impute
// stats are fitted from `ds` first; in apply mode they are used as-is.
FeatureMatrix build_matrix(const Dataset& raw, TransformState& state, bool fit) {
    if (!raw.joined()) fail("assemble: dataset must come from join_dataset");

    for (const auto& tag : state.enabled) {
        if (std::find(kBlockOrder.begin(), kBlockOrder.end(), tag) == kBlockOrder.end())
            fail("assemble: unknown block tag '" + tag + "'");
        if (is_embedding_tag(tag) && raw.block_index(tag) == static_cast<std::size_t>(-1))
            fail("assemble: enabled block '" + tag + "' has no embedding data in the dataset");
    }

    Dataset ds;
    if (fit) {
        auto [imputed, stats] = impute_missing(raw);
        ds = std::move(imputed);
        state.impute = std::move(stats);
    } else {
        ds = impute_missing(raw, state.impute).first;
    }
    const std::size_t n = ds.posts.size();

    ColumnSink sink;
    sink.m.rows = n;
    sink.m.pids.reserve(n);
    for (const auto& p : ds.posts) sink.m.pids.push_back(p.pid);

    auto enabled = [&](const std::string& tag) {
        return std::find(state.enabled.begin(), state.enabled.end(), tag) != state.enabled.end();
    };

    for (const auto& tag : kBlockOrder) {
        if (!enabled(tag)) continue;

        if (is_embedding_tag(tag)) {
            const std::size_t bi = ds.block_index(tag);
            linalg::Mat X = embedding_rows(ds, ds.blocks[bi]);
            if (fit) {
                const auto [target, max_dims] = state.options.pca_params(tag);
                state.embeddings[tag] = fit_embedding_reduction(X, target, max_dims);
            }
            const auto it = state.embeddings.find(tag);
            if (it == state.embeddings.end())
                fail("assemble: state has no fitted reduction for block '" + tag + "'");
            const auto& est = it->second;
            if (est.source_dim != ds.blocks[bi].dim)
                fail("assemble: block '" + tag + "' dim " + std::to_string(ds.blocks[bi].dim) +
                     " does not match fitted dim " + std::to_string(est.source_dim));
            linalg::Mat proj = linalg::transform_pca(est.pca, X, est.width);
            for (std::size_t j = 0; j < est.width; ++j) {
                std::vector<double> col(n);
                for (std::size_t i = 0; i < n; ++i) col[i] = proj(i, j);
                sink.add_column(tag + ".pc" + std::to_string(j), std::move(col));
            }
            std::vector<double> ind(n);
            for (std::size_t i = 0; i < n; ++i) ind[i] = ds.embedding_missing[bi][i] ? 1.0 : 0.0;
            sink.add_column(tag + ".missing", std::move(ind));
            sink.finish_block(tag);
        } else if (tag == "time") {
            std::vector<double> year(n), month(n), day(n), weekday(n), hour(n);
            for (std::size_t i = 0; i < n; ++i) {
                const TimeParts t = decompose_timestamp(ds.posts[i].timestamp);
                year[i] = static_cast<double>(t.year);
                month[i] = t.month;
                day[i] = t.day;
                weekday[i] = t.weekday;
                hour[i] = t.hour;
            }
            sink.add_column("time.year", std::move(year));
            sink.add_column("time.month", std::move(month));
            sink.add_column("time.day", std::move(day));
            sink.add_column("time.weekday", std::move(weekday));
            sink.add_column("time.hour", std::move(hour));
            sink.finish_block(tag);
        } else if (tag == "geo") {
            std::vector<std::string> coarse(n), fine(n);
            for (std::size_t i = 0; i < n; ++i) {
                coarse[i] = geo_cell_or_unknown(ds.posts[i], state.options.geo_res_coarse);
                fine[i] = geo_cell_or_unknown(ds.posts[i], state.options.geo_res_fine);
            }
            if (fit) {
                state.geo_coarse = fit_one_hot(coarse);
                state.geo_fine = fit_one_hot(fine);
            }
            auto emit = [&](const char* level, const OneHotMap& map,
                            const std::vector<std::string>& cells) {
                std::vector<std::vector<double>> cols(map.width(), std::vector<double>(n, 0.0));
                for (std::size_t i = 0; i < n; ++i) cols[map.index_of(cells[i])][i] = 1.0;
                sink.add_column(std::string("geo.") + level + ".unknown", std::move(cols[0]));
                for (std::size_t c = 0; c < map.categories.size(); ++c)
                    sink.add_column(std::string("geo.") + level + "." + map.categories[c],
                                    std::move(cols[c + 1]));
            };
            emit("coarse", state.geo_coarse, coarse);
            emit("fine", state.geo_fine, fine);
            sink.finish_block(tag);
        } else if (tag == "n") {
            std::vector<double> acc(n);
            for (std::size_t i = 0; i < n; ++i) acc[i] = ds.posts[i].geoaccuracy.value_or(0.0);
            sink.add_column("n.geoaccuracy", std::move(acc));
            sink.finish_block(tag);
        } else if (tag == "eu") {
            for (std::size_t c = 0; c < kProfileCounterCount; ++c) {
                std::vector<double> col(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& prof = ds.profiles.at(ds.posts[i].uid);
                    col[i] = prof.counter(c).value_or(0.0);
                }
                sink.add_column(std::string("eu.") + kProfileCounterNames[c], std::move(col));
            }
            std::vector<double> ind(n);
            for (std::size_t i = 0; i < n; ++i) ind[i] = ds.profile_missing[i] ? 1.0 : 0.0;
            sink.add_column("eu.profile_missing", std::move(ind));
            sink.finish_block(tag);
        } else if (tag == "cat") {
            for (const auto& field : kCatFields) {
                std::vector<std::string> values(n);
                for (std::size_t i = 0; i < n; ++i) values[i] = cat_field_value(ds.posts[i], field);
                if (fit) state.categorical[field] = fit_one_hot(values);
                const auto it = state.categorical.find(field);
                if (it == state.categorical.end())
                    fail("assemble: state has no vocabulary for field '" + field + "'");
                const OneHotMap& map = it->second;
                std::vector<std::vector<double>> cols(map.width(), std::vector<double>(n, 0.0));
                for (std::size_t i = 0; i < n; ++i) cols[map.index_of(values[i])][i] = 1.0;
                sink.add_column("cat." + field + ".unknown", std::move(cols[0]));
                for (std::size_t c = 0; c < map.categories.size(); ++c)
                    sink.add_column("cat." + field + "." + map.categories[c],
                                    std::move(cols[c + 1]));
            }
            sink.finish_block(tag);
        }
    }

    FeatureMatrix matrix = sink.take();

    if (fit) {
        state.standardize.clear();
        for (const auto& span : matrix.schema.blocks) {
            if (!is_standardized_tag(span.name)) continue;
            // counters span orders of magnitude; the neural path sees them
            // on a log scale
            const bool use_log1p = span.name == "eu";
            for (std::size_t j = span.start; j < span.start + span.width; ++j) {
                const std::string& name = matrix.col_names[j];
                TransformState::ColumnScaler scaler;
                scaler.log1p = use_log1p && name != "eu.profile_missing";
                std::vector<double> col(matrix.rows);
                for (std::size_t i = 0; i < matrix.rows; ++i) {
                    const double v = matrix.at(i, j);
                    col[i] = scaler.log1p ? std::log1p(v) : v;
                }
                const auto [mean, std_] = fit_standardize(col);
                scaler.mean = mean;
                scaler.std = std_;
                state.standardize[name] = scaler;
            }
        }
    }
    return matrix;
}

std::vector<std::string> canonical_subset(const std::set<std::string>& tags) {
    std::vector<std::string> out;
    for (const auto& tag : kBlockOrder)
        if (tags.count(tag)) out.push_back(tag);
    for (const auto& tag : tags)
        if (std::find(kBlockOrder.begin(), kBlockOrder.end(), tag) == kBlockOrder.end())
            fail("unknown block tag '" + tag + "'");
    return out;
}

}  // namespace

std::pair<FeatureMatrix, TransformState> fit_transform(const Dataset& dataset,
                                                       const std::set<std::string>& enabled_blocks,
                                                       const TransformOptions& options) {
    TransformState state;
    state.options = options;
    state.enabled = canonical_subset(enabled_blocks);
    FeatureMatrix m = build_matrix(dataset, state, /*fit=*/true);
    return {std::move(m), std::move(state)};
}

FeatureMatrix apply_transform(const Dataset& dataset, const TransformState& state) {
    TransformState scratch = state;  // build_matrix takes a mutable ref; apply never changes it
    FeatureMatrix m = build_matrix(dataset, scratch, /*fit=*/false);
    return m;
}

FeatureMatrix select_blocks(const FeatureMatrix& matrix, const std::set<std::string>& keep) {
    for (const auto& name : keep)
        if (!matrix.schema.find(name)) fail("select_blocks: unknown block tag '" + name + "'");

    FeatureMatrix out;
    out.rows = matrix.rows;
    out.pids = matrix.pids;

    std::vector<std::size_t> cols;
    for (const auto& span : matrix.schema.blocks) {
        if (!keep.count(span.name)) continue;
        out.schema.blocks.push_back({span.name, cols.size(), span.width});
        for (std::size_t j = span.start; j < span.start + span.width; ++j) {
            cols.push_back(j);
            out.col_names.push_back(matrix.col_names[j]);
        }
    }
    out.cols = cols.size();
    out.values.resize(out.rows * out.cols);
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out.values[i * out.cols + j] = matrix.at(i, cols[j]);
    return out;
}

double TransformState::ColumnScaler::apply(double x) const {
    return apply_standardize(mean, std, log1p ? std::log1p(x) : x);
}

FeatureMatrix standardize_matrix(const FeatureMatrix& matrix, const TransformState& state) {
    FeatureMatrix out = matrix;
    for (std::size_t j = 0; j < out.cols; ++j) {
        const auto it = state.standardize.find(out.col_names[j]);
        if (it == state.standardize.end()) continue;
        for (std::size_t i = 0; i < out.rows; ++i) out.at(i, j) = it->second.apply(out.at(i, j));
    }
    return out;
}

void export_matrix_csv(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open file for writing: " + path);
    out << "pid";
    for (const auto& name : matrix.col_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < matrix.rows; ++i) {
        out << matrix.pids[i];
        for (std::size_t j = 0; j < matrix.cols; ++j) out << ',' << io::format_double(matrix.at(i, j));
        out << '\n';
    }
    if (!out) fail("write failed: " + path);
}

// ---------------------------------------------------------------------------
// serialization

namespace {

json onehot_to_json(const OneHotMap& m) { return json(m.categories); }

OneHotMap onehot_from_json(const json& j) {
    OneHotMap m;
    m.categories = j.get<std::vector<std::string>>();
    return m;
}

json pca_to_json(const linalg::PCAModel& m) {
    json j;
    j["mean"] = m.mean;
    j["eigenvalues"] = m.eigenvalues;
    j["explained_ratio"] = m.explained_ratio;
    j["rows"] = m.components.rows;
    j["cols"] = m.components.cols;
    j["components"] = m.components.a;  // row-major
    return j;
}

linalg::PCAModel pca_from_json(const json& j) {
    linalg::PCAModel m;
    m.mean = j.at("mean").get<std::vector<double>>();
    m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    m.explained_ratio = j.at("explained_ratio").get<std::vector<double>>();
    m.components.rows = j.at("rows").get<std::size_t>();
    m.components.cols = j.at("cols").get<std::size_t>();
    m.components.a = j.at("components").get<std::vector<double>>();
    if (m.components.a.size() != m.components.rows * m.components.cols)
        fail("transform state: PCA component size mismatch");
    return m;
}

}  // namespace

std::string TransformState::to_json_string() const {
    json j;
    j["version"] = version;
    j["enabled"] = enabled;
    j["options"] = {{"geo_res_coarse", options.geo_res_coarse},
                    {"geo_res_fine", options.geo_res_fine},
                    {"pca_target_variance", options.pca_target_variance},
                    {"pca_max_dims", options.pca_max_dims}};
    json per_block = json::object();
    for (const auto& [tag, tv] : options.pca_per_block)
        per_block[tag] = {{"target_variance", tv.first}, {"max_dims", tv.second}};
    j["options"]["pca_per_block"] = per_block;

    j["impute"] = {{"fitted", impute.fitted}, {"medians", impute.medians}};
    j["geo_coarse"] = onehot_to_json(geo_coarse);
    j["geo_fine"] = onehot_to_json(geo_fine);

    json cats = json::object();
    for (const auto& [field, map] : categorical) cats[field] = onehot_to_json(map);
    j["categorical"] = cats;

    json embs = json::object();
    for (const auto& [tag, est] : embeddings)
        embs[tag] = {{"source_dim", est.source_dim}, {"width", est.width}, {"pca", pca_to_json(est.pca)}};
    j["embeddings"] = embs;

    json stdz = json::object();
    for (const auto& [name, sc] : standardize)
        stdz[name] = {{"log1p", sc.log1p}, {"mean", sc.mean}, {"std", sc.std}};
    j["standardize"] = stdz;

    return j.dump(2) + "\n";
}

TransformState TransformState::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    TransformState s;
    s.version = j.at("version").get<int>();
    if (s.version != 1) fail("transform state: unsupported version " + std::to_string(s.version));
    s.enabled = j.at("enabled").get<std::vector<std::string>>();
    const json& opts = j.at("options");
    s.options.geo_res_coarse = opts.at("geo_res_coarse").get<double>();
    s.options.geo_res_fine = opts.at("geo_res_fine").get<double>();
    s.options.pca_target_variance = opts.at("pca_target_variance").get<double>();
    s.options.pca_max_dims = opts.at("pca_max_dims").get<std::size_t>();
    for (const auto& [tag, tv] : opts.at("pca_per_block").items())
        s.options.pca_per_block[tag] = {tv.at("target_variance").get<double>(),
                                        tv.at("max_dims").get<std::size_t>()};
    s.impute.fitted = j.at("impute").at("fitted").get<bool>();
    s.impute.medians = j.at("impute").at("medians").get<std::map<std::string, double>>();
    s.geo_coarse = onehot_from_json(j.at("geo_coarse"));
    s.geo_fine = onehot_from_json(j.at("geo_fine"));
    for (const auto& [field, cats] : j.at("categorical").items())
        s.categorical[field] = onehot_from_json(cats);
    for (const auto& [tag, est] : j.at("embeddings").items()) {
        EmbeddingState e;
        e.source_dim = est.at("source_dim").get<std::size_t>();
        e.width = est.at("width").get<std::size_t>();
        e.pca = pca_from_json(est.at("pca"));
        s.embeddings[tag] = std::move(e);
    }
    for (const auto& [name, sc] : j.at("standardize").items()) {
        TransformState::ColumnScaler scaler;
        scaler.log1p = sc.at("log1p").get<bool>();
        scaler.mean = sc.at("mean").get<double>();
        scaler.std = sc.at("std").get<double>();
        s.standardize[name] = scaler;
    }
    return s;
}

void TransformState::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("cannot open file for writing: " + path);
    out << to_json_string();
    if (!out) fail("write failed: " + path);
}

TransformState TransformState::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

}  // namespace smp::feat
