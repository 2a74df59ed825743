#include "smp/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace smp::gbdt {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

void GbdtConfig::validate() const {
    if (num_trees < 0) fail("gbdt config: num_trees must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        fail("gbdt config: learning_rate must be in (0,1]");
    if (max_leaves < 2) fail("gbdt config: max_leaves must be >= 2");
    if (min_samples_leaf < 1) fail("gbdt config: min_samples_leaf must be >= 1");
    if (max_bins < 2 || max_bins > 255) fail("gbdt config: max_bins must be in [2,255]");
    if (l2_reg < 0.0) fail("gbdt config: l2_reg must be >= 0");
}

std::string loss_name(GbdtConfig::Loss loss) {
    return loss == GbdtConfig::Loss::Squared ? "squared" : "absolute";
}

GbdtConfig::Loss loss_from_name(const std::string& name) {
    if (name == "squared") return GbdtConfig::Loss::Squared;
    if (name == "absolute") return GbdtConfig::Loss::Absolute;
    fail("unknown gbdt loss '" + name + "'");
}

std::vector<double> quantile_bins(const std::vector<double>& column, int max_bins) {
    if (column.empty()) fail("quantile_bins: empty column");

    std::vector<double> sorted(column);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> edges;
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
        // exact binning: one bin per value
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
            edges.push_back(0.5 * (distinct[i] + distinct[i + 1]));
        return edges;
    }

    for (int i = 1; i < max_bins; ++i) {
        const std::size_t cut =
            static_cast<std::size_t>(static_cast<std::uint64_t>(i) * n / max_bins);
        if (cut == 0 || cut >= n) continue;
        const double edge = 0.5 * (sorted[cut - 1] + sorted[cut]);
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    return edges;
}

std::size_t bin_index(const std::vector<double>& edges, double x) {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), x) -
                                    edges.begin());
}

double Tree::predict_row(const double* x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& nd = nodes[node];
        node = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return nodes[node].value;
}

int Tree::leaf_count() const {
    int c = 0;
    for (const auto& nd : nodes)
        if (nd.feature < 0) ++c;
    return c;
}

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    int bin = -1;  // split sends "bin <= this" left
    double left_g = 0.0, left_h = 0.0;
    std::uint32_t left_count = 0;

    bool valid() const { return feature >= 0 && gain > 0.0; }
};

// per-leaf histograms over all features, flattened
struct Histogram {
    std::vector<double> sum_g;
    std::vector<double> sum_h;
    std::vector<std::uint32_t> count;

    void resize(std::size_t total_bins) {
        sum_g.assign(total_bins, 0.0);
        sum_h.assign(total_bins, 0.0);
        count.assign(total_bins, 0);
    }

    void subtract_from(const Histogram& parent) {
        for (std::size_t i = 0; i < sum_g.size(); ++i) {
            sum_g[i] = parent.sum_g[i] - sum_g[i];
            sum_h[i] = parent.sum_h[i] - sum_h[i];
            count[i] = parent.count[i] - count[i];
        }
    }
};

struct LeafState {
    int node = -1;
    std::uint32_t lo = 0, hi = 0;  // range in the row index array
    double sum_g = 0.0, sum_h = 0.0;
    Histogram hist;
    SplitCandidate best;
};

double leaf_objective(double g, double h, double lambda) { return g * g / (h + lambda); }

class TreeGrower {
public:
    TreeGrower(const std::vector<std::uint8_t>& bins, std::size_t rows, std::size_t cols,
               const std::vector<std::size_t>& bin_offset, const std::vector<std::size_t>& bin_count,
               const std::vector<std::vector<double>>& edges, const GbdtConfig& cfg)
        : bins_(bins),
          rows_(rows),
          cols_(cols),
          bin_offset_(bin_offset),
          bin_count_(bin_count),
          edges_(edges),
          cfg_(cfg) {}

    // Returns the tree; leaf_of_row receives the leaf value applied to each row.
    Tree grow(const std::vector<double>& g, const std::vector<double>& h,
              std::vector<double>& row_values) {
        Tree tree;
        tree.nodes.emplace_back();  // root placeholder (leaf for now)

        std::vector<std::uint32_t> row_idx(rows_);
        std::iota(row_idx.begin(), row_idx.end(), 0u);

        std::vector<LeafState> leaves;
        LeafState root;
        root.node = 0;
        root.lo = 0;
        root.hi = static_cast<std::uint32_t>(rows_);
        root.sum_g = std::accumulate(g.begin(), g.end(), 0.0);
        root.sum_h = std::accumulate(h.begin(), h.end(), 0.0);
        build_histogram(root, row_idx, g, h);
        find_best_split(root);
        leaves.push_back(std::move(root));

        int leaf_count = 1;
        while (leaf_count < cfg_.max_leaves) {
            // split the leaf with the largest positive gain; ties take the
            // earliest leaf so growth is deterministic
            int pick = -1;
            for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
                if (!leaves[i].best.valid()) continue;
                if (pick < 0 || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
            }
            if (pick < 0) break;

            LeafState parent = std::move(leaves[pick]);
            leaves.erase(leaves.begin() + pick);

            const SplitCandidate& sp = parent.best;
            const int feature = sp.feature;
            const std::uint8_t split_bin = static_cast<std::uint8_t>(sp.bin);

            const auto mid_it = std::stable_partition(
                row_idx.begin() + parent.lo, row_idx.begin() + parent.hi,
                [&](std::uint32_t r) { return bins_[r * cols_ + feature] <= split_bin; });
            const auto mid = static_cast<std::uint32_t>(mid_it - row_idx.begin());

            LeafState left, right;
            left.lo = parent.lo;
            left.hi = mid;
            right.lo = mid;
            right.hi = parent.hi;
            left.sum_g = sp.left_g;
            left.sum_h = sp.left_h;
            right.sum_g = parent.sum_g - sp.left_g;
            right.sum_h = parent.sum_h - sp.left_h;

            // smaller child scans its rows, the sibling comes from subtraction
            if (left.hi - left.lo <= right.hi - right.lo) {
                build_histogram(left, row_idx, g, h);
                right.hist = left.hist;
                right.hist.subtract_from(parent.hist);
            } else {
                build_histogram(right, row_idx, g, h);
                left.hist = right.hist;
                left.hist.subtract_from(parent.hist);
            }

            // wire up the tree nodes
            const int node_left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            const int node_right = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            TreeNode& pn = tree.nodes[parent.node];
            pn.feature = feature;
            pn.threshold = edges_[feature][sp.bin];
            pn.left = node_left;
            pn.right = node_right;
            pn.default_left = true;
            pn.value = 0.0;
            left.node = node_left;
            right.node = node_right;

            find_best_split(left);
            find_best_split(right);
            leaves.push_back(std::move(left));
            leaves.push_back(std::move(right));
            ++leaf_count;
        }

        for (const LeafState& leaf : leaves) {
            const double value = -leaf.sum_g / (leaf.sum_h + cfg_.l2_reg);
            tree.nodes[leaf.node].value = value;
            for (std::uint32_t k = leaf.lo; k < leaf.hi; ++k) row_values[row_idx[k]] = value;
        }
        return tree;
    }

private:
    void build_histogram(LeafState& leaf, const std::vector<std::uint32_t>& row_idx,
                         const std::vector<double>& g, const std::vector<double>& h) {
        leaf.hist.resize(bin_offset_.back());
        for (std::uint32_t k = leaf.lo; k < leaf.hi; ++k) {
            const std::uint32_t r = row_idx[k];
            const std::uint8_t* row_bins = &bins_[static_cast<std::size_t>(r) * cols_];
            const double gr = g[r];
            const double hr = h[r];
            for (std::size_t j = 0; j < cols_; ++j) {
                const std::size_t slot = bin_offset_[j] + row_bins[j];
                leaf.hist.sum_g[slot] += gr;
                leaf.hist.sum_h[slot] += hr;
                leaf.hist.count[slot] += 1;
            }
        }
    }

    void find_best_split(LeafState& leaf) {
        leaf.best = SplitCandidate();
        const std::uint32_t total_count = leaf.hi - leaf.lo;
        if (total_count < 2 * static_cast<std::uint32_t>(cfg_.min_samples_leaf)) return;

        const double lambda = cfg_.l2_reg;
        const double parent_obj = leaf_objective(leaf.sum_g, leaf.sum_h, lambda);

        for (std::size_t j = 0; j < cols_; ++j) {
            const std::size_t nbins = bin_count_[j];
            if (nbins < 2) continue;
            double gl = 0.0, hl = 0.0;
            std::uint32_t cl = 0;
            for (std::size_t b = 0; b + 1 < nbins; ++b) {
                const std::size_t slot = bin_offset_[j] + b;
                gl += leaf.hist.sum_g[slot];
                hl += leaf.hist.sum_h[slot];
                cl += leaf.hist.count[slot];
                if (cl < static_cast<std::uint32_t>(cfg_.min_samples_leaf)) continue;
                const std::uint32_t cr = total_count - cl;
                if (cr < static_cast<std::uint32_t>(cfg_.min_samples_leaf)) break;
                const double gain = 0.5 * (leaf_objective(gl, hl, lambda) +
                                           leaf_objective(leaf.sum_g - gl, leaf.sum_h - hl, lambda) -
                                           parent_obj);
                if (gain > leaf.best.gain) {
                    leaf.best.gain = gain;
                    leaf.best.feature = static_cast<int>(j);
                    leaf.best.bin = static_cast<int>(b);
                    leaf.best.left_g = gl;
                    leaf.best.left_h = hl;
                    leaf.best.left_count = cl;
                }
            }
        }
    }

    const std::vector<std::uint8_t>& bins_;
    std::size_t rows_;
    std::size_t cols_;
    const std::vector<std::size_t>& bin_offset_;
    const std::vector<std::size_t>& bin_count_;
    const std::vector<std::vector<double>>& edges_;
    const GbdtConfig& cfg_;
};

}  // namespace

GbdtModel fit_gbdt(const linalg::Mat& X, const std::vector<double>& y, const GbdtConfig& cfg) {
    cfg.validate();
    if (X.rows != y.size()) fail("fit_gbdt: row count does not match target count");
    if (X.rows == 0) fail("fit_gbdt: empty training set");
    if (X.rows < static_cast<std::size_t>(cfg.min_samples_leaf))
        fail("fit_gbdt: fewer rows than min_samples_leaf");
    for (double v : y)
        if (!std::isfinite(v)) fail("fit_gbdt: non-finite target");
    for (double v : X.a)
        if (!std::isfinite(v)) fail("fit_gbdt: non-finite feature value");

    const std::size_t n = X.rows;
    const std::size_t d = X.cols;

    GbdtModel model;
    model.config = cfg;
    model.feature_count = d;
    model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    model.bin_edges.resize(d);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = X(i, j);
        model.bin_edges[j] = quantile_bins(column, cfg.max_bins);
    }

    std::vector<std::size_t> bin_count(d), bin_offset(d + 1, 0);
    for (std::size_t j = 0; j < d; ++j) {
        bin_count[j] = model.bin_edges[j].size() + 1;
        bin_offset[j + 1] = bin_offset[j] + bin_count[j];
    }

    std::vector<std::uint8_t> bins(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            bins[i * d + j] = static_cast<std::uint8_t>(bin_index(model.bin_edges[j], X(i, j)));

    std::vector<double> pred(n, model.base_score);
    std::vector<double> g(n), h(n), row_values(n);

    for (int t = 0; t < cfg.num_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = pred[i] - y[i];
            if (cfg.loss == GbdtConfig::Loss::Squared) {
                g[i] = diff;
                h[i] = 1.0;
            } else {
                g[i] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                h[i] = 1.0;
            }
        }
        TreeGrower grower(bins, n, d, bin_offset, bin_count, model.bin_edges, cfg);
        std::fill(row_values.begin(), row_values.end(), 0.0);
        Tree tree = grower.grow(g, h, row_values);
        for (std::size_t i = 0; i < n; ++i) pred[i] += cfg.learning_rate * row_values[i];
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> predict_gbdt(const GbdtModel& model, const linalg::Mat& X) {
    if (X.cols != model.feature_count)
        fail("predict_gbdt: feature count " + std::to_string(X.cols) +
             " does not match training count " + std::to_string(model.feature_count));
    std::vector<double> out(X.rows, model.base_score);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double* row = &X.a[i * X.cols];
        double acc = 0.0;
        for (const auto& tree : model.trees) acc += tree.predict_row(row);
        out[i] += model.config.learning_rate * acc;
    }
    return out;
}

std::string GbdtModel::to_json_string() const {
    json j;
    j["version"] = 1;
    j["kind"] = "gbdt";
    j["config"] = {{"num_trees", config.num_trees},
                   {"learning_rate", config.learning_rate},
                   {"max_leaves", config.max_leaves},
                   {"min_samples_leaf", config.min_samples_leaf},
                   {"max_bins", config.max_bins},
                   {"l2_reg", config.l2_reg},
                   {"loss", loss_name(config.loss)},
                   {"seed", config.seed}};
    j["base_score"] = base_score;
    j["feature_count"] = feature_count;
    j["bin_edges"] = bin_edges;
    json trees_j = json::array();
    for (const auto& tree : trees) {
        json nodes_j = json::array();
        for (const auto& nd : tree.nodes)
            nodes_j.push_back({{"feature", nd.feature},
                               {"threshold", nd.threshold},
                               {"left", nd.left},
                               {"right", nd.right},
                               {"default_left", nd.default_left},
                               {"value", nd.value}});
        trees_j.push_back({{"nodes", nodes_j}});
    }
    j["trees"] = trees_j;
    return j.dump() + "\n";
}

GbdtModel GbdtModel::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1) fail("gbdt model: unsupported version");
    if (j.at("kind").get<std::string>() != "gbdt") fail("gbdt model: wrong model kind");
    GbdtModel m;
    const json& c = j.at("config");
    m.config.num_trees = c.at("num_trees").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.max_leaves = c.at("max_leaves").get<int>();
    m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    m.config.max_bins = c.at("max_bins").get<int>();
    m.config.l2_reg = c.at("l2_reg").get<double>();
    m.config.loss = loss_from_name(c.at("loss").get<std::string>());
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.base_score = j.at("base_score").get<double>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.bin_edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
    for (const auto& tree_j : j.at("trees")) {
        Tree tree;
        for (const auto& nd_j : tree_j.at("nodes")) {
            TreeNode nd;
            nd.feature = nd_j.at("feature").get<int>();
            nd.threshold = nd_j.at("threshold").get<double>();
            nd.left = nd_j.at("left").get<int>();
            nd.right = nd_j.at("right").get<int>();
            nd.default_left = nd_j.at("default_left").get<bool>();
            nd.value = nd_j.at("value").get<double>();
            tree.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

}  // namespace smp::gbdt
