#include "smp/cv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "smp/rng.hpp"

namespace smp::cv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

std::string GroupFoldPlan::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    mix("k=" + std::to_string(k));
    for (const auto& [uid, fold] : assignment) mix("|" + uid + ":" + std::to_string(fold));
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

std::string model_kind_name(ModelKind kind) { return kind == ModelKind::Gbdt ? "gbdt" : "mlp"; }

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "gbdt") return ModelKind::Gbdt;
    if (name == "mlp") return ModelKind::Mlp;
    fail("unknown model kind '" + name + "'");
}

GroupFoldPlan make_group_kfold(const Dataset& dataset, int k, std::uint64_t seed, bool shuffle) {
    if (k < 2) fail("make_group_kfold: k must be >= 2");

    std::map<std::string, std::size_t> post_count;
    for (const auto& p : dataset.posts) ++post_count[p.uid];
    if (post_count.size() < static_cast<std::size_t>(k))
        fail("make_group_kfold: k=" + std::to_string(k) + " exceeds distinct uid count " +
             std::to_string(post_count.size()));

    std::vector<std::pair<std::string, std::size_t>> uids(post_count.begin(), post_count.end());
    if (shuffle) {
        Rng rng(seed);
        rng.shuffle(uids);
    } else {
        std::sort(uids.begin(), uids.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
    }

    GroupFoldPlan plan;
    plan.k = k;
    std::vector<std::size_t> load(k, 0);
    for (const auto& [uid, count] : uids) {
        int best = 0;
        for (int f = 1; f < k; ++f)
            if (load[f] < load[best]) best = f;
        plan.assignment[uid] = best;
        load[best] += count;
    }
    return plan;
}

std::vector<double> require_labels(const Dataset& dataset, const std::string& context) {
    std::vector<double> labels;
    labels.reserve(dataset.posts.size());
    for (const auto& p : dataset.posts) {
        if (!p.label)
            fail(context + ": post pid " + std::to_string(p.pid) +
                 " has no label; labeled rows are required here");
        labels.push_back(*p.label);
    }
    return labels;
}

linalg::Mat to_mat(const feat::FeatureMatrix& m) {
    linalg::Mat out;
    out.rows = m.rows;
    out.cols = m.cols;
    out.a = m.values;
    return out;
}

Dataset subset_dataset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    std::vector<PostRecord> posts;
    posts.reserve(indices.size());
    for (std::size_t i : indices) posts.push_back(dataset.posts.at(i));

    std::unordered_map<std::string, UserProfile> profiles;
    for (const auto& p : posts) {
        const auto it = dataset.profiles.find(p.uid);
        if (it != dataset.profiles.end()) profiles.emplace(it->first, it->second);
    }

    std::vector<EmbeddingBlock> blocks;
    blocks.reserve(dataset.blocks.size());
    for (const auto& block : dataset.blocks) {
        EmbeddingBlock sub;
        sub.name = block.name;
        sub.dim = block.dim;
        for (const auto& p : posts) {
            const auto it = block.rows.find(p.pid);
            if (it != block.rows.end()) sub.rows.emplace(it->first, it->second);
        }
        blocks.push_back(std::move(sub));
    }
    return join_dataset(std::move(posts), std::move(profiles), std::move(blocks));
}

std::vector<double> TrainedModel::predict(const Dataset& dataset) const {
    const feat::FeatureMatrix matrix = feat::apply_transform(dataset, state);
    if (kind == ModelKind::Gbdt) return gbdt::predict_gbdt(gbdt_model, to_mat(matrix));
    const feat::FeatureMatrix standardized = feat::standardize_matrix(matrix, state);
    return mlp::predict_mlp(mlp_model, to_mat(standardized));
}

namespace {

struct FoldOutput {
    std::vector<double> test_pred;
    FoldEval eval;
    std::string state_json;
    TrainedModel model;
};

FoldOutput run_one_fold(const Dataset& train, const Dataset& test, const GroupFoldPlan& plan,
                        int fold, const ModelSpec& spec,
                        const std::set<std::string>& enabled_blocks,
                        const feat::TransformOptions& options) {
    std::vector<std::size_t> fit_idx, val_idx;
    for (std::size_t i = 0; i < train.posts.size(); ++i) {
        const auto it = plan.assignment.find(train.posts[i].uid);
        if (it == plan.assignment.end())
            fail("run_cv_predict: uid '" + train.posts[i].uid + "' not covered by the fold plan");
        (it->second == fold ? val_idx : fit_idx).push_back(i);
    }
    if (fit_idx.empty()) fail("run_cv_predict: fold " + std::to_string(fold) +
                              " leaves no training rows");

    const Dataset fit_ds = subset_dataset(train, fit_idx);
    const Dataset val_ds = subset_dataset(train, val_idx);

    auto [fit_matrix, state] = feat::fit_transform(fit_ds, enabled_blocks, options);
    const std::vector<double> fit_y = require_labels(fit_ds, "run_cv_predict training split");

    const feat::FeatureMatrix val_matrix = feat::apply_transform(val_ds, state);
    const std::vector<double> val_y = require_labels(val_ds, "run_cv_predict validation split");
    const feat::FeatureMatrix test_matrix = feat::apply_transform(test, state);

    FoldOutput out;
    out.state_json = state.to_json_string();
    out.model.kind = spec.kind;

    std::vector<double> val_pred;
    if (spec.kind == ModelKind::Gbdt) {
        out.model.gbdt_model = gbdt::fit_gbdt(to_mat(fit_matrix), fit_y, spec.gbdt_cfg);
        val_pred = gbdt::predict_gbdt(out.model.gbdt_model, to_mat(val_matrix));
        out.test_pred = gbdt::predict_gbdt(out.model.gbdt_model, to_mat(test_matrix));
    } else {
        // the neural path consumes standardized inputs; trees read raw values
        const feat::FeatureMatrix fit_std = feat::standardize_matrix(fit_matrix, state);
        const feat::FeatureMatrix val_std = feat::standardize_matrix(val_matrix, state);
        const feat::FeatureMatrix test_std = feat::standardize_matrix(test_matrix, state);
        out.model.mlp_model = mlp::fit_mlp(to_mat(fit_std), fit_y, spec.mlp_cfg);
        val_pred = mlp::predict_mlp(out.model.mlp_model, to_mat(val_std));
        out.test_pred = mlp::predict_mlp(out.model.mlp_model, to_mat(test_std));
    }
    out.model.state = std::move(state);

    out.eval.validation_rows = val_y.size();
    if (val_y.size() >= 2) {
        const metrics::SrcResult src = metrics::spearman_src(val_y, val_pred);
        out.eval.src = src.value;
        out.eval.src_degenerate = src.degenerate;
        out.eval.mae = metrics::mae(val_y, val_pred);
    } else if (val_y.size() == 1) {
        out.eval.src = 0.0;
        out.eval.src_degenerate = true;
        out.eval.mae = metrics::mae(val_y, val_pred);
    }
    return out;
}

}  // namespace

CvResult run_cv_predict(const Dataset& train, const Dataset& test, const GroupFoldPlan& plan,
                        const ModelSpec& spec, const std::set<std::string>& enabled_blocks,
                        const feat::TransformOptions& options, int threads) {
    if (plan.k < 1) fail("run_cv_predict: fold plan is empty");

    const int k = plan.k;
    std::vector<FoldOutput> outputs(k);
    std::vector<std::string> errors(k);

    const int workers = std::max(1, std::min(threads, k));
    if (workers == 1) {
        for (int f = 0; f < k; ++f) {
            try {
                outputs[f] = run_one_fold(train, test, plan, f, spec, enabled_blocks, options);
            } catch (const std::exception& e) {
                fail("fold " + std::to_string(f) + ": " + e.what());
            }
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (;;) {
                    const int f = next.fetch_add(1);
                    if (f >= k) return;
                    try {
                        outputs[f] = run_one_fold(train, test, plan, f, spec, enabled_blocks,
                                                  options);
                    } catch (const std::exception& e) {
                        errors[f] = e.what();
                    }
                }
            });
        for (auto& t : pool) t.join();
        for (int f = 0; f < k; ++f)
            if (!errors[f].empty()) fail("fold " + std::to_string(f) + ": " + errors[f]);
    }

    CvResult result;
    result.test_pids.reserve(test.posts.size());
    for (const auto& p : test.posts) result.test_pids.push_back(p.pid);
    for (int f = 0; f < k; ++f) {
        result.prediction.per_fold.push_back(std::move(outputs[f].test_pred));
        result.fold_evals.push_back(outputs[f].eval);
        result.fold_state_json.push_back(std::move(outputs[f].state_json));
        result.fold_models.push_back(std::move(outputs[f].model));
    }
    result.prediction.aggregated = median_aggregate(result.prediction.per_fold);
    return result;
}

std::vector<double> median_aggregate(const std::vector<std::vector<double>>& per_fold) {
    if (per_fold.empty()) fail("median_aggregate: need at least one fold");
    const std::size_t n = per_fold.front().size();
    for (const auto& row : per_fold)
        if (row.size() != n) fail("median_aggregate: ragged input");

    const std::size_t k = per_fold.size();
    std::vector<double> column(k);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < k; ++f) column[f] = per_fold[f][i];
        std::sort(column.begin(), column.end());
        out[i] = (k % 2 == 1) ? column[k / 2] : 0.5 * (column[k / 2 - 1] + column[k / 2]);
    }
    return out;
}

std::vector<double> ensemble_weighted(const std::vector<double>& pred_a,
                                      const std::vector<double>& pred_b, double alpha) {
    if (pred_a.size() != pred_b.size()) fail("ensemble_weighted: length mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("ensemble_weighted: alpha must be in [0,1]");
    std::vector<double> out(pred_a.size());
    for (std::size_t i = 0; i < pred_a.size(); ++i)
        out[i] = alpha * pred_a[i] + (1.0 - alpha) * pred_b[i];
    return out;
}

std::vector<AblationRow> run_ablation(const Dataset& train, const Dataset& test,
                                      const GroupFoldPlan& plan,
                                      const std::vector<ModelSpec>& specs,
                                      const std::vector<std::set<std::string>>& block_subsets,
                                      const feat::TransformOptions& options, int threads) {
    const std::vector<double> test_labels = require_labels(test, "run_ablation test set");

    std::vector<AblationRow> rows;
    for (const auto& subset : block_subsets) {
        for (const auto& spec : specs) {
            const CvResult cv = run_cv_predict(train, test, plan, spec, subset, options, threads);
            AblationRow row;
            row.blocks = subset;
            row.model = spec.kind;
            row.src = metrics::spearman_src(test_labels, cv.prediction.aggregated).value;
            row.mae = metrics::mae(test_labels, cv.prediction.aggregated);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace smp::cv
