#ifndef SMP_CV_HPP
#define SMP_CV_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smp/data.hpp"
#include "smp/features.hpp"
#include "smp/gbdt.hpp"
#include "smp/metrics.hpp"
#include "smp/mlp.hpp"

namespace smp::cv {

/// User-disjoint fold assignment; every dataset uid maps to exactly one fold.
struct GroupFoldPlan {
    int k = 0;
    std::map<std::string, int> assignment;  // uid -> fold in [0, k)

    std::string digest() const;  // stable hash for run manifests
};

/// Uids sorted by descending post count (ties lexicographic) and greedily
/// assigned to the fold with the fewest posts so far (ties: lowest index).
/// With shuffle on, the greedy pass instead consumes uids in seeded-shuffled
/// order; the balance bound still holds.
GroupFoldPlan make_group_kfold(const Dataset& dataset, int k, std::uint64_t seed = 0,
                               bool shuffle = false);

enum class ModelKind { Gbdt, Mlp };
std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelSpec {
    ModelKind kind = ModelKind::Gbdt;
    gbdt::GbdtConfig gbdt_cfg;
    mlp::MlpConfig mlp_cfg;
};

struct FoldEval {
    double src = 0.0;
    bool src_degenerate = false;
    double mae = 0.0;
    std::size_t validation_rows = 0;
};

struct CvPrediction {
    std::vector<std::vector<double>> per_fold;  // k x n_test
    std::vector<double> aggregated;             // per-row median across folds
};

/// One fitted model together with the transform state it was trained under.
struct TrainedModel {
    ModelKind kind = ModelKind::Gbdt;
    gbdt::GbdtModel gbdt_model;  // valid when kind == Gbdt
    mlp::MlpModel mlp_model;     // valid when kind == Mlp
    feat::TransformState state;

    /// Transform + predict a joined dataset end to end.
    std::vector<double> predict(const Dataset& dataset) const;
};

struct CvResult {
    CvPrediction prediction;
    std::vector<FoldEval> fold_evals;            // in-fold validation metrics
    std::vector<TrainedModel> fold_models;
    std::vector<std::string> fold_state_json;    // serialized per-fold TransformState
    std::vector<std::uint64_t> test_pids;
};

/// Per fold: fit the transform and model on the training rows outside the
/// fold, evaluate on the fold's rows, predict the external test rows. All
/// fitted statistics derive from the fold's training portion only. Folds may
/// run on `threads` workers; results are identical to sequential execution.
CvResult run_cv_predict(const Dataset& train, const Dataset& test, const GroupFoldPlan& plan,
                        const ModelSpec& spec, const std::set<std::string>& enabled_blocks,
                        const feat::TransformOptions& options = {}, int threads = 1);

/// Per-column median; even fold counts average the two middle order
/// statistics.
std::vector<double> median_aggregate(const std::vector<std::vector<double>>& per_fold);

/// alpha * pred_a + (1 - alpha) * pred_b, alpha in [0, 1].
std::vector<double> ensemble_weighted(const std::vector<double>& pred_a,
                                      const std::vector<double>& pred_b, double alpha);

struct AblationRow {
    std::set<std::string> blocks;
    ModelKind model = ModelKind::Gbdt;
    double src = 0.0;
    double mae = 0.0;
};

/// Full run_cv_predict per subset x model spec, scored against the labeled
/// test rows. Rows come back in input order (subset-major).
std::vector<AblationRow> run_ablation(const Dataset& train, const Dataset& test,
                                      const GroupFoldPlan& plan,
                                      const std::vector<ModelSpec>& specs,
                                      const std::vector<std::set<std::string>>& block_subsets,
                                      const feat::TransformOptions& options = {}, int threads = 1);

/// Labels of a dataset in post order; fails fast when any row is unlabeled.
std::vector<double> require_labels(const Dataset& dataset, const std::string& context);

/// View a feature matrix as a dense linalg matrix.
linalg::Mat to_mat(const feat::FeatureMatrix& m);

/// Keep only the posts at the given indices, with profiles and embedding
/// rows restricted to what those posts reference.
Dataset subset_dataset(const Dataset& dataset, const std::vector<std::size_t>& indices);

}  // namespace smp::cv

#endif
