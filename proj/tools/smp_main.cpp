// smp - social media popularity pipeline CLI
//
// Subcommands: synth, transform, train, predict, ensemble, evaluate,
// correlate, ablate. Every artifact-writing command drops a
// <output>.manifest.json with the full config echo, seeds and input digests
// so a run can be reproduced bit for bit.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "smp/cv.hpp"
#include "smp/data.hpp"
#include "smp/features.hpp"
#include "smp/io.hpp"
#include "smp/metrics.hpp"
#include "smp/model_file.hpp"
#include "smp/synth.hpp"
#include "smp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smp;

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::set<std::string> parse_blocks(const std::string& csv) {
    if (csv == "all" || csv.empty())
        return std::set<std::string>(feat::kBlockOrder.begin(), feat::kBlockOrder.end());
    const auto items = split_list(csv);
    return std::set<std::string>(items.begin(), items.end());
}

// with --blocks all, embedding tags without a block file are skipped; an
// explicitly requested tag still errors downstream
std::set<std::string> resolve_blocks(const Dataset& ds, const std::string& csv) {
    const bool all = (csv == "all" || csv.empty());
    std::set<std::string> wanted = parse_blocks(csv);
    if (!all) return wanted;
    std::set<std::string> out;
    for (const auto& tag : wanted) {
        if (feat::is_embedding_tag(tag) && ds.block_index(tag) == static_cast<std::size_t>(-1))
            continue;
        out.insert(tag);
    }
    return out;
}

void write_manifest(const std::string& out_path, json body) {
    body["tool"] = "smp";
    body["tool_version"] = kVersion;
    const std::string path = out_path + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << body.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

json dataset_digests(const std::string& dir) {
    json out = json::object();
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out[fs::path(f).filename().string()] = io::file_digest(f);
    return out;
}

struct ModelOptions {
    std::string model = "gbdt";
    // gbdt
    int trees = 500;
    double gbdt_lr = 0.05;
    int max_leaves = 31;
    int min_samples_leaf = 20;
    int max_bins = 255;
    double l2 = 1.0;
    std::string loss = "squared";
    // mlp
    std::string hidden = "128,64";
    int epochs = 200;
    int batch_size = 256;
    double mlp_lr = 1e-3;

    std::uint64_t seed = 0;

    void add_flags(CLI::App* cmd, bool with_kind = true) {
        if (with_kind)
            cmd->add_option("--model", model, "Model kind: gbdt|mlp")
                ->check(CLI::IsMember({"gbdt", "mlp"}))
                ->capture_default_str();
        cmd->add_option("--trees", trees, "GBDT: number of trees")->capture_default_str();
        cmd->add_option("--gbdt-learning-rate", gbdt_lr, "GBDT: shrinkage per tree")
            ->capture_default_str();
        cmd->add_option("--max-leaves", max_leaves, "GBDT: leaves per tree")->capture_default_str();
        cmd->add_option("--min-samples-leaf", min_samples_leaf, "GBDT: minimum rows per leaf")
            ->capture_default_str();
        cmd->add_option("--max-bins", max_bins, "GBDT: histogram bins")->capture_default_str();
        cmd->add_option("--l2", l2, "GBDT: L2 leaf regularization")->capture_default_str();
        cmd->add_option("--loss", loss, "GBDT: squared|absolute")
            ->check(CLI::IsMember({"squared", "absolute"}))
            ->capture_default_str();
        cmd->add_option("--hidden", hidden, "MLP: hidden layer sizes, e.g. 128,64")
            ->capture_default_str();
        cmd->add_option("--epochs", epochs, "MLP: training epochs")->capture_default_str();
        cmd->add_option("--batch-size", batch_size, "MLP: minibatch size")->capture_default_str();
        cmd->add_option("--mlp-learning-rate", mlp_lr, "MLP: optimizer step size")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Model seed")->capture_default_str();
    }

    cv::ModelSpec spec(const std::string& kind_name) const {
        cv::ModelSpec s;
        s.kind = cv::model_kind_from_name(kind_name);
        s.gbdt_cfg.num_trees = trees;
        s.gbdt_cfg.learning_rate = gbdt_lr;
        s.gbdt_cfg.max_leaves = max_leaves;
        s.gbdt_cfg.min_samples_leaf = min_samples_leaf;
        s.gbdt_cfg.max_bins = max_bins;
        s.gbdt_cfg.l2_reg = l2;
        s.gbdt_cfg.loss = gbdt::loss_from_name(loss);
        s.gbdt_cfg.seed = seed;
        s.mlp_cfg.hidden.clear();
        for (const auto& h : split_list(hidden))
            s.mlp_cfg.hidden.push_back(static_cast<std::size_t>(std::stoul(h)));
        s.mlp_cfg.epochs = epochs;
        s.mlp_cfg.batch_size = static_cast<std::size_t>(batch_size);
        s.mlp_cfg.learning_rate = mlp_lr;
        s.mlp_cfg.seed = seed;
        return s;
    }

    json echo() const {
        return {{"model", model},
                {"trees", trees},
                {"gbdt_learning_rate", gbdt_lr},
                {"max_leaves", max_leaves},
                {"min_samples_leaf", min_samples_leaf},
                {"max_bins", max_bins},
                {"l2", l2},
                {"loss", loss},
                {"hidden", hidden},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"mlp_learning_rate", mlp_lr},
                {"seed", seed}};
    }
};

json fold_evals_json(const cv::CvResult& result) {
    json folds = json::array();
    for (std::size_t f = 0; f < result.fold_evals.size(); ++f) {
        const auto& e = result.fold_evals[f];
        folds.push_back({{"fold", f},
                         {"validation_rows", e.validation_rows},
                         {"src", e.src},
                         {"src_degenerate", e.src_degenerate},
                         {"mae", e.mae}});
    }
    return folds;
}

// pid-aligned label lookup: labels may come as a pid,value CSV or a posts file
std::pair<std::vector<double>, std::vector<double>> align_pred_labels(
    const std::string& pred_path, const std::string& label_path) {
    const auto pred = io::load_pid_values(pred_path);

    std::ifstream probe(label_path);
    std::string header;
    std::getline(probe, header);
    probe.close();

    std::unordered_map<std::uint64_t, double> label_by_pid;
    if (header.rfind("uid,", 0) == 0) {
        for (const auto& p : io::load_posts(label_path)) {
            if (!p.label)
                throw std::runtime_error(label_path + ": post pid " + std::to_string(p.pid) +
                                         " has no label");
            label_by_pid[p.pid] = *p.label;
        }
    } else {
        const auto lab = io::load_pid_values(label_path);
        for (std::size_t i = 0; i < lab.pids.size(); ++i) label_by_pid[lab.pids[i]] = lab.values[i];
    }

    std::vector<double> y, yhat;
    for (std::size_t i = 0; i < pred.pids.size(); ++i) {
        const auto it = label_by_pid.find(pred.pids[i]);
        if (it == label_by_pid.end())
            throw std::runtime_error("no label for pid " + std::to_string(pred.pids[i]));
        y.push_back(it->second);
        yhat.push_back(pred.values[i]);
    }
    return {y, yhat};
}

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"social media popularity prediction pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("smp ") + kVersion);

    int threads = default_threads();
    app.add_option("--threads", threads, "Worker cap for fold-parallel stages")
        ->capture_default_str();
    // key-value config file; keys live under a [subcommand] section and
    // command-line flags win over file values
    app.set_config("--config", "", "Config file with [subcommand] sections (flags win)");

    // ---- synth ---------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
    std::string synth_out;
    synth::SynthConfig synth_cfg;
    std::string synth_dims = "cap:16,image:16,single_lang:12,multi_lang:12,m:8";
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--n-users", synth_cfg.n_users, "Distinct users")->capture_default_str();
    synth_cmd->add_option("--posts-min", synth_cfg.posts_per_user_min, "Min posts per user")
        ->capture_default_str();
    synth_cmd->add_option("--posts-max", synth_cfg.posts_per_user_max, "Max posts per user")
        ->capture_default_str();
    synth_cmd->add_option("--emb-dims", synth_dims, "Embedding dims, tag:dim list")
        ->capture_default_str();
    synth_cmd
        ->add_option("--signal-block", synth_cfg.signal_block, "Block carrying the planted signal")
        ->capture_default_str();
    synth_cmd->add_option("--beta-follower", synth_cfg.beta_follower, "Identity signal weight")
        ->capture_default_str();
    synth_cmd->add_option("--beta-hour", synth_cfg.beta_hour, "Diurnal signal weight")
        ->capture_default_str();
    synth_cmd->add_option("--beta-embed", synth_cfg.beta_embed, "Embedding signal weight")
        ->capture_default_str();
    synth_cmd->add_option("--sigma", synth_cfg.noise_sigma, "Label noise sigma")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--test-fraction", synth_cfg.test_fraction, "User-disjoint test share")
        ->capture_default_str();
    synth_cmd->add_option("--p-missing-geo", synth_cfg.p_missing_geo, "Missing-geo rate")
        ->capture_default_str();
    synth_cmd->add_option("--p-missing-profile", synth_cfg.p_missing_profile, "Missing-profile rate")
        ->capture_default_str();
    synth_cmd
        ->add_option("--p-missing-embedding", synth_cfg.p_missing_embedding,
                     "Missing-embedding-row rate")
        ->capture_default_str();
    synth_cmd
        ->add_option("--p-missing-categorical", synth_cfg.p_missing_categorical,
                     "Missing-categorical rate")
        ->capture_default_str();
    synth_cmd
        ->add_option("--p-missing-counter", synth_cfg.p_missing_counter, "Missing-counter-cell rate")
        ->capture_default_str();

    // ---- transform -------------------------------------------------------------
    auto* transform_cmd = app.add_subcommand("transform", "Fit the feature transform on a dataset");
    std::string tr_train, tr_blocks = "all", tr_state_out, tr_matrix_out;
    double tr_pca_target = 0.95;
    std::size_t tr_pca_max = 64;
    transform_cmd->add_option("--train", tr_train, "Training dataset directory")->required();
    transform_cmd->add_option("--blocks", tr_blocks, "Comma list of block tags or 'all'")
        ->capture_default_str();
    transform_cmd->add_option("--state-out", tr_state_out, "Fitted state JSON path")->required();
    transform_cmd->add_option("--matrix-out", tr_matrix_out, "Optional feature matrix CSV (debug)");
    transform_cmd->add_option("--pca-target", tr_pca_target, "Retained-variance target")
        ->capture_default_str();
    transform_cmd->add_option("--pca-max-dims", tr_pca_max, "Per-block component cap")
        ->capture_default_str();

    // ---- train -----------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Group k-fold training and test prediction");
    std::string trn_train, trn_test, trn_blocks = "all", trn_out, trn_models_dir;
    int trn_k = 5;
    bool trn_shuffle = false;
    std::uint64_t trn_fold_seed = 0;
    ModelOptions trn_model;
    train_cmd->add_option("--train", trn_train, "Training dataset directory")->required();
    train_cmd->add_option("--test", trn_test, "Test dataset directory")->required();
    train_cmd->add_option("--k", trn_k, "Fold count")->capture_default_str();
    train_cmd->add_option("--blocks", trn_blocks, "Comma list of block tags or 'all'")
        ->capture_default_str();
    train_cmd->add_option("--out", trn_out, "Aggregated prediction CSV")->required();
    train_cmd->add_option("--save-models", trn_models_dir, "Directory for per-fold .smpm models");
    train_cmd->add_flag("--shuffle-folds", trn_shuffle, "Seeded-shuffle uid order instead of greedy");
    train_cmd->add_option("--fold-seed", trn_fold_seed, "Seed for --shuffle-folds");
    trn_model.add_flags(train_cmd);

    // ---- predict ----------------------------------------------------------------
    auto* predict_cmd = app.add_subcommand("predict", "Apply saved fold models to a dataset");
    std::vector<std::string> pr_models;
    std::string pr_data, pr_out;
    predict_cmd->add_option("--models", pr_models, "Model files or a directory of .smpm")->required();
    predict_cmd->add_option("--data", pr_data, "Dataset directory")->required();
    predict_cmd->add_option("--out", pr_out, "Prediction CSV")->required();

    // ---- ensemble ------------------------------------------------------------
    auto* ensemble_cmd = app.add_subcommand("ensemble", "Weighted average of two prediction files");
    std::string en_a, en_b, en_out;
    double en_alpha = 0.7;
    ensemble_cmd->add_option("--pred-a", en_a, "First prediction CSV")->required();
    ensemble_cmd->add_option("--pred-b", en_b, "Second prediction CSV")->required();
    ensemble_cmd->add_option("--alpha", en_alpha, "Weight of pred-a")->capture_default_str();
    ensemble_cmd->add_option("--out", en_out, "Output CSV")->required();

    // ---- evaluate --------------------------------------------------------------
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against labels");
    std::string ev_pred, ev_labels;
    evaluate_cmd->add_option("--pred", ev_pred, "Prediction CSV (pid,prediction)")->required();
    evaluate_cmd->add_option("--labels", ev_labels, "Labels: pid,value CSV or a posts.csv")
        ->required();

    // ---- correlate -------------------------------------------------------------
    auto* correlate_cmd = app.add_subcommand("correlate", "Per-feature |SRC| report against labels");
    std::string co_train, co_out, co_external = "eu";
    correlate_cmd->add_option("--train", co_train, "Labeled dataset directory")->required();
    correlate_cmd->add_option("--out", co_out, "Report CSV")->required();
    correlate_cmd->add_option("--external", co_external, "External block tags (comma list)")
        ->capture_default_str();

    // ---- ablate ----------------------------------------------------------------
    auto* ablate_cmd = app.add_subcommand("ablate", "Metric grid over feature-block subsets");
    std::string ab_train, ab_test, ab_subsets, ab_out, ab_models = "gbdt,mlp";
    int ab_k = 5;
    ModelOptions ab_model;
    ablate_cmd->add_option("--train", ab_train, "Training dataset directory")->required();
    ablate_cmd->add_option("--test", ab_test, "Labeled test dataset directory")->required();
    ablate_cmd
        ->add_option("--subsets", ab_subsets, "File with one comma-separated block list per line")
        ->required();
    ablate_cmd->add_option("--out", ab_out, "Result CSV")->required();
    ablate_cmd->add_option("--models", ab_models, "Model kinds to run (comma list)")
        ->capture_default_str();
    ablate_cmd->add_option("--k", ab_k, "Fold count")->capture_default_str();
    ab_model.add_flags(ablate_cmd, /*with_kind=*/false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            synth_cfg.embedding_dims.clear();
            for (const auto& item : split_list(synth_dims)) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::runtime_error("bad --emb-dims entry '" + item + "', want tag:dim");
                synth_cfg.embedding_dims[item.substr(0, colon)] = std::stoul(item.substr(colon + 1));
            }
            const auto out = synth::generate_synthetic(synth_cfg, synth_out);
            std::cout << "wrote " << out.train_posts << " train posts, " << out.test_posts
                      << " test posts under " << synth_out << "\n"
                      << "manifest: " << out.manifest_path << "\n";
        } else if (*transform_cmd) {
            const Dataset train = io::load_dataset_dir(tr_train);
            const auto blocks = resolve_blocks(train, tr_blocks);
            feat::TransformOptions opts;
            opts.pca_target_variance = tr_pca_target;
            opts.pca_max_dims = tr_pca_max;
            auto [matrix, state] = feat::fit_transform(train, blocks, opts);
            state.save(tr_state_out);
            if (!tr_matrix_out.empty()) feat::export_matrix_csv(matrix, tr_matrix_out);

            json schema = json::array();
            for (const auto& b : matrix.schema.blocks)
                schema.push_back({{"name", b.name}, {"start", b.start}, {"width", b.width}});
            write_manifest(tr_state_out, {{"command", "transform"},
                                          {"train", tr_train},
                                          {"train_digests", dataset_digests(tr_train)},
                                          {"blocks", blocks},
                                          {"pca_target", tr_pca_target},
                                          {"pca_max_dims", tr_pca_max},
                                          {"schema", schema},
                                          {"rows", matrix.rows},
                                          {"columns", matrix.cols}});
            std::cout << "fitted transform on " << matrix.rows << " rows, " << matrix.cols
                      << " columns\n";
        } else if (*train_cmd) {
            const Dataset train = io::load_dataset_dir(trn_train);
            const Dataset test = io::load_dataset_dir(trn_test);
            const auto blocks = resolve_blocks(train, trn_blocks);
            const auto plan = cv::make_group_kfold(train, trn_k, trn_fold_seed, trn_shuffle);
            const auto spec = trn_model.spec(trn_model.model);

            const cv::CvResult result =
                cv::run_cv_predict(train, test, plan, spec, blocks, {}, threads);
            io::save_pid_values(trn_out, "prediction", result.test_pids,
                                result.prediction.aggregated);

            std::vector<std::string> model_files;
            if (!trn_models_dir.empty()) {
                fs::create_directories(trn_models_dir);
                for (std::size_t f = 0; f < result.fold_models.size(); ++f) {
                    const auto path = (fs::path(trn_models_dir) /
                                       (trn_model.model + "_fold" + std::to_string(f) + ".smpm"))
                                          .string();
                    save_trained_model(path, result.fold_models[f]);
                    model_files.push_back(path);
                }
            }

            for (std::size_t f = 0; f < result.fold_evals.size(); ++f) {
                const auto& e = result.fold_evals[f];
                std::cout << "fold " << f << ": validation src=" << io::format_double(e.src)
                          << " mae=" << io::format_double(e.mae) << " rows=" << e.validation_rows
                          << (e.src_degenerate ? " (degenerate)" : "") << "\n";
            }

            write_manifest(trn_out, {{"command", "train"},
                                     {"train", trn_train},
                                     {"test", trn_test},
                                     {"train_digests", dataset_digests(trn_train)},
                                     {"test_digests", dataset_digests(trn_test)},
                                     {"k", trn_k},
                                     {"shuffle_folds", trn_shuffle},
                                     {"fold_seed", trn_fold_seed},
                                     {"plan_digest", plan.digest()},
                                     {"blocks", blocks},
                                     {"model", trn_model.echo()},
                                     {"fold_evals", fold_evals_json(result)},
                                     {"saved_models", model_files},
                                     {"output", trn_out}});
            std::cout << "wrote " << trn_out << "\n";
        } else if (*predict_cmd) {
            std::vector<std::string> model_files;
            for (const auto& entry : pr_models) {
                if (fs::is_directory(entry)) {
                    std::vector<std::string> found;
                    for (const auto& f : fs::directory_iterator(entry))
                        if (f.path().extension() == ".smpm") found.push_back(f.path().string());
                    std::sort(found.begin(), found.end());
                    model_files.insert(model_files.end(), found.begin(), found.end());
                } else {
                    model_files.push_back(entry);
                }
            }
            if (model_files.empty()) throw std::runtime_error("no .smpm model files given");

            const Dataset data = io::load_dataset_dir(pr_data);
            std::vector<std::vector<double>> per_model;
            for (const auto& f : model_files) per_model.push_back(load_trained_model(f).predict(data));
            const auto aggregated = cv::median_aggregate(per_model);

            std::vector<std::uint64_t> pids;
            for (const auto& p : data.posts) pids.push_back(p.pid);
            io::save_pid_values(pr_out, "prediction", pids, aggregated);
            write_manifest(pr_out, {{"command", "predict"},
                                    {"models", model_files},
                                    {"data", pr_data},
                                    {"data_digests", dataset_digests(pr_data)},
                                    {"output", pr_out}});
            std::cout << "wrote " << pr_out << " (" << per_model.size() << " models, median)\n";
        } else if (*ensemble_cmd) {
            const auto a = io::load_pid_values(en_a);
            const auto b = io::load_pid_values(en_b);
            if (a.pids != b.pids)
                throw std::runtime_error("prediction files disagree on pids or their order");
            const auto combined = cv::ensemble_weighted(a.values, b.values, en_alpha);
            io::save_pid_values(en_out, "prediction", a.pids, combined);
            write_manifest(en_out, {{"command", "ensemble"},
                                    {"pred_a", en_a},
                                    {"pred_b", en_b},
                                    {"pred_a_digest", io::file_digest(en_a)},
                                    {"pred_b_digest", io::file_digest(en_b)},
                                    {"alpha", en_alpha},
                                    {"output", en_out}});
            std::cout << "wrote " << en_out << "\n";
        } else if (*evaluate_cmd) {
            const auto [y, yhat] = align_pred_labels(ev_pred, ev_labels);
            const auto src = metrics::spearman_src(y, yhat);
            const double err = metrics::mae(y, yhat);
            std::cout << "src=" << io::format_double(src.value) << " mae=" << io::format_double(err)
                      << " n=" << y.size() << (src.degenerate ? " degenerate=1" : "") << "\n";
        } else if (*correlate_cmd) {
            const Dataset train = io::load_dataset_dir(co_train);
            auto [matrix, state] = feat::fit_transform(train, {"time", "n", "eu"});
            const std::vector<double> labels = cv::require_labels(train, "correlate");
            const auto ext = split_list(co_external);
            const auto report = metrics::feature_correlation_report(
                matrix, labels, std::set<std::string>(ext.begin(), ext.end()));
            metrics::save_correlation_csv(report, co_out);
            std::cout << metrics::render_correlation_text(report);
            write_manifest(co_out, {{"command", "correlate"},
                                    {"train", co_train},
                                    {"train_digests", dataset_digests(co_train)},
                                    {"external", ext},
                                    {"output", co_out}});
        } else if (*ablate_cmd) {
            const Dataset train = io::load_dataset_dir(ab_train);
            const Dataset test = io::load_dataset_dir(ab_test);
            const auto plan = cv::make_group_kfold(train, ab_k);

            std::vector<std::set<std::string>> subsets;
            std::ifstream in(ab_subsets);
            if (!in) throw std::runtime_error("cannot open subsets file: " + ab_subsets);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty() || line[0] == '#') continue;
                subsets.push_back(parse_blocks(line));
            }
            if (subsets.empty()) throw std::runtime_error("subsets file lists no block subsets");

            std::vector<cv::ModelSpec> specs;
            for (const auto& kind : split_list(ab_models)) specs.push_back(ab_model.spec(kind));

            const auto rows = cv::run_ablation(train, test, plan, specs, subsets, {}, threads);

            std::ofstream out(ab_out);
            if (!out) throw std::runtime_error("cannot open file for writing: " + ab_out);
            out << "blocks,model,src,mae\n";
            json manifest_rows = json::array();
            for (const auto& row : rows) {
                std::string joined;
                for (const auto& tag : row.blocks) {
                    if (!joined.empty()) joined += '+';
                    joined += tag;
                }
                out << joined << ',' << cv::model_kind_name(row.model) << ','
                    << io::format_double(row.src) << ',' << io::format_double(row.mae) << '\n';
                std::cout << joined << " " << cv::model_kind_name(row.model)
                          << ": src=" << io::format_double(row.src)
                          << " mae=" << io::format_double(row.mae) << "\n";
                manifest_rows.push_back({{"blocks", row.blocks},
                                         {"model", cv::model_kind_name(row.model)},
                                         {"src", row.src},
                                         {"mae", row.mae},
                                         {"k", ab_k},
                                         {"plan_digest", plan.digest()},
                                         {"model_config", ab_model.echo()}});
            }
            if (!out) throw std::runtime_error("write failed: " + ab_out);
            write_manifest(ab_out, {{"command", "ablate"},
                                    {"train", ab_train},
                                    {"test", ab_test},
                                    {"train_digests", dataset_digests(ab_train)},
                                    {"test_digests", dataset_digests(ab_test)},
                                    {"rows", manifest_rows},
                                    {"output", ab_out}});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
