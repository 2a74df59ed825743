#ifndef SMP_MLP_HPP
#define SMP_MLP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "smp/linalg.hpp"

namespace smp::mlp {

struct MlpConfig {
    std::vector<std::size_t> hidden = {128, 64};  // rectifier activations
    int epochs = 200;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    // adaptive moment estimation
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Feedforward regressor; layer l maps weights[l] (out x in) plus bias.
/// Hidden layers use max(0, z); the output layer is affine with one unit.
struct MlpModel {
    MlpConfig config;
    std::vector<linalg::Mat> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_dim() const { return weights.empty() ? 0 : weights.front().cols; }

    std::string to_json_string() const;
    static MlpModel from_json_string(const std::string& text);
};

/// Weights uniform in +-sqrt(6 / fan_in), biases uniform in +-1/sqrt(fan_in),
/// drawn in layer order from the seeded generator.
MlpModel init_mlp(std::size_t input_dim, const MlpConfig& cfg);

/// Mini-batch squared-error training with the configured optimizer. Batch
/// order reshuffles per epoch from cfg.seed; reduction order is fixed, so
/// refits are byte-identical.
MlpModel fit_mlp(const linalg::Mat& X, const std::vector<double>& y, const MlpConfig& cfg);

std::vector<double> predict_mlp(const MlpModel& model, const linalg::Mat& X);

/// Mean squared error of the model on (X, y).
double mse_loss(const MlpModel& model, const linalg::Mat& X, const std::vector<double>& y);

/// Full-batch analytic gradients of the mean squared error.
struct MlpGradients {
    std::vector<linalg::Mat> weights;
    std::vector<std::vector<double>> biases;
    double loss = 0.0;
};
MlpGradients compute_gradients(const MlpModel& model, const linalg::Mat& X,
                               const std::vector<double>& y);

/// Max over parameters of |g_analytic - g_fd| / max(1e-8, |g_analytic| +
/// |g_fd|), with central differences at h = 1e-5. Intended for <= 10 rows.
double grad_check(const MlpModel& model, const linalg::Mat& X_small,
                  const std::vector<double>& y_small);

}  // namespace smp::mlp

#endif
