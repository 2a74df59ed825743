#include "smp/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "smp/rng.hpp"

using nlohmann::json;

namespace smp::mlp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// dot product with four fixed accumulator lanes; order never depends on
// thread count or data values
double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

struct LayerShapes {
    std::vector<std::size_t> in;
    std::vector<std::size_t> out;
};

LayerShapes shapes_for(std::size_t input_dim, const MlpConfig& cfg) {
    LayerShapes s;
    std::size_t prev = input_dim;
    for (std::size_t hsize : cfg.hidden) {
        s.in.push_back(prev);
        s.out.push_back(hsize);
        prev = hsize;
    }
    s.in.push_back(prev);
    s.out.push_back(1);
    return s;
}

// activations per layer for a batch; index 0 is the input
struct ForwardPass {
    std::vector<linalg::Mat> act;  // act[0] = X, act[L] = output (batch x 1)
};

ForwardPass forward(const MlpModel& model, const linalg::Mat& X) {
    const std::size_t layers = model.weights.size();
    ForwardPass fp;
    fp.act.reserve(layers + 1);
    fp.act.push_back(X);
    for (std::size_t l = 0; l < layers; ++l) {
        const linalg::Mat& W = model.weights[l];
        const auto& b = model.biases[l];
        const linalg::Mat& A = fp.act.back();
        linalg::Mat Z(A.rows, W.rows);
        for (std::size_t i = 0; i < A.rows; ++i) {
            const double* arow = &A.a[i * A.cols];
            double* zrow = &Z.a[i * Z.cols];
            for (std::size_t o = 0; o < W.rows; ++o)
                zrow[o] = b[o] + dot(arow, &W.a[o * W.cols], W.cols);
        }
        if (l + 1 < layers)
            for (double& v : Z.a) v = v > 0.0 ? v : 0.0;
        fp.act.push_back(std::move(Z));
    }
    return fp;
}

struct Gradients {
    std::vector<linalg::Mat> dW;
    std::vector<std::vector<double>> db;
};

Gradients zero_gradients(const MlpModel& model) {
    Gradients g;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        g.dW.emplace_back(model.weights[l].rows, model.weights[l].cols);
        g.db.emplace_back(model.biases[l].size(), 0.0);
    }
    return g;
}

// Squared-error loss L = (1/B) sum (pred - y)^2 over the batch; returns L and
// fills grads.
double backward(const MlpModel& model, const ForwardPass& fp, const std::vector<double>& y,
                Gradients& grads) {
    const std::size_t layers = model.weights.size();
    const std::size_t batch = fp.act[0].rows;
    const double inv_b = 1.0 / static_cast<double>(batch);

    linalg::Mat delta(batch, 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const double diff = fp.act[layers](i, 0) - y[i];
        loss += diff * diff;
        delta(i, 0) = 2.0 * diff * inv_b;
    }
    loss *= inv_b;

    for (std::size_t l = layers; l-- > 0;) {
        const linalg::Mat& A_prev = fp.act[l];
        linalg::Mat& dW = grads.dW[l];
        auto& db = grads.db[l];
        std::fill(dW.a.begin(), dW.a.end(), 0.0);
        std::fill(db.begin(), db.end(), 0.0);

        const std::size_t out = dW.rows;
        const std::size_t in = dW.cols;
        for (std::size_t i = 0; i < batch; ++i) {
            const double* arow = &A_prev.a[i * in];
            const double* drow = &delta.a[i * out];
            for (std::size_t o = 0; o < out; ++o) {
                const double dz = drow[o];
                if (dz == 0.0) continue;
                axpy(dz, arow, &dW.a[o * in], in);
                db[o] += dz;
            }
        }

        if (l == 0) break;

        const linalg::Mat& W = model.weights[l];
        linalg::Mat next_delta(batch, in);
        for (std::size_t i = 0; i < batch; ++i) {
            double* nrow = &next_delta.a[i * in];
            const double* drow = &delta.a[i * out];
            for (std::size_t o = 0; o < out; ++o)
                if (drow[o] != 0.0) axpy(drow[o], &W.a[o * in], nrow, in);
            // rectifier derivative gates on the forward activation
            const double* arow = &A_prev.a[i * in];
            for (std::size_t k = 0; k < in; ++k)
                if (arow[k] <= 0.0) nrow[k] = 0.0;
        }
        delta = std::move(next_delta);
    }
    return loss;
}

}  // namespace

void MlpConfig::validate() const {
    if (epochs < 0) fail("mlp config: epochs must be >= 0");
    if (batch_size < 1) fail("mlp config: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) fail("mlp config: learning_rate must be positive");
    for (std::size_t h : hidden)
        if (h == 0) fail("mlp config: hidden layer sizes must be positive");
}

MlpModel init_mlp(std::size_t input_dim, const MlpConfig& cfg) {
    cfg.validate();
    if (input_dim == 0) fail("init_mlp: input dimension must be positive");
    MlpModel model;
    model.config = cfg;
    Rng rng(cfg.seed);
    const LayerShapes shapes = shapes_for(input_dim, cfg);
    for (std::size_t l = 0; l < shapes.in.size(); ++l) {
        linalg::Mat W(shapes.out[l], shapes.in[l]);
        const double scale = std::sqrt(6.0 / static_cast<double>(shapes.in[l]));
        for (double& w : W.a) w = rng.uniform(-scale, scale);
        model.weights.push_back(std::move(W));
        // nonzero bias init keeps rectifier pre-activations off the exact
        // kink, where one-sided derivatives break finite-difference checks
        const double bias_scale = 1.0 / std::sqrt(static_cast<double>(shapes.in[l]));
        std::vector<double> b(shapes.out[l]);
        for (double& v : b) v = rng.uniform(-bias_scale, bias_scale);
        model.biases.push_back(std::move(b));
    }
    return model;
}

MlpModel fit_mlp(const linalg::Mat& X, const std::vector<double>& y, const MlpConfig& cfg) {
    cfg.validate();
    if (X.rows == 0) fail("fit_mlp: empty training set");
    if (X.rows != y.size()) fail("fit_mlp: row count does not match target count");
    for (double v : y)
        if (!std::isfinite(v)) fail("fit_mlp: non-finite target");

    MlpModel model = init_mlp(X.cols, cfg);
    Rng rng(cfg.seed ^ 0x5eedba5eULL);  // batch-order stream, distinct from init

    Gradients grads = zero_gradients(model);
    Gradients m1 = zero_gradients(model);
    Gradients m2 = zero_gradients(model);
    std::uint64_t step = 0;

    std::vector<std::size_t> order(X.rows);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;

        for (std::size_t start = 0; start < X.rows; start += cfg.batch_size) {
            const std::size_t end = std::min(X.rows, start + cfg.batch_size);
            const std::size_t b = end - start;

            linalg::Mat Xb(b, X.cols);
            std::vector<double> yb(b);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t r = order[start + i];
                std::copy_n(&X.a[r * X.cols], X.cols, &Xb.a[i * X.cols]);
                yb[i] = y[r];
            }

            const ForwardPass fp = forward(model, Xb);
            epoch_loss += backward(model, fp, yb, grads);
            ++batches;

            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                auto update = [&](double& w, double g, double& m, double& v) {
                    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
                    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
                    w -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
                };
                for (std::size_t k = 0; k < model.weights[l].a.size(); ++k)
                    update(model.weights[l].a[k], grads.dW[l].a[k], m1.dW[l].a[k], m2.dW[l].a[k]);
                for (std::size_t k = 0; k < model.biases[l].size(); ++k)
                    update(model.biases[l][k], grads.db[l][k], m1.db[l][k], m2.db[l][k]);
            }
        }

        if (!std::isfinite(epoch_loss))
            fail("fit_mlp: non-finite training loss at epoch " + std::to_string(epoch));
        (void)batches;
    }
    return model;
}

std::vector<double> predict_mlp(const MlpModel& model, const linalg::Mat& X) {
    if (model.weights.empty()) fail("predict_mlp: model has no layers");
    if (X.cols != model.input_dim())
        fail("predict_mlp: feature count " + std::to_string(X.cols) +
             " does not match model input " + std::to_string(model.input_dim()));
    const ForwardPass fp = forward(model, X);
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = fp.act.back()(i, 0);
    return out;
}

double mse_loss(const MlpModel& model, const linalg::Mat& X, const std::vector<double>& y) {
    const std::vector<double> pred = predict_mlp(model, X);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return s / static_cast<double>(y.size());
}

MlpGradients compute_gradients(const MlpModel& model, const linalg::Mat& X,
                               const std::vector<double>& y) {
    if (X.rows != y.size()) fail("compute_gradients: row count mismatch");
    Gradients grads = zero_gradients(model);
    const ForwardPass fp = forward(model, X);
    MlpGradients out;
    out.loss = backward(model, fp, y, grads);
    out.weights = std::move(grads.dW);
    out.biases = std::move(grads.db);
    return out;
}

double grad_check(const MlpModel& model, const linalg::Mat& X_small,
                  const std::vector<double>& y_small) {
    if (X_small.rows != y_small.size()) fail("grad_check: row count mismatch");

    Gradients grads = zero_gradients(model);
    const ForwardPass fp = forward(model, X_small);
    backward(model, fp, y_small, grads);

    MlpModel probe = model;
    const double h = 1e-5;
    double worst = 0.0;

    auto probe_param = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = mse_loss(probe, X_small, y_small);
        param = saved - h;
        const double down = mse_loss(probe, X_small, y_small);
        param = saved;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::fabs(analytic - fd) /
                           std::max(1e-8, std::fabs(analytic) + std::fabs(fd));
        worst = std::max(worst, rel);
    };

    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
        for (std::size_t k = 0; k < probe.weights[l].a.size(); ++k)
            probe_param(probe.weights[l].a[k], grads.dW[l].a[k]);
        for (std::size_t k = 0; k < probe.biases[l].size(); ++k)
            probe_param(probe.biases[l][k], grads.db[l][k]);
    }
    return worst;
}

std::string MlpModel::to_json_string() const {
    json j;
    j["version"] = 1;
    j["kind"] = "mlp";
    j["config"] = {{"hidden", config.hidden},
                   {"epochs", config.epochs},
                   {"batch_size", config.batch_size},
                   {"learning_rate", config.learning_rate},
                   {"beta1", config.beta1},
                   {"beta2", config.beta2},
                   {"eps", config.eps},
                   {"seed", config.seed}};
    json layers = json::array();
    for (std::size_t l = 0; l < weights.size(); ++l)
        layers.push_back({{"out", weights[l].rows},
                          {"in", weights[l].cols},
                          {"weights", weights[l].a},
                          {"bias", biases[l]}});
    j["layers"] = layers;
    return j.dump() + "\n";
}

MlpModel MlpModel::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1) fail("mlp model: unsupported version");
    if (j.at("kind").get<std::string>() != "mlp") fail("mlp model: wrong model kind");
    MlpModel m;
    const json& c = j.at("config");
    m.config.hidden = c.at("hidden").get<std::vector<std::size_t>>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.batch_size = c.at("batch_size").get<std::size_t>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.beta1 = c.at("beta1").get<double>();
    m.config.beta2 = c.at("beta2").get<double>();
    m.config.eps = c.at("eps").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    for (const auto& layer : j.at("layers")) {
        linalg::Mat W;
        W.rows = layer.at("out").get<std::size_t>();
        W.cols = layer.at("in").get<std::size_t>();
        W.a = layer.at("weights").get<std::vector<double>>();
        if (W.a.size() != W.rows * W.cols) fail("mlp model: weight size mismatch");
        m.weights.push_back(std::move(W));
        m.biases.push_back(layer.at("bias").get<std::vector<double>>());
        if (m.biases.back().size() != m.weights.back().rows)
            fail("mlp model: bias size mismatch");
    }
    if (m.weights.empty()) fail("mlp model: no layers");
    return m;
}

}  // namespace smp::mlp
