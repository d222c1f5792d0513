#include "coevo/neural.hpp"

#include <algorithm>
#include <cmath>

#include "coevo/error.hpp"
#include "coevo/rng.hpp"

namespace coevo {

std::string to_string(Activation a) { return a == Activation::Sigmoid ? "sigmoid" : "tanh"; }

Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid" || s == "logsig") return Activation::Sigmoid;
    if (s == "tanh" || s == "tansig") return Activation::Tanh;
    throw ValidationError("unknown activation '" + s + "'");
}

std::vector<HiddenLayer> Topology::active() const {
    std::vector<HiddenLayer> out;
    for (const auto& l : layers) {
        if (l.size > 0) out.push_back(l);
    }
    return out;
}

NetworkShape::NetworkShape(std::size_t inputs, const Topology& topology) {
    if (inputs == 0) throw ValidationError("network needs at least one input");
    widths_.push_back(inputs);
    for (const auto& l : topology.active()) {
        widths_.push_back(static_cast<std::size_t>(l.size));
        activations_.push_back(l.activation);
    }
    widths_.push_back(kOutputUnits);
    offsets_.push_back(0);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        offsets_.push_back(offsets_.back() + (widths_[l] + 1) * widths_[l + 1]);
    }
}

void ScgConfig::validate() const {
    if (max_iterations < 0) throw ValidationError("SCG iteration cap must be non-negative");
    if (!(initial_lambda > 0) || !(sigma > 0)) throw ValidationError("SCG lambda and sigma must be positive");
    if (loss_tolerance < 0 || gradient_tolerance < 0) throw ValidationError("SCG tolerances must be non-negative");
}

nlohmann::json ScgConfig::to_json() const {
    return {{"max_iterations", max_iterations}, {"initial_lambda", initial_lambda}, {"sigma", sigma},
            {"loss_tolerance", loss_tolerance}, {"gradient_tolerance", gradient_tolerance}, {"seed", seed}};
}

ScgConfig ScgConfig::from_json(const nlohmann::json& j) {
    ScgConfig c;
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.initial_lambda = j.value("initial_lambda", c.initial_lambda);
    c.sigma = j.value("sigma", c.sigma);
    c.loss_tolerance = j.value("loss_tolerance", c.loss_tolerance);
    c.gradient_tolerance = j.value("gradient_tolerance", c.gradient_tolerance);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

Vector init_weights(const NetworkShape& shape, std::uint64_t seed) {
    Vector w = Vector::Zero(static_cast<Eigen::Index>(shape.parameter_count()));
    Rng rng(seed);
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const auto fi = shape.fan_in(l), fo = shape.fan_out(l);
        const double bound = std::sqrt(6.0 / static_cast<double>(fi + fo));
        const auto off = shape.offset(l);
        for (std::size_t k = 0; k < fi * fo; ++k) {
            w[static_cast<Eigen::Index>(off + k)] = rng.uniform(-bound, bound);
        }
    }
    return w;
}

namespace {

std::vector<RowMatrix> split_tensors(const NetworkShape& shape, const Vector& w) {
    std::vector<RowMatrix> out;
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const auto rows = static_cast<Eigen::Index>(shape.fan_in(l) + 1);
        const auto cols = static_cast<Eigen::Index>(shape.fan_out(l));
        out.emplace_back(Eigen::Map<const RowMatrix>(w.data() + shape.offset(l), rows, cols));
    }
    return out;
}

void activate(RowMatrix& z, Activation a) {
    if (a == Activation::Tanh) {
        // 2 sigmoid(2z) - 1; Eigen vectorizes exp but not tanh for doubles.
        z = 2.0 * (1.0 + (-2.0 * z.array()).exp()).inverse() - 1.0;
    } else {
        z = (1.0 + (-z.array()).exp()).inverse();
    }
}

// Pre-activation of the output layer plus post-activations of hidden layers.
struct ForwardPass {
    std::vector<RowMatrix> hidden;
    RowMatrix logits;
};

ForwardPass forward(const NetworkShape& shape, const Vector& w, const RowMatrix& x) {
    if (static_cast<std::size_t>(x.cols()) != shape.inputs()) {
        throw ValidationError("network expects " + std::to_string(shape.inputs()) + " inputs, got " +
                              std::to_string(x.cols()));
    }
    ForwardPass fp;
    fp.hidden.reserve(shape.layer_count());
    const RowMatrix* in = &x;
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const auto fi = static_cast<Eigen::Index>(shape.fan_in(l));
        const auto fo = static_cast<Eigen::Index>(shape.fan_out(l));
        const double* base = w.data() + shape.offset(l);
        Eigen::Map<const RowMatrix> weights(base, fi, fo);
        Eigen::Map<const Eigen::RowVectorXd> bias(base + fi * fo, fo);
        RowMatrix z(in->rows(), fo);
        z.noalias() = (*in) * weights;
        z.rowwise() += bias;
        if (l + 1 < shape.layer_count()) {
            activate(z, shape.activation(l));
            fp.hidden.push_back(std::move(z));
            in = &fp.hidden.back();
        } else {
            fp.logits = std::move(z);
        }
    }
    return fp;
}

}  // namespace

std::vector<RowMatrix> TrainedModel::tensors() const { return split_tensors(shape(), weights); }

std::vector<RowMatrix> init_weight_tensors(const Topology& topology, std::size_t inputs, std::uint64_t seed) {
    const NetworkShape shape(inputs, topology);
    return split_tensors(shape, init_weights(shape, seed));
}

RowMatrix network_outputs(const NetworkShape& shape, const Vector& w, const RowMatrix& x) {
    auto fp = forward(shape, w, x);
    RowMatrix& z = fp.logits;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        const double s = (z.row(i).array() - m).exp().sum();
        z.row(i) = ((z.row(i).array() - m).exp() / s).matrix();
    }
    return z;
}

double network_loss(const NetworkShape& shape, const Vector& w, const RowMatrix& x,
                    std::span<const std::uint8_t> labels, Vector* gradient) {
    const auto n = x.rows();
    if (static_cast<std::size_t>(n) != labels.size()) throw ValidationError("label count mismatch");
    if (n == 0) throw ValidationError("cannot evaluate loss on an empty pattern set");
    auto fp = forward(shape, w, x);
    RowMatrix& z = fp.logits;
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z0 = z(i, 0), z1 = z(i, 1);
        const double m = std::max(z0, z1);
        const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
        const Eigen::Index target = labels[static_cast<std::size_t>(i)] ? kUpUnit : 1 - kUpUnit;
        loss += lse - z(i, target);
        if (gradient) {
            // dL/dz = (softmax - onehot) / n, written over the logits.
            z(i, 0) = std::exp(z0 - lse) * inv_n;
            z(i, 1) = std::exp(z1 - lse) * inv_n;
            z(i, target) -= inv_n;
        }
    }
    loss *= inv_n;
    if (!gradient) return loss;

    gradient->resize(static_cast<Eigen::Index>(shape.parameter_count()));
    RowMatrix delta = std::move(z);
    for (std::size_t l = shape.layer_count(); l-- > 0;) {
        const auto fi = static_cast<Eigen::Index>(shape.fan_in(l));
        const auto fo = static_cast<Eigen::Index>(shape.fan_out(l));
        const RowMatrix& prev = l == 0 ? x : fp.hidden[l - 1];
        double* gbase = gradient->data() + shape.offset(l);
        Eigen::Map<RowMatrix> gw(gbase, fi, fo);
        Eigen::Map<Eigen::RowVectorXd> gb(gbase + fi * fo, fo);
        gw.noalias() = prev.transpose() * delta;
        gb = delta.colwise().sum();
        if (l == 0) break;
        Eigen::Map<const RowMatrix> weights(w.data() + shape.offset(l), fi, fo);
        RowMatrix back(n, fi);
        back.noalias() = delta * weights.transpose();
        if (shape.activation(l - 1) == Activation::Tanh) {
            back.array() *= 1.0 - prev.array().square();
        } else {
            back.array() *= prev.array() * (1.0 - prev.array());
        }
        delta = std::move(back);
    }
    return loss;
}

ScgResult scg_minimize(const Objective& objective, Vector w, const ScgConfig& cfg) {
    cfg.validate();
    constexpr double kLambdaMin = 1e-15;
    constexpr double kLambdaMax = 1e100;
    const auto nparams = w.size();

    ScgResult res;
    auto& diag = res.diagnostics;
    Vector grad;
    double f = objective(w, &grad);
    if (!std::isfinite(f)) throw TrainingError("non-finite initial loss");
    diag.initial_loss = f;
    diag.loss_trace.push_back(f);

    Vector d = -grad;
    Vector grad_new = grad, grad_plus, grad_trial;
    double lambda = cfg.initial_lambda;
    bool success = true;
    double mu = 0.0, kappa = 0.0, theta = 0.0;
    int since_restart = 0;

    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        if (f <= cfg.loss_tolerance || grad_new.norm() < cfg.gradient_tolerance || nparams == 0) break;
        if (success) {
            mu = d.dot(grad_new);
            if (mu >= 0) {
                d = -grad_new;
                mu = d.dot(grad_new);
            }
            kappa = d.squaredNorm();
            if (kappa == 0.0) break;
            const double sigma = cfg.sigma / std::sqrt(kappa);
            objective(w + sigma * d, &grad_plus);
            theta = d.dot(grad_plus - grad_new) / sigma;
        }
        double delta = theta + lambda * kappa;
        if (delta <= 0) {
            delta = lambda * kappa;
            lambda -= theta / kappa;
        }
        const double alpha = -mu / delta;
        Vector w_trial = w + alpha * d;
        const double f_trial = objective(w_trial, &grad_trial);
        if (!std::isfinite(f_trial) || !std::isfinite(alpha)) {
            throw TrainingError("non-finite loss during scaled conjugate gradient step " + std::to_string(it));
        }
        const double big_delta = 2.0 * (f_trial - f) / (alpha * mu);
        if (big_delta >= 0 && f_trial <= f) {
            success = true;
            w = std::move(w_trial);
            f = f_trial;
            ++diag.accepted_steps;
            diag.loss_trace.push_back(f);
        } else {
            success = false;
        }
        if (big_delta < 0.25) lambda = std::min(4.0 * lambda, kLambdaMax);
        if (big_delta > 0.75) lambda = std::max(0.5 * lambda, kLambdaMin);

        if (success) {
            const Vector grad_old = std::move(grad_new);
            grad_new = grad_trial;
            if (++since_restart >= nparams) {
                d = -grad_new;
                since_restart = 0;
            } else {
                const double gamma = (grad_old - grad_new).dot(grad_new) / mu;
                d = gamma * d - grad_new;
            }
        }
    }
    diag.iterations = it;
    diag.final_loss = f;
    res.weights = std::move(w);
    return res;
}

TrainedModel scg_train(const Topology& topology, std::vector<std::size_t> inputs, const PatternSet& train,
                       const ScgConfig& cfg) {
    if (train.empty()) throw ValidationError("cannot train on an empty pattern set");
    if (inputs.size() != train.feature_count()) {
        throw ValidationError("training set has " + std::to_string(train.feature_count()) + " columns for " +
                              std::to_string(inputs.size()) + " inputs");
    }
    TrainedModel model;
    model.topology = topology;
    model.inputs = std::move(inputs);
    const NetworkShape shape = model.shape();
    const auto& x = train.features;
    const auto& y = train.labels;
    auto objective = [&](const Vector& w, Vector* g) { return network_loss(shape, w, x, y, g); };
    auto res = scg_minimize(objective, init_weights(shape, cfg.seed), cfg);
    model.weights = std::move(res.weights);
    model.diagnostics = std::move(res.diagnostics);
    return model;
}

std::vector<std::uint8_t> labels_from_outputs(const RowMatrix& outputs) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(outputs.rows()));
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = outputs(i, kUpUnit) >= outputs(i, 1 - kUpUnit) ? 1 : 0;
    }
    return out;
}

std::vector<std::uint8_t> predict(const TrainedModel& model, const PatternSet& patterns) {
    if (patterns.feature_count() != model.inputs.size()) {
        throw ValidationError("model expects " + std::to_string(model.inputs.size()) + " features, got " +
                              std::to_string(patterns.feature_count()));
    }
    if (patterns.empty()) return {};
    return labels_from_outputs(network_outputs(model.shape(), model.weights, patterns.features));
}

nlohmann::json TrainedModel::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : topology.layers) layers.push_back({{"size", l.size}, {"activation", to_string(l.activation)}});
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : tensors()) {
        std::vector<double> values(t.data(), t.data() + t.size());
        ts.push_back({{"shape", {t.rows(), t.cols()}}, {"values", values}});
    }
    return {{"topology", layers},
            {"inputs", inputs},
            {"output_units", {"up", "down"}},
            {"tensors", ts},
            {"diagnostics",
             {{"initial_loss", diagnostics.initial_loss},
              {"final_loss", diagnostics.final_loss},
              {"iterations", diagnostics.iterations},
              {"accepted_steps", diagnostics.accepted_steps}}}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    TrainedModel m;
    for (const auto& l : j.at("topology")) {
        m.topology.layers.push_back({l.at("size").get<int>(), activation_from_string(l.at("activation"))});
    }
    m.inputs = j.at("inputs").get<std::vector<std::size_t>>();
    const NetworkShape shape = m.shape();
    m.weights.resize(static_cast<Eigen::Index>(shape.parameter_count()));
    const auto& ts = j.at("tensors");
    if (ts.size() != shape.layer_count()) throw ValidationError("weight file tensor count mismatch");
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
        const auto values = ts[l].at("values").get<std::vector<double>>();
        if (values.size() != (shape.fan_in(l) + 1) * shape.fan_out(l)) {
            throw ValidationError("weight file tensor " + std::to_string(l) + " has the wrong shape");
        }
        std::copy(values.begin(), values.end(), m.weights.data() + shape.offset(l));
    }
    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        m.diagnostics.initial_loss = d.value("initial_loss", 0.0);
        m.diagnostics.final_loss = d.value("final_loss", 0.0);
        m.diagnostics.iterations = d.value("iterations", 0);
        m.diagnostics.accepted_steps = d.value("accepted_steps", 0);
    }
    return m;
}

}  // namespace coevo
