#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/linalg.hpp"
#include "coevo/market_data.hpp"

namespace coevo {

enum class Activation { Sigmoid, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// One hidden layer; size 0 marks the layer inactive.
struct HiddenLayer {
    int size = 0;
    Activation activation = Activation::Tanh;

    bool operator==(const HiddenLayer&) const = default;
};

/// Up to n_l hidden layers. Inactive layers are skipped when the network is built.
struct Topology {
    std::vector<HiddenLayer> layers;

    /// Active layers in order.
    std::vector<HiddenLayer> active() const;
    std::size_t active_count() const { return active().size(); }
    bool operator==(const Topology&) const = default;
};

/// Layer widths of a concrete network: inputs, active hidden layers, and the 2-unit output.
class NetworkShape {
public:
    NetworkShape(std::size_t inputs, const Topology& topology);

    std::size_t inputs() const { return widths_.front(); }
    std::size_t layer_count() const { return widths_.size() - 1; }  // weight tensors
    std::size_t fan_in(std::size_t layer) const { return widths_[layer]; }
    std::size_t fan_out(std::size_t layer) const { return widths_[layer + 1]; }
    /// Offset of tensor `layer` in the flat parameter vector; shape (fan_in+1) x fan_out, bias last row.
    std::size_t offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t parameter_count() const { return offsets_.back(); }
    /// Activation of hidden layer `layer` (layer < layer_count()-1).
    Activation activation(std::size_t layer) const { return activations_[layer]; }

private:
    std::vector<std::size_t> widths_;
    std::vector<std::size_t> offsets_;
    std::vector<Activation> activations_;
};

inline constexpr std::size_t kOutputUnits = 2;
/// Output unit 0 is "up" (label 1); unit 1 is "down" (label 0).
inline constexpr std::size_t kUpUnit = 0;

struct ScgConfig {
    int max_iterations = 200;
    double initial_lambda = 1e-6;
    double sigma = 1e-4;
    /// Stop once the training loss falls to this value.
    double loss_tolerance = 1e-6;
    /// Stop once the gradient norm falls below this value.
    double gradient_tolerance = 1e-9;
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static ScgConfig from_json(const nlohmann::json& j);
};

struct TrainingDiagnostics {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int iterations = 0;
    int accepted_steps = 0;
    /// Loss after each accepted step (first entry is the initial loss).
    std::vector<double> loss_trace;
};

struct TrainedModel {
    Topology topology;
    std::vector<std::size_t> inputs;  // catalog column indices the network reads
    Vector weights;                   // flat; see NetworkShape::offset
    TrainingDiagnostics diagnostics;

    NetworkShape shape() const { return NetworkShape(inputs.size(), topology); }
    /// Weight tensors as row-major (fan_in+1) x fan_out matrices.
    std::vector<RowMatrix> tensors() const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);
};

/// Uniform in +-sqrt(6/(fan_in+fan_out)) for weights, zero biases. Deterministic in `seed`.
Vector init_weights(const NetworkShape& shape, std::uint64_t seed);
std::vector<RowMatrix> init_weight_tensors(const Topology& topology, std::size_t inputs, std::uint64_t seed);

/// Mean cross-entropy of the softmax outputs, with gradient if requested.
double network_loss(const NetworkShape& shape, const Vector& weights, const RowMatrix& x,
                    std::span<const std::uint8_t> labels, Vector* gradient);

/// Softmax outputs, one row per pattern, columns (up, down).
RowMatrix network_outputs(const NetworkShape& shape, const Vector& weights, const RowMatrix& x);

/// Objective for the optimizer: returns loss, fills gradient when non-null.
using Objective = std::function<double(const Vector&, Vector*)>;

struct ScgResult {
    Vector weights;
    TrainingDiagnostics diagnostics;
};

/// Moller's scaled conjugate gradient. Throws TrainingError on a non-finite loss.
ScgResult scg_minimize(const Objective& objective, Vector start, const ScgConfig& cfg);

/// Trains a network whose inputs are all columns of `train` (already restricted to the feature subset).
TrainedModel scg_train(const Topology& topology, std::vector<std::size_t> inputs, const PatternSet& train,
                       const ScgConfig& cfg);

/// argmax of the two outputs; ties predict "up".
std::vector<std::uint8_t> predict(const TrainedModel& model, const PatternSet& patterns);
std::vector<std::uint8_t> labels_from_outputs(const RowMatrix& outputs);

}  // namespace coevo
