#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scoutnet/features.hpp"
#include "scoutnet/labels.hpp"

namespace scoutnet {

// Feed-forward regressor topology. Hidden layers are rectified-linear, the
// single output unit is logistic, so predictions live in (0,1) like the
// potential labels.
struct MlpSpec {
    std::vector<int> layer_sizes;  // input, hidden..., 1
    std::uint64_t seed = 0;
    FeatureMode feature_mode = FeatureMode::Both;

    void validate() const;  // throws ConfigError
    bool operator==(const MlpSpec&) const = default;
};

struct LayerParams {
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out

    bool operator==(const LayerParams&) const = default;
};

struct MlpParams {
    MlpSpec spec;
    Normalizer normalizer;
    std::vector<LayerParams> layers;

    int input_size() const { return spec.layer_sizes.front(); }
    bool operator==(const MlpParams&) const = default;
};

// Empirical class frequencies P(k) over the training split. A sample of
// class k contributes Loss(x_k, y_k) / P(k) to the batch loss.
struct ClassWeights {
    std::array<double, kClassCount> p = {0.0, 0.0, 0.0, 0.0};
    std::array<bool, kClassCount> present = {false, false, false, false};

    static ClassWeights from_labels(const std::vector<double>& labels);
    double frequency_of(double label) const;  // throws DataError if absent

    bool operator==(const ClassWeights&) const = default;
};

struct LossConfig {
    double delta = 1.0;  // Huber transition point
    std::optional<ClassWeights> class_weights;

    void validate() const;
    bool operator==(const LossConfig&) const = default;
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t shuffle_seed = 0;
    LossConfig loss;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;

    void validate() const;  // throws ConfigError
    bool operator==(const TrainConfig&) const = default;
};

// Seeded Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
MlpParams init_params(const MlpSpec& spec, const Normalizer& normalizer);

// Forward pass on an already-normalized input. Output is strictly inside
// (0,1) for any finite parameters.
double forward(const MlpParams& m, const std::vector<double>& x);

// 0.5*r^2 for |r| <= delta, else delta*(|r| - 0.5*delta), r = pred - target.
double huber(double pred, double target, double delta);
double huber_derivative(double residual, double delta);

// Appendix-style weighted batch loss: sum_k huber(pred_k, y_k) / P(class_k).
// A plain (unweighted) sum when no weights are given.
double weighted_batch_loss(const std::vector<double>& preds,
                           const std::vector<double>& targets,
                           const std::optional<ClassWeights>& weights,
                           double delta);

struct Sample {
    std::vector<double> x;
    double target = 0.0;
};

using Gradients = std::vector<LayerParams>;

// Exact gradients of the (optionally class-weighted) batch loss for every
// weight and bias. When batch_loss is non-null it receives the loss value.
Gradients backward(const MlpParams& m, const std::vector<Sample>& batch,
                   const LossConfig& loss, double* batch_loss = nullptr);

struct OptimizerState {
    std::int64_t t = 0;
    std::vector<LayerParams> m;  // first moments
    std::vector<LayerParams> v;  // second moments
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;

    static OptimizerState for_params(const MlpParams& params,
                                     const TrainConfig& cfg);
};

// Adaptive-moment update with bias correction and decoupled weight decay
// applied directly to the weights; biases are exempt from decay.
void optimizer_step(MlpParams& params, const Gradients& grads,
                    OptimizerState& state);

struct TrainResult {
    MlpParams params;
    std::vector<double> loss_history;  // per-epoch batch-loss sum / n_records
    TrainConfig config;                // echo of the resolved config
};

// Seeded init + epochs x shuffled mini-batches of optimizer steps. Fully
// deterministic given (spec.seed, cfg.shuffle_seed). Aborts with NumericError
// naming epoch and batch if the loss stops being finite.
TrainResult train(const MlpSpec& spec, const Normalizer& normalizer,
                  const std::vector<Sample>& data, const TrainConfig& cfg);

// Model file JSON: {schema_version, spec, normalizer, layers, train_config}.
// Doubles round-trip bit-exactly.
std::string model_to_json(const MlpParams& params, const TrainConfig& cfg);
void save_model(const MlpParams& params, const TrainConfig& cfg,
                const std::string& path);
struct LoadedModel {
    MlpParams params;
    TrainConfig config;
};
LoadedModel model_from_json(const std::string& text);
LoadedModel load_model(const std::string& path);

}  // namespace scoutnet
