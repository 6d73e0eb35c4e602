#include "scoutnet/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "scoutnet/errors.hpp"
#include "scoutnet/numio.hpp"

namespace scoutnet {

namespace {

using nlohmann::json;

// Logistic kept strictly inside (0,1): exp can underflow to 0 for huge
// preactivations, which would otherwise round the output to exactly 1.
double logistic(double z) {
    double out;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        out = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(z);
        out = e / (1.0 + e);
    }
    out = std::min(out, std::nextafter(1.0, 0.0));
    out = std::max(out, std::numeric_limits<double>::min());
    return out;
}

struct ForwardTrace {
    // activations[0] is the input; activations[l+1] the output of layer l.
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> preactivations;
};

void layer_forward(const LayerParams& layer, const std::vector<double>& in,
                   std::vector<double>& z) {
    const std::size_t out_n = layer.bias.size();
    const std::size_t in_n = in.size();
    z.assign(out_n, 0.0);
    for (std::size_t o = 0; o < out_n; ++o) {
        double acc = layer.bias[o];
        const double* w = layer.weights.data() + o * in_n;
        for (std::size_t i = 0; i < in_n; ++i) acc += w[i] * in[i];
        z[o] = acc;
    }
}

bool params_finite(const MlpParams& m) {
    for (const auto& layer : m.layers) {
        for (double w : layer.weights) {
            if (!std::isfinite(w)) return false;
        }
        for (double b : layer.bias) {
            if (!std::isfinite(b)) return false;
        }
    }
    return true;
}

ForwardTrace forward_trace(const MlpParams& m, const std::vector<double>& x) {
    ForwardTrace t;
    t.activations.push_back(x);
    const std::size_t n_layers = m.layers.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::vector<double> z;
        layer_forward(m.layers[l], t.activations.back(), z);
        t.preactivations.push_back(z);
        std::vector<double> a(z.size());
        if (l + 1 == n_layers) {
            a[0] = logistic(z[0]);
        } else {
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = std::max(0.0, z[i]);
        }
        t.activations.push_back(std::move(a));
    }
    return t;
}

json class_weights_to_json(const ClassWeights& w) {
    json obj = json::object();
    for (int i = 0; i < kClassCount; ++i) {
        if (w.present[i]) obj[format_double(kClassValues[i])] = w.p[i];
    }
    return obj;
}

ClassWeights class_weights_from_json(const json& obj) {
    ClassWeights w;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        auto label = parse_double(it.key());
        if (!label || !is_class_value(*label)) {
            throw DataError("class_weights: bad label key \"" + it.key() + "\"");
        }
        int idx = class_index(*label);
        w.present[idx] = true;
        w.p[idx] = it.value().get<double>();
    }
    return w;
}

json train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["shuffle_seed"] = cfg.shuffle_seed;
    j["learning_rate"] = cfg.learning_rate;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["epsilon"] = cfg.epsilon;
    j["weight_decay"] = cfg.weight_decay;
    json loss;
    loss["kind"] = "huber";
    loss["delta"] = cfg.loss.delta;
    loss["class_weights"] =
        cfg.loss.class_weights ? class_weights_to_json(*cfg.loss.class_weights)
                               : json(nullptr);
    j["loss"] = std::move(loss);
    return j;
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.epochs = j.at("epochs").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.weight_decay = j.at("weight_decay").get<double>();
    const auto& loss = j.at("loss");
    if (loss.at("kind").get<std::string>() != "huber") {
        throw DataError("unsupported loss kind in model file");
    }
    cfg.loss.delta = loss.at("delta").get<double>();
    if (!loss.at("class_weights").is_null()) {
        cfg.loss.class_weights = class_weights_from_json(loss.at("class_weights"));
    }
    return cfg;
}

json params_to_json(const MlpParams& m) {
    json j;
    json spec;
    spec["layer_sizes"] = m.spec.layer_sizes;
    spec["seed"] = m.spec.seed;
    spec["feature_mode"] = feature_mode_to_string(m.spec.feature_mode);
    j["spec"] = std::move(spec);
    json norm;
    norm["min"] = m.normalizer.min;
    norm["max"] = m.normalizer.max;
    norm["fitted_on"] = m.normalizer.fitted_on;
    j["normalizer"] = std::move(norm);
    json layers = json::array();
    for (const auto& l : m.layers) {
        json layer;
        layer["weights"] = l.weights;
        layer["bias"] = l.bias;
        layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
    return j;
}

MlpParams params_from_json(const json& j) {
    MlpParams m;
    const auto& spec = j.at("spec");
    m.spec.layer_sizes = spec.at("layer_sizes").get<std::vector<int>>();
    m.spec.seed = spec.at("seed").get<std::uint64_t>();
    auto mode = feature_mode_from_string(spec.at("feature_mode").get<std::string>());
    if (!mode) throw DataError("bad feature_mode in model file");
    m.spec.feature_mode = *mode;
    const auto& norm = j.at("normalizer");
    m.normalizer.min = norm.at("min").get<std::vector<double>>();
    m.normalizer.max = norm.at("max").get<std::vector<double>>();
    m.normalizer.fitted_on = norm.value("fitted_on", std::size_t{1});
    for (const auto& layer : j.at("layers")) {
        LayerParams l;
        l.weights = layer.at("weights").get<std::vector<double>>();
        l.bias = layer.at("bias").get<std::vector<double>>();
        m.layers.push_back(std::move(l));
    }
    m.spec.validate();
    const auto& sizes = m.spec.layer_sizes;
    if (m.layers.size() + 1 != sizes.size()) throw DataError("layer count mismatch in model file");
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const std::size_t in_n = static_cast<std::size_t>(sizes[l]);
        const std::size_t out_n = static_cast<std::size_t>(sizes[l + 1]);
        if (m.layers[l].weights.size() != in_n * out_n || m.layers[l].bias.size() != out_n) {
            throw DataError("layer " + std::to_string(l) + " shape mismatch in model file");
        }
    }
    return m;
}

}  // namespace

void MlpSpec::validate() const {
    if (layer_sizes.size() < 3) {
        throw ConfigError("MlpSpec needs input, at least one hidden layer, and output");
    }
    for (int s : layer_sizes) {
        if (s < 1) throw ConfigError("MlpSpec layer sizes must be positive");
    }
    if (layer_sizes.back() != 1) throw ConfigError("MlpSpec output size must be 1");
}

void LossConfig::validate() const {
    if (!(delta > 0.0)) throw ConfigError("Huber delta must be positive");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    loss.validate();
}

ClassWeights ClassWeights::from_labels(const std::vector<double>& labels) {
    if (labels.empty()) throw DataError("ClassWeights: no labels");
    ClassWeights w;
    std::array<std::size_t, kClassCount> counts = {0, 0, 0, 0};
    for (double l : labels) counts[class_index(l)]++;
    for (int i = 0; i < kClassCount; ++i) {
        if (counts[i] > 0) {
            w.present[i] = true;
            w.p[i] = static_cast<double>(counts[i]) / static_cast<double>(labels.size());
        }
    }
    return w;
}

double ClassWeights::frequency_of(double label) const {
    int idx = class_index(label);
    if (!present[idx]) {
        throw DataError("no class weight for label " + format_double(label));
    }
    return p[idx];
}

MlpParams init_params(const MlpSpec& spec, const Normalizer& normalizer) {
    spec.validate();
    MlpParams m;
    m.spec = spec;
    m.normalizer = normalizer;
    std::mt19937_64 rng(spec.seed);
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
        const int fan_in = spec.layer_sizes[l];
        const int fan_out = spec.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        LayerParams layer;
        layer.weights.resize(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& w : layer.weights) w = dist(rng);
        layer.bias.assign(fan_out, 0.0);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

double forward(const MlpParams& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.input_size()) {
        throw DataError("forward: expected input size " + std::to_string(m.input_size()) +
                        ", got " + std::to_string(x.size()));
    }
    std::vector<double> a = x;
    std::vector<double> z;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        layer_forward(m.layers[l], a, z);
        if (l + 1 == m.layers.size()) return logistic(z[0]);
        a.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) a[i] = std::max(0.0, z[i]);
    }
    throw ConfigError("forward: model has no layers");
}

double huber(double pred, double target, double delta) {
    const double r = pred - target;
    const double ar = std::abs(r);
    if (ar <= delta) return 0.5 * r * r;
    return delta * (ar - 0.5 * delta);
}

double huber_derivative(double residual, double delta) {
    if (std::abs(residual) <= delta) return residual;
    return residual > 0.0 ? delta : -delta;
}

double weighted_batch_loss(const std::vector<double>& preds,
                           const std::vector<double>& targets,
                           const std::optional<ClassWeights>& weights, double delta) {
    if (preds.size() != targets.size()) {
        throw DataError("weighted_batch_loss: length mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        double l = huber(preds[i], targets[i], delta);
        if (weights) l /= weights->frequency_of(targets[i]);
        sum += l;
    }
    return sum;
}

Gradients backward(const MlpParams& m, const std::vector<Sample>& batch,
                   const LossConfig& loss, double* batch_loss) {
    if (batch.empty()) throw DataError("backward: empty batch");
    loss.validate();

    Gradients grads(m.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        grads[l].weights.assign(m.layers[l].weights.size(), 0.0);
        grads[l].bias.assign(m.layers[l].bias.size(), 0.0);
    }

    double total_loss = 0.0;
    for (const auto& sample : batch) {
        ForwardTrace t = forward_trace(m, sample.x);
        const double pred = t.activations.back()[0];
        const double r = pred - sample.target;
        double w = 1.0;
        if (loss.class_weights) w = 1.0 / loss.class_weights->frequency_of(sample.target);
        total_loss += w * huber(pred, sample.target, loss.delta);

        // dL/dz at the logistic output unit.
        std::vector<double> dz(1);
        dz[0] = w * huber_derivative(r, loss.delta) * pred * (1.0 - pred);

        for (std::size_t li = m.layers.size(); li-- > 0;) {
            const auto& layer = m.layers[li];
            const auto& a_in = t.activations[li];
            const std::size_t out_n = layer.bias.size();
            const std::size_t in_n = a_in.size();
            auto& g = grads[li];
            for (std::size_t o = 0; o < out_n; ++o) {
                g.bias[o] += dz[o];
                double* gw = g.weights.data() + o * in_n;
                for (std::size_t i = 0; i < in_n; ++i) gw[i] += dz[o] * a_in[i];
            }
            if (li == 0) break;
            std::vector<double> dz_prev(in_n, 0.0);
            for (std::size_t o = 0; o < out_n; ++o) {
                const double* wrow = layer.weights.data() + o * in_n;
                for (std::size_t i = 0; i < in_n; ++i) dz_prev[i] += wrow[i] * dz[o];
            }
            const auto& z_prev = t.preactivations[li - 1];
            for (std::size_t i = 0; i < in_n; ++i) {
                if (z_prev[i] <= 0.0) dz_prev[i] = 0.0;  // ReLU gate
            }
            dz = std::move(dz_prev);
        }
    }
    if (batch_loss) *batch_loss = total_loss;
    return grads;
}

OptimizerState OptimizerState::for_params(const MlpParams& params,
                                          const TrainConfig& cfg) {
    OptimizerState s;
    s.learning_rate = cfg.learning_rate;
    s.beta1 = cfg.beta1;
    s.beta2 = cfg.beta2;
    s.epsilon = cfg.epsilon;
    s.weight_decay = cfg.weight_decay;
    for (const auto& l : params.layers) {
        LayerParams zero;
        zero.weights.assign(l.weights.size(), 0.0);
        zero.bias.assign(l.bias.size(), 0.0);
        s.m.push_back(zero);
        s.v.push_back(std::move(zero));
    }
    return s;
}

void optimizer_step(MlpParams& params, const Gradients& grads, OptimizerState& state) {
    if (grads.size() != params.layers.size()) {
        throw ConfigError("optimizer_step: gradient/parameter layer mismatch");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));

    // Both the moment step and the decoupled decay read the pre-update
    // parameter: theta' = theta - lr*m_hat/(sqrt(v_hat)+eps) - lr*wd*theta.
    auto update = [&](double& theta, double g, double& m, double& v, bool decay) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        double step = state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        if (decay) step += state.learning_rate * state.weight_decay * theta;
        theta -= step;
    };

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            update(layer.weights[i], grads[l].weights[i], state.m[l].weights[i],
                   state.v[l].weights[i], true);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            update(layer.bias[i], grads[l].bias[i], state.m[l].bias[i],
                   state.v[l].bias[i], false);
        }
    }
}

TrainResult train(const MlpSpec& spec, const Normalizer& normalizer,
                  const std::vector<Sample>& data, const TrainConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (data.empty()) throw DataError("train: no training data");
    for (const auto& s : data) {
        if (static_cast<int>(s.x.size()) != spec.layer_sizes.front()) {
            throw DataError("train: feature length " + std::to_string(s.x.size()) +
                            " does not match spec input size " +
                            std::to_string(spec.layer_sizes.front()));
        }
    }

    TrainResult result;
    result.params = init_params(spec, normalizer);
    result.config = cfg;
    OptimizerState state = OptimizerState::for_params(result.params, cfg);

    std::mt19937_64 shuffle_rng(cfg.shuffle_seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t n = data.size();
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    std::vector<Sample> batch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += bs, ++batch_index) {
            const std::size_t stop = std::min(n, start + bs);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);
            double batch_loss = 0.0;
            Gradients grads = backward(result.params, batch, cfg.loss, &batch_loss);
            if (!std::isfinite(batch_loss)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
            }
            optimizer_step(result.params, grads, state);
            // The saturating activations keep the loss finite even when NaNs
            // enter through the data, so corruption surfaces in the weights.
            if (!params_finite(result.params)) {
                throw NumericError("non-finite parameters at epoch " +
                                   std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index));
            }
            epoch_sum += batch_loss;
        }
        result.loss_history.push_back(epoch_sum / static_cast<double>(n));
    }
    return result;
}

std::string model_to_json(const MlpParams& params, const TrainConfig& cfg) {
    json j = params_to_json(params);
    j["schema_version"] = "1";
    j["train_config"] = train_config_to_json(cfg);
    return j.dump(2);
}

void save_model(const MlpParams& params, const TrainConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file " + path);
    out << model_to_json(params, cfg) << '\n';
}

LoadedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
    if (j.value("schema_version", std::string{}) != "1") {
        throw DataError("unsupported model schema_version");
    }
    LoadedModel loaded;
    loaded.params = params_from_json(j);
    loaded.config = train_config_from_json(j.at("train_config"));
    return loaded;
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace scoutnet
