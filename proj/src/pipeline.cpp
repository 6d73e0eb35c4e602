#include "scoutnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "scoutnet/errors.hpp"
#include "scoutnet/numio.hpp"

namespace scoutnet {

namespace {

using nlohmann::json;

// Seed stream tags; every model's seed is derive_seed(master, tag) so the
// whole pipeline is a pure function of the master seed.
constexpr std::uint64_t kStreamGlobal = 1;
constexpr std::uint64_t kStreamPositional = 8;    // + position index
constexpr std::uint64_t kStreamFold = 64;         // + 16 * (fold + 1)
constexpr std::uint64_t kStreamMeta = 1024;       // + position index
constexpr std::uint64_t kStreamShuffle = 1u << 20;  // xor-ed into any of the above

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct SampleSet {
    std::vector<Sample> samples;           // normalized features + label
    std::vector<double> labels;
    std::vector<std::size_t> rows;         // positions into the caller's index list
    Normalizer normalizer;
};

// Assemble, fit and normalize features for the eligible subset of [subset]
// (positions into train_idx).
SampleSet build_samples(const Dataset& d, const std::vector<std::size_t>& train_idx,
                        const std::vector<std::size_t>& subset,
                        const std::vector<double>& labels, const PipelineConfig& cfg) {
    SampleSet out;
    std::vector<std::vector<double>> raw;
    for (std::size_t pos : subset) {
        const auto& rec = d.records[train_idx[pos]];
        if (!eligible(rec.stats, cfg.min_minutes)) continue;
        raw.push_back(assemble_features(rec.stats, cfg.feature_mode, cfg.min_minutes));
        out.labels.push_back(labels[train_idx[pos]]);
        out.rows.push_back(pos);
    }
    if (raw.empty()) return out;
    out.normalizer = fit_normalizer(raw);
    out.samples.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.samples.push_back({apply_normalizer(out.normalizer, raw[i]), out.labels[i]});
    }
    return out;
}

MlpParams train_base_model(const SampleSet& set, const PipelineConfig& cfg,
                           std::uint64_t stream, TrainConfig* config_out,
                           std::vector<TrainLogEntry>* log, const std::string& stage) {
    if (set.samples.empty()) {
        throw DataError("stage " + stage + ": no eligible training records");
    }
    MlpSpec spec;
    spec.layer_sizes.push_back(feature_length(cfg.feature_mode));
    for (int h : cfg.base_hidden) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(1);
    spec.feature_mode = cfg.feature_mode;
    spec.seed = derive_seed(cfg.seed, stream);

    TrainConfig train_cfg = cfg.base_train;
    train_cfg.shuffle_seed = derive_seed(cfg.seed, stream ^ kStreamShuffle);
    train_cfg.loss.class_weights = ClassWeights::from_labels(set.labels);

    TrainResult result = train(spec, set.normalizer, set.samples, train_cfg);
    if (config_out) *config_out = result.config;
    if (log) log->push_back({stage, set.samples.size(), result.loss_history.back()});
    return std::move(result.params);
}

std::vector<std::size_t> all_positions(std::size_t n) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

// Position-local subsets (positions into train_idx), dataset order.
std::array<std::vector<std::size_t>, 4> group_by_position(
    const Dataset& d, const std::vector<std::size_t>& train_idx) {
    std::array<std::vector<std::size_t>, 4> groups;
    for (std::size_t pos = 0; pos < train_idx.size(); ++pos) {
        groups[static_cast<int>(d.records[train_idx[pos]].position)].push_back(pos);
    }
    return groups;
}

std::vector<double> meta_inputs_for(const MlpParams& meta, double global_out,
                                    double positional_out) {
    return apply_normalizer(meta.normalizer, {global_out, positional_out});
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
    json j;
    j["feature_mode"] = feature_mode_to_string(cfg.feature_mode);
    j["min_minutes"] = cfg.min_minutes;
    j["min_position_records"] = cfg.min_position_records;
    j["folds"] = cfg.folds;
    j["meta_scope"] = meta_scope_to_string(cfg.meta_scope);
    j["base_hidden"] = cfg.base_hidden;
    j["meta_hidden"] = cfg.meta_hidden;
    j["seed"] = cfg.seed;
    auto train_json = [](const TrainConfig& t) {
        json tj;
        tj["epochs"] = t.epochs;
        tj["batch_size"] = t.batch_size;
        tj["learning_rate"] = t.learning_rate;
        tj["beta1"] = t.beta1;
        tj["beta2"] = t.beta2;
        tj["epsilon"] = t.epsilon;
        tj["weight_decay"] = t.weight_decay;
        tj["huber_delta"] = t.loss.delta;
        return tj;
    };
    j["base_train"] = train_json(cfg.base_train);
    j["meta_train"] = train_json(cfg.meta_train);
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    auto mode = feature_mode_from_string(j.at("feature_mode").get<std::string>());
    if (!mode) throw DataError("bad feature_mode in stacked model file");
    cfg.feature_mode = *mode;
    cfg.min_minutes = j.at("min_minutes").get<double>();
    cfg.min_position_records = j.at("min_position_records").get<std::size_t>();
    cfg.folds = j.at("folds").get<int>();
    auto scope = meta_scope_from_string(j.at("meta_scope").get<std::string>());
    if (!scope) throw DataError("bad meta_scope in stacked model file");
    cfg.meta_scope = *scope;
    cfg.base_hidden = j.at("base_hidden").get<std::vector<int>>();
    cfg.meta_hidden = j.at("meta_hidden").get<std::vector<int>>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    auto train_from = [](const json& tj) {
        TrainConfig t;
        t.epochs = tj.at("epochs").get<int>();
        t.batch_size = tj.at("batch_size").get<int>();
        t.learning_rate = tj.at("learning_rate").get<double>();
        t.beta1 = tj.at("beta1").get<double>();
        t.beta2 = tj.at("beta2").get<double>();
        t.epsilon = tj.at("epsilon").get<double>();
        t.weight_decay = tj.at("weight_decay").get<double>();
        t.loss.delta = tj.at("huber_delta").get<double>();
        return t;
    };
    cfg.base_train = train_from(j.at("base_train"));
    cfg.meta_train = train_from(j.at("meta_train"));
    return cfg;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream));
}

void SplitConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0,1)");
    }
}

void PipelineConfig::validate() const {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    base_train.validate();
    meta_train.validate();
    if (meta_train.loss.class_weights) {
        throw ConfigError("meta training never uses class weights");
    }
    for (int h : base_hidden) {
        if (h < 1) throw ConfigError("base hidden sizes must be positive");
    }
    for (int h : meta_hidden) {
        if (h < 1) throw ConfigError("meta hidden sizes must be positive");
    }
    if (!(min_minutes >= 0.0)) throw ConfigError("min_minutes must be >= 0");
}

Split split_dataset(const Dataset& d, const SplitConfig& cfg) {
    cfg.validate();
    const std::vector<double> labels = label_dataset(d);
    std::mt19937_64 rng(cfg.seed);
    Split split;

    auto take = [&](std::vector<std::size_t>& indices) {
        std::shuffle(indices.begin(), indices.end(), rng);
        const auto n = indices.size();
        auto train_n = static_cast<std::size_t>(
            std::llround(cfg.train_fraction * static_cast<double>(n)));
        train_n = std::clamp<std::size_t>(train_n, 1, n - 1);
        split.train.insert(split.train.end(), indices.begin(), indices.begin() + train_n);
        split.test.insert(split.test.end(), indices.begin() + train_n, indices.end());
    };

    if (cfg.stratified) {
        for (int c = 0; c < kClassCount; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (class_index(labels[i]) == c) members.push_back(i);
            }
            if (members.empty()) continue;
            if (members.size() < 2) {
                throw DataError("stratified split: class " + format_double(kClassValues[c]) +
                                " has fewer than 2 records");
            }
            take(members);
        }
    } else {
        if (d.size() < 2) throw DataError("split: need at least 2 records");
        auto indices = all_positions(d.size());
        take(indices);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

const std::string& meta_scope_to_string(MetaScope s) {
    static const std::array<std::string, 2> names = {"per_position", "global"};
    return names[static_cast<int>(s)];
}

std::optional<MetaScope> meta_scope_from_string(const std::string& s) {
    if (s == "per_position") return MetaScope::PerPosition;
    if (s == "global") return MetaScope::Global;
    return std::nullopt;
}

MlpParams train_global(const Dataset& d, const std::vector<std::size_t>& train_idx,
                       const std::vector<double>& labels, const PipelineConfig& cfg,
                       std::uint64_t seed_stream, TrainConfig* config_out,
                       std::vector<TrainLogEntry>* log) {
    SampleSet set = build_samples(d, train_idx, all_positions(train_idx.size()), labels, cfg);
    return train_base_model(set, cfg, seed_stream, config_out, log, "global");
}

std::map<PositionGroup, MlpParams> train_positional(
    const Dataset& d, const std::vector<std::size_t>& train_idx,
    const std::vector<double>& labels, const PipelineConfig& cfg,
    std::uint64_t seed_stream, std::size_t min_records,
    std::map<PositionGroup, TrainConfig>* configs_out,
    std::vector<TrainLogEntry>* log, StageWarnings* warnings) {
    std::map<PositionGroup, MlpParams> models;
    auto groups = group_by_position(d, train_idx);
    for (int p = 0; p < 4; ++p) {
        const auto position = static_cast<PositionGroup>(p);
        if (groups[p].empty()) continue;
        if (groups[p].size() < min_records) {
            if (warnings) {
                warnings->messages.push_back(
                    "position " + position_to_string(position) + " has " +
                    std::to_string(groups[p].size()) + " records (< " +
                    std::to_string(min_records) + "); no positional model trained");
            }
            continue;
        }
        SampleSet set = build_samples(d, train_idx, groups[p], labels, cfg);
        if (set.samples.size() < min_records) {
            if (warnings) {
                warnings->messages.push_back(
                    "position " + position_to_string(position) +
                    " has too few eligible records after the minutes filter; "
                    "no positional model trained");
            }
            continue;
        }
        TrainConfig echo;
        models[position] = train_base_model(
            set, cfg, seed_stream + kStreamPositional + static_cast<std::uint64_t>(p),
            &echo, log, "positional/" + position_to_string(position));
        if (configs_out) (*configs_out)[position] = echo;
    }
    return models;
}

OofOutputs out_of_fold_base_outputs(const Dataset& d,
                                    const std::vector<std::size_t>& train_idx,
                                    const std::vector<double>& labels,
                                    const PipelineConfig& cfg,
                                    std::vector<TrainLogEntry>* log) {
    if (cfg.folds < 2) throw ConfigError("out-of-fold protocol needs folds >= 2");
    const std::size_t n = train_idx.size();
    const auto folds = static_cast<std::size_t>(cfg.folds);

    // Stratified fold assignment: shuffle each class, deal round-robin.
    std::vector<int> fold_of(n, -1);
    std::mt19937_64 rng(derive_seed(cfg.seed, kStreamFold));
    for (int c = 0; c < kClassCount; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t pos = 0; pos < n; ++pos) {
            if (class_index(labels[train_idx[pos]]) == c) members.push_back(pos);
        }
        if (members.empty()) continue;
        if (members.size() < folds) {
            throw DataError("out-of-fold: class " + format_double(kClassValues[c]) +
                            " has " + std::to_string(members.size()) +
                            " records, fewer than " + std::to_string(folds) + " folds");
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold_of[members[i]] = static_cast<int>(i % folds);
        }
    }

    OofOutputs out;
    out.global_out.assign(n, 0.0);
    out.positional_out.assign(n, 0.0);
    out.fold_of_record = fold_of;
    out.fold_train_members.resize(folds);

    // Positional fold models use a threshold scaled to the fold-train
    // fraction, so folds mirror the final stage's model availability.
    const auto fold_min_records = static_cast<std::size_t>(std::max<std::int64_t>(
        2, std::llround(static_cast<double>(cfg.min_position_records) *
                        static_cast<double>(folds - 1) / static_cast<double>(folds))));

    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> holdout;
        std::vector<std::size_t> fold_train;
        for (std::size_t pos = 0; pos < n; ++pos) {
            (fold_of[pos] == static_cast<int>(f) ? holdout : fold_train).push_back(pos);
        }
        out.fold_train_members[f] = fold_train;
        if (holdout.empty()) continue;

        std::vector<std::size_t> fold_train_idx;
        for (std::size_t pos : fold_train) fold_train_idx.push_back(train_idx[pos]);

        PipelineConfig fold_cfg = cfg;  // same knobs, fold-specific seeds
        const std::uint64_t stream = kStreamFold + 16 * (f + 1);
        SampleSet set = build_samples(d, fold_train_idx, all_positions(fold_train_idx.size()),
                                      labels, fold_cfg);
        MlpParams fold_global = train_base_model(set, fold_cfg, stream, nullptr, log,
                                                 "fold" + std::to_string(f) + "/global");
        std::vector<TrainLogEntry> fold_log;
        auto fold_positional =
            train_positional(d, fold_train_idx, labels, fold_cfg, stream, fold_min_records,
                             nullptr, log ? &fold_log : nullptr, nullptr);
        if (log) {
            for (auto& entry : fold_log) {
                entry.stage = "fold" + std::to_string(f) + "/" + entry.stage;
                log->push_back(std::move(entry));
            }
        }

        for (std::size_t pos : holdout) {
            const auto& rec = d.records[train_idx[pos]];
            if (!eligible(rec.stats, cfg.min_minutes)) continue;
            auto raw = assemble_features(rec.stats, cfg.feature_mode, cfg.min_minutes);
            const double g = forward(fold_global, apply_normalizer(fold_global.normalizer, raw));
            double p = g;
            auto it = fold_positional.find(rec.position);
            if (it != fold_positional.end()) {
                p = forward(it->second, apply_normalizer(it->second.normalizer, raw));
            }
            out.global_out[pos] = g;
            out.positional_out[pos] = p;
        }
    }
    return out;
}

std::map<PositionGroup, MlpParams> train_meta(
    const Dataset& d, const std::vector<std::size_t>& train_idx,
    const std::vector<double>& labels, const OofOutputs& oof,
    const PipelineConfig& cfg, std::map<PositionGroup, TrainConfig>* configs_out,
    std::vector<TrainLogEntry>* log) {
    if (cfg.meta_train.loss.class_weights) {
        throw ConfigError("meta training never uses class weights");
    }
    MlpSpec spec;
    spec.layer_sizes.push_back(2);
    for (int h : cfg.meta_hidden) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(1);
    spec.feature_mode = cfg.feature_mode;

    auto train_one = [&](const std::vector<std::size_t>& rows, std::uint64_t stream,
                         const std::string& stage) {
        std::vector<std::vector<double>> raw;
        std::vector<double> ys;
        for (std::size_t pos : rows) {
            const auto& rec = d.records[train_idx[pos]];
            if (!eligible(rec.stats, cfg.min_minutes)) continue;
            raw.push_back({oof.global_out[pos], oof.positional_out[pos]});
            ys.push_back(labels[train_idx[pos]]);
        }
        if (raw.empty()) {
            throw DataError("stage " + stage + ": no out-of-fold rows to train on");
        }
        Normalizer norm = fit_normalizer(raw);
        std::vector<Sample> samples;
        samples.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            samples.push_back({apply_normalizer(norm, raw[i]), ys[i]});
        }
        MlpSpec meta_spec = spec;
        meta_spec.seed = derive_seed(cfg.seed, stream);
        TrainConfig train_cfg = cfg.meta_train;
        train_cfg.shuffle_seed = derive_seed(cfg.seed, stream ^ kStreamShuffle);
        train_cfg.loss.class_weights.reset();  // paper's meta stage is unweighted
        TrainResult result = train(meta_spec, norm, samples, train_cfg);
        if (log) log->push_back({stage, samples.size(), result.loss_history.back()});
        return result;
    };

    std::map<PositionGroup, MlpParams> metas;
    if (cfg.meta_scope == MetaScope::Global) {
        TrainResult result =
            train_one(all_positions(train_idx.size()), kStreamMeta, "meta/shared");
        for (PositionGroup p : kAllPositions) {
            metas[p] = result.params;
            if (configs_out) (*configs_out)[p] = result.config;
        }
        return metas;
    }
    auto groups = group_by_position(d, train_idx);
    for (int p = 0; p < 4; ++p) {
        if (groups[p].empty()) continue;
        const auto position = static_cast<PositionGroup>(p);
        TrainResult result =
            train_one(groups[p], kStreamMeta + static_cast<std::uint64_t>(p),
                      "meta/" + position_to_string(position));
        metas[position] = std::move(result.params);
        if (configs_out) (*configs_out)[position] = result.config;
    }
    return metas;
}

StackedModel train_stacked(const Dataset& d, const std::vector<std::size_t>& train_idx,
                           const std::vector<double>& labels, const PipelineConfig& cfg,
                           std::vector<TrainLogEntry>* log, StageWarnings* warnings) {
    cfg.validate();
    StackedModel model;
    model.folds = cfg.folds;
    model.meta_scope = cfg.meta_scope;
    model.config = cfg;
    model.global = train_global(d, train_idx, labels, cfg, kStreamGlobal,
                                &model.global_train, log);
    model.by_position =
        train_positional(d, train_idx, labels, cfg, kStreamGlobal,
                         cfg.min_position_records, &model.by_position_train, log, warnings);
    OofOutputs oof = out_of_fold_base_outputs(d, train_idx, labels, cfg, log);
    model.meta = train_meta(d, train_idx, labels, oof, cfg, &model.meta_train, log);
    return model;
}

BaseOutputs predict_base(const StackedModel& m, const PlayerSeasonRecord& r) {
    if (!eligible(r.stats, m.config.min_minutes)) {
        throw DataError("record " + r.player_id + " ineligible: minutes " +
                        format_double(r.stats.minutes) + " below threshold " +
                        format_double(m.config.min_minutes));
    }
    auto raw = assemble_features(r.stats, m.config.feature_mode, m.config.min_minutes);
    BaseOutputs out;
    out.global = forward(m.global, apply_normalizer(m.global.normalizer, raw));
    out.positional = out.global;  // fallback when the position has no base model
    auto it = m.by_position.find(r.position);
    if (it != m.by_position.end()) {
        out.positional = forward(it->second, apply_normalizer(it->second.normalizer, raw));
    }
    return out;
}

double predict(const StackedModel& m, const PlayerSeasonRecord& r) {
    BaseOutputs base = predict_base(m, r);
    auto it = m.meta.find(r.position);
    if (it == m.meta.end()) {
        throw DataError("no meta-network for position " + position_to_string(r.position) +
                        " (position absent from training data)");
    }
    return forward(it->second, meta_inputs_for(it->second, base.global, base.positional));
}

std::string stacked_to_json(const StackedModel& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["folds"] = m.folds;
    j["meta_scope"] = meta_scope_to_string(m.meta_scope);
    j["config"] = pipeline_config_to_json(m.config);
    j["global"] = json::parse(model_to_json(m.global, m.global_train));
    json by_pos = json::object();
    for (const auto& [pos, params] : m.by_position) {
        by_pos[position_to_string(pos)] =
            json::parse(model_to_json(params, m.by_position_train.at(pos)));
    }
    j["by_position"] = std::move(by_pos);
    json meta = json::object();
    for (const auto& [pos, params] : m.meta) {
        meta[position_to_string(pos)] =
            json::parse(model_to_json(params, m.meta_train.at(pos)));
    }
    j["meta"] = std::move(meta);
    return j.dump(2);
}

void save_stacked(const StackedModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write stacked model file " + path);
    out << stacked_to_json(m) << '\n';
}

StackedModel stacked_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed stacked model JSON: ") + e.what());
    }
    StackedModel m;
    m.schema_version = j.at("schema_version").get<std::string>();
    if (m.schema_version != "1") throw DataError("unsupported stacked model schema_version");
    m.folds = j.at("folds").get<int>();
    auto scope = meta_scope_from_string(j.at("meta_scope").get<std::string>());
    if (!scope) throw DataError("bad meta_scope in stacked model file");
    m.meta_scope = *scope;
    m.config = pipeline_config_from_json(j.at("config"));
    LoadedModel g = model_from_json(j.at("global").dump());
    m.global = std::move(g.params);
    m.global_train = g.config;
    for (const auto& [key, value] : j.at("by_position").items()) {
        auto pos = position_from_string(key);
        if (!pos) throw DataError("bad position key \"" + key + "\" in stacked model");
        LoadedModel lm = model_from_json(value.dump());
        m.by_position[*pos] = std::move(lm.params);
        m.by_position_train[*pos] = lm.config;
    }
    for (const auto& [key, value] : j.at("meta").items()) {
        auto pos = position_from_string(key);
        if (!pos) throw DataError("bad position key \"" + key + "\" in stacked model");
        LoadedModel lm = model_from_json(value.dump());
        if (lm.params.input_size() != 2) {
            throw DataError("meta model for " + key + " must have input size 2");
        }
        if (lm.config.loss.class_weights) {
            throw DataError("meta model for " + key + " carries class weights");
        }
        m.meta[*pos] = std::move(lm.params);
        m.meta_train[*pos] = lm.config;
    }
    return m;
}

StackedModel load_stacked(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open stacked model file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return stacked_from_json(buf.str());
}

}  // namespace scoutnet
