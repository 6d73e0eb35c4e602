#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scoutnet/labeling.hpp"
#include "scoutnet/netcore.hpp"

namespace scoutnet {

struct SplitConfig {
    double train_fraction = 0.9;
    std::uint64_t seed = 0;
    bool stratified = true;

    void validate() const;  // throws ConfigError
};

struct Split {
    std::vector<std::size_t> train;  // indices into the dataset, ascending
    std::vector<std::size_t> test;
};

// Disjoint, exhaustive split. Stratified by label class: per-class train
// counts are round(train_fraction * class size), clamped so both sides keep
// at least one record per class. Deterministic under seed.
Split split_dataset(const Dataset& d, const SplitConfig& cfg);

enum class MetaScope { PerPosition, Global };

const std::string& meta_scope_to_string(MetaScope s);
std::optional<MetaScope> meta_scope_from_string(const std::string& s);

struct PipelineConfig {
    FeatureMode feature_mode = FeatureMode::Both;
    double min_minutes = kDefaultMinMinutes;
    std::size_t min_position_records = 50;
    int folds = 5;
    MetaScope meta_scope = MetaScope::PerPosition;
    std::vector<int> base_hidden = {32, 16};
    std::vector<int> meta_hidden = {8};
    std::uint64_t seed = 0;  // master seed; per-model seeds derive from it
    TrainConfig base_train;  // class weights filled in per training set
    TrainConfig meta_train;  // never carries class weights

    void validate() const;
};

struct StackedModel {
    std::string schema_version = "1";
    int folds = 5;
    MetaScope meta_scope = MetaScope::PerPosition;
    PipelineConfig config;  // resolved-config echo
    MlpParams global;
    TrainConfig global_train;
    std::map<PositionGroup, MlpParams> by_position;
    std::map<PositionGroup, TrainConfig> by_position_train;
    // Under MetaScope::Global the one shared meta-network is stored under
    // every position key, so lookup stays uniform.
    std::map<PositionGroup, MlpParams> meta;
    std::map<PositionGroup, TrainConfig> meta_train;
};

struct TrainLogEntry {
    std::string stage;
    std::size_t records = 0;
    double final_loss = 0.0;
};

struct StageWarnings {
    std::vector<std::string> messages;
};

// One model over all positions, weighted loss from this split's frequencies.
MlpParams train_global(const Dataset& d, const std::vector<std::size_t>& train_idx,
                       const std::vector<double>& labels, const PipelineConfig& cfg,
                       std::uint64_t seed_stream, TrainConfig* config_out = nullptr,
                       std::vector<TrainLogEntry>* log = nullptr);

// One model per sufficiently-populated position, position-local weights.
// Under-populated positions are skipped with a warning.
std::map<PositionGroup, MlpParams> train_positional(
    const Dataset& d, const std::vector<std::size_t>& train_idx,
    const std::vector<double>& labels, const PipelineConfig& cfg,
    std::uint64_t seed_stream, std::size_t min_records,
    std::map<PositionGroup, TrainConfig>* configs_out = nullptr,
    std::vector<TrainLogEntry>* log = nullptr, StageWarnings* warnings = nullptr);

struct OofOutputs {
    // Parallel to train_idx: base-model outputs from models trained without
    // the record's fold.
    std::vector<double> global_out;
    std::vector<double> positional_out;
    std::vector<int> fold_of_record;
    // Bookkeeping for leakage audits: positions (into train_idx) each fold
    // model was trained on.
    std::vector<std::vector<std::size_t>> fold_train_members;
};

// Seeded stratified k-fold protocol; every record is scored by models whose
// training folds excluded it. folds must be >= 2 and <= the smallest class
// count within the training split.
OofOutputs out_of_fold_base_outputs(const Dataset& d,
                                    const std::vector<std::size_t>& train_idx,
                                    const std::vector<double>& labels,
                                    const PipelineConfig& cfg,
                                    std::vector<TrainLogEntry>* log = nullptr);

// Per-position meta-networks (2 inputs) trained on out-of-fold base outputs
// with plain unweighted Huber loss.
std::map<PositionGroup, MlpParams> train_meta(
    const Dataset& d, const std::vector<std::size_t>& train_idx,
    const std::vector<double>& labels, const OofOutputs& oof,
    const PipelineConfig& cfg,
    std::map<PositionGroup, TrainConfig>* configs_out = nullptr,
    std::vector<TrainLogEntry>* log = nullptr);

// Full three-stage training on the given training rows.
StackedModel train_stacked(const Dataset& d,
                           const std::vector<std::size_t>& train_idx,
                           const std::vector<double>& labels,
                           const PipelineConfig& cfg,
                           std::vector<TrainLogEntry>* log = nullptr,
                           StageWarnings* warnings = nullptr);

// Base outputs for one record: global model output and the record's own
// position's model output (global duplicated when that model is absent).
struct BaseOutputs {
    double global = 0.0;
    double positional = 0.0;
};

BaseOutputs predict_base(const StackedModel& m, const PlayerSeasonRecord& r);

// Stacked score: meta-network over the base outputs. Records below the
// minutes threshold are ineligible (DataError).
double predict(const StackedModel& m, const PlayerSeasonRecord& r);

// Stacked model file JSON ({schema_version, folds, global, by_position,
// meta, ...}); byte-stable for identical models.
std::string stacked_to_json(const StackedModel& m);
void save_stacked(const StackedModel& m, const std::string& path);
StackedModel stacked_from_json(const std::string& text);
StackedModel load_stacked(const std::string& path);

// Deterministic sub-seed derivation so every model in the pipeline owns an
// explicit seed computed from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace scoutnet
