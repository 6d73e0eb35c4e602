// scout — command-line front end for the data-scouting pipeline:
// synthetic data generation, dataset validation, stacked-model training,
// scoring, and threshold-sweep evaluation.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scoutnet/errors.hpp"
#include "scoutnet/evaluate.hpp"
#include "scoutnet/labeling.hpp"
#include "scoutnet/numio.hpp"
#include "scoutnet/pipeline.hpp"
#include "scoutnet/synth.hpp"

namespace {

using nlohmann::json;
using namespace scoutnet;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct RunConfig {
    std::uint64_t seed = 7;
    SplitConfig split;
    PipelineConfig pipeline;
    SynthConfig synth;
    std::string alpha_grid_spec = "0:0.4:0.005";
};

TrainConfig train_config_from_json_obj(const json& j, TrainConfig base) {
    if (j.contains("epochs")) base.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<int>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("beta1")) base.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) base.beta2 = j.at("beta2").get<double>();
    if (j.contains("epsilon")) base.epsilon = j.at("epsilon").get<double>();
    if (j.contains("weight_decay")) base.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("huber_delta")) base.loss.delta = j.at("huber_delta").get<double>();
    return base;
}

// Defaults <- config file <- command-line flags, in that precedence order.
// The master seed feeds every stage seed unless a stage sets its own.
RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    cfg.pipeline.seed = cfg.seed;
    cfg.split.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
    if (path.empty()) return cfg;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.pipeline.seed = cfg.seed;
        cfg.split.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
    }
    if (j.contains("feature_mode")) {
        auto m = feature_mode_from_string(j.at("feature_mode").get<std::string>());
        if (!m) throw ConfigError("config: bad feature_mode");
        cfg.pipeline.feature_mode = *m;
    }
    if (j.contains("min_minutes")) cfg.pipeline.min_minutes = j.at("min_minutes").get<double>();
    if (j.contains("min_position_records")) {
        cfg.pipeline.min_position_records = j.at("min_position_records").get<std::size_t>();
    }
    if (j.contains("folds")) cfg.pipeline.folds = j.at("folds").get<int>();
    if (j.contains("meta_scope")) {
        auto s = meta_scope_from_string(j.at("meta_scope").get<std::string>());
        if (!s) throw ConfigError("config: bad meta_scope");
        cfg.pipeline.meta_scope = *s;
    }
    if (j.contains("base_hidden")) cfg.pipeline.base_hidden = j.at("base_hidden").get<std::vector<int>>();
    if (j.contains("meta_hidden")) cfg.pipeline.meta_hidden = j.at("meta_hidden").get<std::vector<int>>();
    if (j.contains("base_train")) {
        cfg.pipeline.base_train = train_config_from_json_obj(j.at("base_train"), cfg.pipeline.base_train);
    }
    if (j.contains("meta_train")) {
        cfg.pipeline.meta_train = train_config_from_json_obj(j.at("meta_train"), cfg.pipeline.meta_train);
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        if (s.contains("train_fraction")) cfg.split.train_fraction = s.at("train_fraction").get<double>();
        if (s.contains("seed")) cfg.split.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("stratified")) cfg.split.stratified = s.at("stratified").get<bool>();
    }
    if (j.contains("alpha_grid")) cfg.alpha_grid_spec = j.at("alpha_grid").get<std::string>();
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        if (s.contains("n_records")) cfg.synth.n_records = s.at("n_records").get<std::size_t>();
        if (s.contains("class_mix")) {
            auto v = s.at("class_mix").get<std::vector<double>>();
            if (v.size() != 4) throw ConfigError("config: class_mix needs 4 proportions");
            std::copy(v.begin(), v.end(), cfg.synth.class_mix.begin());
        }
        if (s.contains("position_mix")) {
            auto v = s.at("position_mix").get<std::vector<double>>();
            if (v.size() != 4) throw ConfigError("config: position_mix needs 4 proportions");
            std::copy(v.begin(), v.end(), cfg.synth.position_mix.begin());
        }
        if (s.contains("signal_strength")) cfg.synth.signal_strength = s.at("signal_strength").get<double>();
        if (s.contains("complementary_errors")) {
            cfg.synth.complementary_errors = s.at("complementary_errors").get<bool>();
        }
        if (s.contains("seed")) cfg.synth.seed = s.at("seed").get<std::uint64_t>();
    }
    return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["feature_mode"] = feature_mode_to_string(cfg.pipeline.feature_mode);
    j["min_minutes"] = cfg.pipeline.min_minutes;
    j["min_position_records"] = cfg.pipeline.min_position_records;
    j["folds"] = cfg.pipeline.folds;
    j["meta_scope"] = meta_scope_to_string(cfg.pipeline.meta_scope);
    j["base_hidden"] = cfg.pipeline.base_hidden;
    j["meta_hidden"] = cfg.pipeline.meta_hidden;
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
    j["base_train"] = train_json(cfg.pipeline.base_train);
    j["meta_train"] = train_json(cfg.pipeline.meta_train);
    json split;
    split["train_fraction"] = cfg.split.train_fraction;
    split["seed"] = cfg.split.seed;
    split["stratified"] = cfg.split.stratified;
    j["split"] = std::move(split);
    j["alpha_grid"] = cfg.alpha_grid_spec;
    json synth;
    synth["n_records"] = cfg.synth.n_records;
    synth["class_mix"] = cfg.synth.class_mix;
    synth["position_mix"] = cfg.synth.position_mix;
    synth["signal_strength"] = cfg.synth.signal_strength;
    synth["complementary_errors"] = cfg.synth.complementary_errors;
    synth["seed"] = cfg.synth.seed;
    j["synth"] = std::move(synth);
    return j;
}

std::vector<double> parse_grid_spec(const std::string& spec) {
    std::array<double, 3> parts{};
    std::stringstream ss(spec);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ':')) {
        if (i >= 3) throw ConfigError("grid spec must be start:stop:step");
        auto v = parse_double(item);
        if (!v) throw ConfigError("grid spec: bad number \"" + item + "\"");
        parts[i++] = *v;
    }
    if (i != 3) throw ConfigError("grid spec must be start:stop:step");
    return alpha_grid(parts[0], parts[1], parts[2]);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct ScoredRecord {
    std::string player_id;
    PositionGroup position = PositionGroup::Midfielder;
    std::string season;
    double score = 0.0;
};

// Scores every eligible record; ineligible ones are skipped with a note.
std::vector<ScoredRecord> score_dataset(const StackedModel& model, const Dataset& d,
                                        const std::string& stage,
                                        std::vector<std::size_t>* kept = nullptr) {
    std::vector<ScoredRecord> out;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& r = d.records[i];
        if (!eligible(r.stats, model.config.min_minutes)) {
            skipped++;
            continue;
        }
        double score = 0.0;
        if (stage == "stacked") {
            score = predict(model, r);
        } else {
            BaseOutputs base = predict_base(model, r);
            score = stage == "global" ? base.global : base.positional;
        }
        out.push_back({r.player_id, r.position, r.season, score});
        if (kept) kept->push_back(i);
    }
    if (skipped > 0) {
        std::cerr << "note: skipped " << skipped
                  << " record(s) below the minutes threshold\n";
    }
    return out;
}

int cmd_synth(const RunConfig& cfg, const std::string& out_path) {
    cfg.synth.validate();
    Dataset d = generate(cfg.synth);
    save_dataset(d, out_path);
    std::cout << "wrote " << d.size() << " records to " << out_path << '\n';
    std::cout << "resolved config: " << run_config_to_json(cfg).dump() << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& data_path) {
    std::vector<std::string> warnings;
    Dataset d = load_dataset(data_path, &warnings, /*enforce_invariants=*/false);
    print_warnings(warnings);
    auto violations = validate_dataset(d);
    if (violations.empty()) {
        std::cout << "ok: " << d.size() << " records, no violations\n";
        return kExitOk;
    }
    for (const auto& v : violations) {
        std::cout << "record " << v.record_index << ": " << v.field << " " << v.rule
                  << '\n';
    }
    std::cout << violations.size() << " violation(s)\n";
    return kExitData;
}

int cmd_train(const RunConfig& cfg, const std::string& data_path,
              const std::string& out_path, const std::string& train_out,
              const std::string& test_out) {
    std::vector<std::string> warnings;
    Dataset d = load_dataset(data_path, &warnings);
    print_warnings(warnings);
    const std::vector<double> labels = label_dataset(d);

    Split split = split_dataset(d, cfg.split);
    std::cout << "split: " << split.train.size() << " train / " << split.test.size()
              << " test\n";

    std::vector<TrainLogEntry> log;
    StageWarnings stage_warnings;
    StackedModel model = train_stacked(d, split.train, labels, cfg.pipeline, &log,
                                       &stage_warnings);
    for (const auto& w : stage_warnings.messages) std::cerr << "warning: " << w << '\n';
    for (const auto& entry : log) {
        std::cout << "stage " << entry.stage << ": " << entry.records
                  << " records, final mean loss " << format_double(entry.final_loss)
                  << '\n';
    }
    save_stacked(model, out_path);
    std::cout << "wrote stacked model to " << out_path << '\n';

    auto subset = [&](const std::vector<std::size_t>& idx) {
        Dataset sub;
        sub.provenance = d.provenance;
        for (std::size_t i : idx) sub.records.push_back(d.records[i]);
        return sub;
    };
    if (!train_out.empty()) {
        save_dataset(subset(split.train), train_out);
        std::cout << "wrote train split to " << train_out << '\n';
    }
    if (!test_out.empty()) {
        save_dataset(subset(split.test), test_out);
        std::cout << "wrote test split to " << test_out << '\n';
    }
    std::cout << "resolved config: " << run_config_to_json(cfg).dump() << '\n';
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
    StackedModel model = load_stacked(model_path);
    std::vector<std::string> warnings;
    Dataset d = load_dataset(data_path, &warnings);
    print_warnings(warnings);

    auto scored = score_dataset(model, d, "stacked");
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.player_id != b.player_id) return a.player_id < b.player_id;
        return a.season < b.season;
    });
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write predictions file " + out_path);
    out << "player_id,position,score\n";
    for (const auto& s : scored) {
        out << s.player_id << ',' << position_to_string(s.position) << ','
            << format_double(s.score) << '\n';
    }
    std::cout << "wrote " << scored.size() << " predictions to " << out_path << '\n';
    return kExitOk;
}

std::string sweep_csv_path(const std::string& report_path) {
    auto dot = report_path.rfind('.');
    if (dot == std::string::npos) return report_path + ".sweep.csv";
    return report_path.substr(0, dot) + ".sweep.csv";
}

int cmd_evaluate(const RunConfig& cfg, const std::string& model_path,
                 const std::string& data_path, const std::string& out_path,
                 const std::string& stage, const std::string& requested_mode,
                 bool include_predictions) {
    StackedModel model = load_stacked(model_path);
    if (!requested_mode.empty()) {
        auto m = feature_mode_from_string(requested_mode);
        if (!m) throw ConfigError("bad --feature-mode value " + requested_mode);
        if (*m != model.config.feature_mode) {
            throw DataError("feature-mode mismatch: model was trained with \"" +
                            feature_mode_to_string(model.config.feature_mode) +
                            "\", requested \"" + requested_mode + "\"");
        }
    }
    std::vector<std::string> warnings;
    Dataset d = load_dataset(data_path, &warnings);
    print_warnings(warnings);

    std::vector<std::size_t> kept;
    auto scored = score_dataset(model, d, stage, &kept);
    if (scored.empty()) throw DataError("no eligible records to evaluate");

    std::vector<double> preds;
    std::vector<double> labels;
    preds.reserve(scored.size());
    for (std::size_t k = 0; k < scored.size(); ++k) {
        preds.push_back(scored[k].score);
        labels.push_back(record_label(d.records[kept[k]]));
    }

    EvaluationReport report;
    report.model_id = model_path + "#" + stage;
    report.dataset_id = data_path;
    report.alpha_grid = parse_grid_spec(cfg.alpha_grid_spec);
    report.confusion = confusion(preds, labels);
    report.class_means = class_means(preds, labels);
    report.sweep = sweep(preds, binarize(labels), report.alpha_grid);
    if (include_predictions) {
        report.predictions = preds;
        report.labels = labels;
    }
    write_report(report, out_path);
    write_sweep_csv(report.sweep, sweep_csv_path(out_path));

    std::cout << format_confusion(report.confusion) << '\n'
              << format_class_means(report.class_means) << '\n';
    std::cout << "wrote report to " << out_path << " and sweep to "
              << sweep_csv_path(out_path) << '\n';
    std::cout << "resolved config: " << run_config_to_json(cfg).dump() << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& predictions_path, const std::string& data_path,
              const std::string& grid_spec, const std::string& out_path) {
    std::ifstream in(predictions_path, std::ios::binary);
    if (!in) throw DataError("cannot open predictions file " + predictions_path);
    std::string line;
    if (!std::getline(in, line) || line != "player_id,position,score") {
        throw DataError("predictions file must start with header player_id,position,score");
    }
    std::vector<std::pair<std::string, double>> predictions;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto first = line.find(',');
        auto last = line.rfind(',');
        if (first == std::string::npos || last == first) {
            throw DataError("predictions row " + std::to_string(row) + " is malformed");
        }
        auto score = parse_double(std::string_view(line).substr(last + 1));
        if (!score) {
            throw DataError("predictions row " + std::to_string(row) + ": bad score");
        }
        predictions.emplace_back(line.substr(0, first), *score);
        ++row;
    }
    if (predictions.empty()) throw DataError("predictions file has no rows");

    Dataset d = load_dataset(data_path);
    std::map<std::string, double> label_by_player;
    for (const auto& r : d.records) {
        double label = record_label(r);
        auto [it, inserted] = label_by_player.emplace(r.player_id, label);
        if (!inserted) {
            throw DataError("player_id " + r.player_id +
                            " appears in multiple seasons; cannot join predictions "
                            "unambiguously");
        }
    }
    std::vector<double> preds;
    std::vector<bool> positives;
    for (const auto& [player_id, score] : predictions) {
        auto it = label_by_player.find(player_id);
        if (it == label_by_player.end()) {
            throw DataError("player_id " + player_id + " not present in dataset");
        }
        preds.push_back(score);
        positives.push_back(binarize(it->second));
    }
    auto points = sweep(preds, positives, parse_grid_spec(grid_spec));
    write_sweep_csv(points, out_path);
    std::cout << "wrote " << points.size() << " sweep points to " << out_path << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scout — stacked-network football data-scouting pipeline"};
    app.require_subcommand(1);

    std::string config_path, data_path, model_path, out_path;
    std::string train_out, test_out, stage = "stacked", requested_mode;
    std::string predictions_path, grid_spec;
    bool include_predictions = false;

    // Flag overrides; only applied when the user passes them.
    std::optional<std::uint64_t> flag_seed, flag_synth_seed, flag_split_seed;
    std::optional<std::size_t> flag_n;
    std::optional<double> flag_signal, flag_min_minutes, flag_train_fraction;
    std::optional<int> flag_folds, flag_epochs;
    std::optional<std::string> flag_feature_mode, flag_meta_scope, flag_grid;
    std::optional<bool> flag_complementary;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run-config file");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    add_config(synth);
    synth->add_option("--out", out_path, "output dataset file (.csv or .json)")->required();
    synth->add_option("--n", flag_n, "number of records");
    synth->add_option("--seed", flag_synth_seed, "generator seed");
    synth->add_option("--signal-strength", flag_signal, "planted signal strength");
    synth->add_flag("--complementary,!--no-complementary", flag_complementary,
                    "position-dependent informative statistics");

    CLI::App* validate = app.add_subcommand("validate", "check a dataset against the schema");
    validate->add_option("--data", data_path, "dataset file")->required();

    CLI::App* train_cmd = app.add_subcommand("train", "train the stacked model");
    add_config(train_cmd);
    train_cmd->add_option("--data", data_path, "labeled dataset file")->required();
    train_cmd->add_option("--out", out_path, "output stacked-model JSON")->required();
    train_cmd->add_option("--train-out", train_out, "write the train split here");
    train_cmd->add_option("--test-out", test_out, "write the held-out test split here");
    train_cmd->add_option("--seed", flag_seed, "master seed");
    train_cmd->add_option("--split-seed", flag_split_seed, "train/test split seed");
    train_cmd->add_option("--train-fraction", flag_train_fraction, "train fraction (0,1)");
    train_cmd->add_option("--folds", flag_folds, "out-of-fold count for stacking");
    train_cmd->add_option("--epochs", flag_epochs, "base-model epochs");
    train_cmd->add_option("--feature-mode", flag_feature_mode, "raw, per90 or both");
    train_cmd->add_option("--meta-scope", flag_meta_scope, "per_position or global");
    train_cmd->add_option("--min-minutes", flag_min_minutes, "eligibility threshold");

    CLI::App* predict_cmd = app.add_subcommand("predict", "score players with a stacked model");
    predict_cmd->add_option("--model", model_path, "stacked-model JSON")->required();
    predict_cmd->add_option("--data", data_path, "dataset file")->required();
    predict_cmd->add_option("--out", out_path, "output CSV (player_id,position,score)")->required();

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "confusion, class means and sweep");
    add_config(evaluate_cmd);
    evaluate_cmd->add_option("--model", model_path, "stacked-model JSON")->required();
    evaluate_cmd->add_option("--data", data_path, "labeled dataset file")->required();
    evaluate_cmd->add_option("--out", out_path, "output report JSON")->required();
    evaluate_cmd->add_option("--stage", stage, "stacked, global or positional")
        ->check(CLI::IsMember({"stacked", "global", "positional"}));
    evaluate_cmd->add_option("--feature-mode", requested_mode,
                             "must match the model's feature mode");
    evaluate_cmd->add_option("--grid", flag_grid, "alpha grid start:stop:step");
    evaluate_cmd->add_flag("--include-predictions", include_predictions,
                           "embed raw predictions in the report");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "threshold sweep from a predictions CSV");
    sweep_cmd->add_option("--predictions", predictions_path, "predictions CSV")->required();
    sweep_cmd->add_option("--data", data_path, "labeled dataset file")->required();
    sweep_cmd->add_option("--grid", grid_spec, "alpha grid start:stop:step")
        ->default_val("0:0.4:0.005");
    sweep_cmd->add_option("--out", out_path, "output sweep CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        if (flag_seed) {
            cfg.seed = *flag_seed;
            cfg.pipeline.seed = *flag_seed;
            cfg.split.seed = *flag_seed;
        }
        if (flag_split_seed) cfg.split.seed = *flag_split_seed;
        if (flag_train_fraction) cfg.split.train_fraction = *flag_train_fraction;
        if (flag_folds) cfg.pipeline.folds = *flag_folds;
        if (flag_epochs) cfg.pipeline.base_train.epochs = *flag_epochs;
        if (flag_min_minutes) cfg.pipeline.min_minutes = *flag_min_minutes;
        if (flag_feature_mode) {
            auto m = feature_mode_from_string(*flag_feature_mode);
            if (!m) throw ConfigError("bad --feature-mode value " + *flag_feature_mode);
            cfg.pipeline.feature_mode = *m;
        }
        if (flag_meta_scope) {
            auto s = meta_scope_from_string(*flag_meta_scope);
            if (!s) throw ConfigError("bad --meta-scope value " + *flag_meta_scope);
            cfg.pipeline.meta_scope = *s;
        }
        if (flag_grid) cfg.alpha_grid_spec = *flag_grid;
        if (flag_n) cfg.synth.n_records = *flag_n;
        if (flag_synth_seed) cfg.synth.seed = *flag_synth_seed;
        if (flag_signal) cfg.synth.signal_strength = *flag_signal;
        if (flag_complementary) cfg.synth.complementary_errors = *flag_complementary;

        if (synth->parsed()) return cmd_synth(cfg, out_path);
        if (validate->parsed()) return cmd_validate(data_path);
        if (train_cmd->parsed()) return cmd_train(cfg, data_path, out_path, train_out, test_out);
        if (predict_cmd->parsed()) return cmd_predict(model_path, data_path, out_path);
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(cfg, model_path, data_path, out_path, stage,
                                requested_mode, include_predictions);
        }
        if (sweep_cmd->parsed()) return cmd_sweep(predictions_path, data_path, grid_spec, out_path);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}
