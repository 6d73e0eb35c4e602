#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "scoutnet/errors.hpp"
#include "scoutnet/pipeline.hpp"
#include "scoutnet/synth.hpp"

using namespace scoutnet;

namespace {

constexpr LeagueTier kTierByClass[4] = {
    LeagueTier::SecondDivisionOrNoImprovement, LeagueTier::OtherFirstDivision,
    LeagueTier::Top5to10Europe, LeagueTier::Top5};

// Small labeled dataset with the given per-class counts.
Dataset dataset_with_counts(const std::array<std::size_t, 4>& counts,
                            PositionGroup position = PositionGroup::Midfielder) {
    Dataset d;
    std::size_t id = 0;
    for (int c = 0; c < 4; ++c) {
        for (std::size_t i = 0; i < counts[c]; ++i) {
            PlayerSeasonRecord r;
            r.player_id = "p" + std::to_string(id++);
            r.position = position;
            r.season = "2020-2021";
            r.stats.minutes = 900.0;
            r.stats.goals = static_cast<double>(c);
            r.destination_tier = kTierByClass[c];
            d.records.push_back(std::move(r));
        }
    }
    return d;
}

PipelineConfig fast_config(std::uint64_t seed = 3) {
    PipelineConfig cfg;
    cfg.seed = seed;
    cfg.folds = 2;
    cfg.base_hidden = {6};
    cfg.meta_hidden = {4};
    cfg.base_train.epochs = 4;
    cfg.meta_train.epochs = 4;
    cfg.min_position_records = 10;
    return cfg;
}

SynthConfig small_synth(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_records = 240;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("100 records at 0.9 split 90/10") {
    Dataset d = dataset_with_counts({40, 30, 20, 10});
    SplitConfig cfg;
    Split s = split_dataset(d, cfg);
    CHECK(s.train.size() == 90);
    CHECK(s.test.size() == 10);
}

TEST_CASE("stratified per-class test counts are 4/3/2/1 on 40/30/20/10") {
    Dataset d = dataset_with_counts({40, 30, 20, 10});
    const auto labels = label_dataset(d);
    SplitConfig cfg;
    Split s = split_dataset(d, cfg);
    std::array<std::size_t, 4> test_counts{};
    for (std::size_t i : s.test) test_counts[class_index(labels[i])]++;
    CHECK(test_counts == std::array<std::size_t, 4>{4, 3, 2, 1});
}

TEST_CASE("splits are disjoint, exhaustive and seed-stable") {
    Dataset d = dataset_with_counts({23, 17, 11, 9});
    SplitConfig cfg;
    cfg.seed = 5;
    Split a = split_dataset(d, cfg);
    Split b = split_dataset(d, cfg);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);

    std::set<std::size_t> all(a.train.begin(), a.train.end());
    for (std::size_t i : a.test) CHECK(all.insert(i).second);  // disjoint
    CHECK(all.size() == d.size());                             // exhaustive

    cfg.seed = 6;
    Split c = split_dataset(d, cfg);
    CHECK(c.train != a.train);  // seed actually matters
}

TEST_CASE("stratified split rejects classes with fewer than 2 records") {
    Dataset d = dataset_with_counts({5, 5, 5, 1});
    SplitConfig cfg;
    CHECK_THROWS_WITH_AS(split_dataset(d, cfg), doctest::Contains("1"), DataError);
}

TEST_CASE("unlabeled data cannot be split") {
    Dataset d = dataset_with_counts({4, 4, 4, 4});
    d.records[3].destination_tier.reset();
    CHECK_THROWS_AS(split_dataset(d, SplitConfig{}), DataError);
}

TEST_CASE("train_positional trains only sufficiently populated positions") {
    Dataset d = generate(small_synth(11));
    const auto labels = label_dataset(d);
    std::vector<std::size_t> train_idx(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) train_idx[i] = i;

    PipelineConfig cfg = fast_config();
    StageWarnings warnings;
    auto models = train_positional(d, train_idx, labels, cfg, 1, /*min_records=*/60,
                                   nullptr, nullptr, &warnings);
    // Goalkeepers are 10% of 240 records: below the 60-record floor.
    CHECK(models.count(PositionGroup::Goalkeeper) == 0);
    CHECK(models.count(PositionGroup::Defender) == 1);
    REQUIRE_FALSE(warnings.messages.empty());
    CHECK(warnings.messages[0].find("Goalkeeper") != std::string::npos);
}

TEST_CASE("a single-position dataset yields a single positional model") {
    Dataset d = dataset_with_counts({30, 30, 30, 30}, PositionGroup::Defender);
    const auto labels = label_dataset(d);
    std::vector<std::size_t> train_idx(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) train_idx[i] = i;
    auto models = train_positional(d, train_idx, labels, fast_config(), 1, 10);
    CHECK(models.size() == 1);
    CHECK(models.count(PositionGroup::Defender) == 1);
}

TEST_CASE("out-of-fold outputs never come from a model that saw the record") {
    Dataset d = generate([] {
        SynthConfig cfg;
        cfg.n_records = 40;
        cfg.class_mix = {0.4, 0.25, 0.2, 0.15};
        cfg.seed = 2;
        return cfg;
    }());
    const auto labels = label_dataset(d);
    std::vector<std::size_t> train_idx(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) train_idx[i] = i;

    PipelineConfig cfg = fast_config();
    OofOutputs oof = out_of_fold_base_outputs(d, train_idx, labels, cfg);

    REQUIRE(oof.fold_of_record.size() == d.size());
    REQUIRE(oof.fold_train_members.size() == 2);
    for (std::size_t pos = 0; pos < d.size(); ++pos) {
        const int fold = oof.fold_of_record[pos];
        REQUIRE(fold >= 0);
        const auto& members = oof.fold_train_members[fold];
        CHECK(std::find(members.begin(), members.end(), pos) == members.end());
        CHECK(oof.global_out[pos] > 0.0);
        CHECK(oof.global_out[pos] < 1.0);
        CHECK(oof.positional_out[pos] > 0.0);
        CHECK(oof.positional_out[pos] < 1.0);
    }

    // Every record is scored by exactly one fold, and folds partition the set.
    std::array<std::size_t, 2> fold_sizes{};
    for (int f : oof.fold_of_record) fold_sizes[f]++;
    CHECK(fold_sizes[0] + fold_sizes[1] == d.size());
    CHECK(fold_sizes[0] + oof.fold_train_members[0].size() == d.size());
}

TEST_CASE("changing the master seed changes fold assignments and outputs") {
    Dataset d = generate(small_synth(9));
    const auto labels = label_dataset(d);
    std::vector<std::size_t> train_idx(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) train_idx[i] = i;

    PipelineConfig a_cfg = fast_config(1);
    PipelineConfig b_cfg = fast_config(2);
    OofOutputs a = out_of_fold_base_outputs(d, train_idx, labels, a_cfg);
    OofOutputs b = out_of_fold_base_outputs(d, train_idx, labels, b_cfg);
    CHECK(a.fold_of_record != b.fold_of_record);
    CHECK(a.global_out != b.global_out);
}

TEST_CASE("too many folds for the smallest class is an error") {
    Dataset d = dataset_with_counts({20, 20, 20, 3});
    const auto labels = label_dataset(d);
    std::vector<std::size_t> train_idx(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) train_idx[i] = i;
    PipelineConfig cfg = fast_config();
    cfg.folds = 5;
    CHECK_THROWS_AS(out_of_fold_base_outputs(d, train_idx, labels, cfg), DataError);
}

TEST_CASE("meta training carries no class weights, by construction") {
    Dataset d = generate(small_synth(21));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    PipelineConfig cfg = fast_config();
    StackedModel model = train_stacked(d, split.train, labels, cfg);

    for (const auto& [pos, train_cfg] : model.meta_train) {
        CHECK_FALSE(train_cfg.loss.class_weights.has_value());
    }
    // Base models do carry weights.
    CHECK(model.global_train.loss.class_weights.has_value());

    PipelineConfig bad = cfg;
    bad.meta_train.loss.class_weights = ClassWeights::from_labels({0.0, 1.0});
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("meta networks take exactly two inputs") {
    Dataset d = generate(small_synth(22));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    StackedModel model = train_stacked(d, split.train, labels, fast_config());
    for (const auto& [pos, params] : model.meta) {
        CHECK(params.input_size() == 2);
    }
}

TEST_CASE("predict falls back to the global output for uncovered positions") {
    Dataset d = generate(small_synth(23));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    PipelineConfig cfg = fast_config();
    cfg.min_position_records = 1000;  // force every positional model away
    StackedModel model = train_stacked(d, split.train, labels, cfg);
    CHECK(model.by_position.empty());

    const auto& record = d.records[split.test.front()];
    BaseOutputs base = predict_base(model, record);
    CHECK(base.positional == base.global);
    double score = predict(model, record);
    CHECK(score > 0.0);
    CHECK(score < 1.0);
    CHECK(predict(model, record) == score);  // deterministic
}

TEST_CASE("records below the minutes threshold are not scoreable") {
    Dataset d = generate(small_synth(24));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    StackedModel model = train_stacked(d, split.train, labels, fast_config());
    PlayerSeasonRecord benched = d.records[0];
    benched.stats.minutes = 30.0;
    CHECK_THROWS_WITH_AS(predict(model, benched), doctest::Contains("ineligible"),
                         DataError);
}

TEST_CASE("global meta scope shares one meta network across positions") {
    Dataset d = generate(small_synth(25));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    PipelineConfig cfg = fast_config();
    cfg.meta_scope = MetaScope::Global;
    StackedModel model = train_stacked(d, split.train, labels, cfg);
    REQUIRE(model.meta.size() == 4);
    const auto& reference = model.meta.begin()->second;
    for (const auto& [pos, params] : model.meta) CHECK(params == reference);
}

TEST_CASE("stacked model json round trips through a file") {
    Dataset d = generate(small_synth(26));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    StackedModel model = train_stacked(d, split.train, labels, fast_config());

    const std::string path = "stacked_test_tmp.json";
    save_stacked(model, path);
    StackedModel back = load_stacked(path);
    CHECK(back.global == model.global);
    CHECK(back.by_position == model.by_position);
    CHECK(back.meta == model.meta);
    CHECK(back.folds == model.folds);
    CHECK(stacked_to_json(back) == stacked_to_json(model));

    // Scores agree after the round trip.
    const auto& record = d.records[split.test.front()];
    CHECK(predict(back, record) == predict(model, record));
    std::remove(path.c_str());
}

TEST_CASE("identical configs produce byte-identical stacked models") {
    Dataset d = generate(small_synth(27));
    const auto labels = label_dataset(d);
    Split split = split_dataset(d, SplitConfig{});
    StackedModel a = train_stacked(d, split.train, labels, fast_config(9));
    StackedModel b = train_stacked(d, split.train, labels, fast_config(9));
    CHECK(stacked_to_json(a) == stacked_to_json(b));
}

TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}
