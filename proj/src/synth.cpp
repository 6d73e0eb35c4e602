#include "scoutnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "scoutnet/errors.hpp"
#include "scoutnet/labeling.hpp"

namespace scoutnet {

namespace {

constexpr LeagueTier kTierByClass[4] = {
    LeagueTier::SecondDivisionOrNoImprovement, LeagueTier::OtherFirstDivision,
    LeagueTier::Top5to10Europe, LeagueTier::Top5};

// Largest-remainder quota so generated counts hit the mix exactly.
std::array<std::size_t, 4> quota(const std::array<double, 4>& mix, std::size_t n) {
    std::array<std::size_t, 4> counts{};
    std::array<double, 4> frac{};
    std::size_t assigned = 0;
    for (int i = 0; i < 4; ++i) {
        const double exact = mix[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        frac[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    std::array<int, 4> order = {0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (int k = 0; assigned < n; ++k) {
        counts[order[k % 4]]++;
        assigned++;
    }
    return counts;
}

struct StatPlan {
    double base;   // per-90 baseline rate
    double gain;   // added per unit latent quality when informative
    double noise;  // gaussian sigma on the rate
    // Positional baseline multipliers: GK, DF, MF, AT.
    std::array<double, 4> pos_scale;
};

// Index order matches the canonical stat order minus minutes.
const StatPlan kPlans[kStatCount - 1] = {
    /* goals               */ {0.05, 0.75, 0.07, {0.02, 0.25, 0.55, 1.6}},
    /* assists             */ {0.08, 0.00, 0.06, {0.05, 0.60, 1.20, 1.3}},
    /* passes              */ {22.0, 38.0, 6.00, {0.55, 1.00, 1.35, 0.8}},
    /* key_passes          */ {0.50, 2.40, 0.40, {0.10, 0.60, 1.30, 1.2}},
    /* tackles             */ {0.80, 2.40, 0.50, {0.10, 1.40, 1.00, 0.5}},
    /* blocks              */ {0.25, 1.40, 0.22, {1.60, 1.30, 0.50, 0.2}},
    /* interceptions       */ {0.80, 2.20, 0.50, {0.40, 1.40, 1.00, 0.4}},
    /* won_duels           */ {3.00, 5.50, 1.10, {0.40, 1.10, 1.20, 1.0}},
    /* successful_dribbles */ {0.40, 2.40, 0.40, {0.05, 0.45, 1.00, 1.5}},
    /* fouls_won           */ {0.90, 0.00, 0.35, {0.20, 0.80, 1.20, 1.3}},
    /* duels_ratio         */ {0.34, 0.34, 0.05, {1.00, 1.00, 1.00, 1.0}},
    /* dribbles_ratio      */ {0.34, 0.34, 0.05, {1.00, 1.00, 1.00, 1.0}},
    /* fouls_committed     */ {1.10, 0.00, 0.40, {0.25, 1.30, 1.10, 0.9}},
    /* yellow_cards        */ {0.15, 0.00, 0.10, {0.40, 1.40, 1.00, 0.7}},
    /* red_cards           */ {0.01, 0.00, 0.02, {0.50, 1.40, 1.00, 0.8}},
};

// Informative stat indices (into the minus-minutes order) per position group
// when errors are complementary: the signal lives in different statistics for
// each position, so neither the global nor the positional view alone covers
// every player type.
const std::vector<int> kInformative[4] = {
    /* Goalkeeper */ {5, 7, 10},       // blocks, won_duels, duels_ratio
    /* Defender   */ {4, 6},           // tackles, interceptions
    /* Midfielder */ {2, 3},           // passes, key_passes
    /* Attacker   */ {0, 8, 11},       // goals, successful_dribbles, dribbles_ratio
};

// Uniform-signal alternative: same stats carry the signal for everyone.
const std::vector<int> kUniformInformative = {0, 2, 3, 4, 6, 8, 10, 11};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void SynthConfig::validate() const {
    if (n_records < 8) throw ConfigError("synth: n_records must be >= 8");
    auto check_mix = [](const std::array<double, 4>& mix, const std::string& name) {
        double sum = 0.0;
        for (double p : mix) {
            if (p < 0.0 || p > 1.0) {
                throw ConfigError("synth: " + name + " proportions must be in [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConfigError("synth: " + name + " proportions must sum to 1");
        }
    };
    check_mix(class_mix, "class_mix");
    check_mix(position_mix, "position_mix");
    if (signal_strength < 0.0) throw ConfigError("synth: signal_strength must be >= 0");
}

Dataset generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_records;
    std::mt19937_64 rng(cfg.seed);

    auto class_counts = quota(cfg.class_mix, n);
    auto pos_counts = quota(cfg.position_mix, n);
    std::vector<int> classes, positions;
    classes.reserve(n);
    positions.reserve(n);
    for (int c = 0; c < 4; ++c) classes.insert(classes.end(), class_counts[c], c);
    for (int p = 0; p < 4; ++p) positions.insert(positions.end(), pos_counts[p], p);
    std::shuffle(classes.begin(), classes.end(), rng);
    std::shuffle(positions.begin(), positions.end(), rng);

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> minutes_dist(450.0, 3400.0);

    Dataset d;
    d.provenance.source = "synthetic seed=" + std::to_string(cfg.seed);
    d.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = classes[i];
        const int pos = positions[i];
        const double target = kClassValues[cls];

        // Latent quality, correlated with the class exactly as strongly as
        // signal_strength dictates.
        const double q =
            logistic(2.2 * cfg.signal_strength * (target - 0.45) + 0.8 * gauss(rng));

        const std::vector<int>& informative =
            cfg.complementary_errors ? kInformative[pos] : kUniformInformative;

        const double minutes = std::floor(minutes_dist(rng));
        std::array<double, kStatCount> stats{};
        stats[0] = minutes;
        for (int s = 0; s < kStatCount - 1; ++s) {
            const StatPlan& plan = kPlans[s];
            const bool inf =
                std::find(informative.begin(), informative.end(), s) != informative.end();
            double rate = plan.base * plan.pos_scale[pos];
            if (inf) rate += plan.gain * cfg.signal_strength * q;
            rate += plan.noise * gauss(rng);
            rate = std::max(0.0, rate);
            const int stat_idx = s + 1;
            if (stat_is_ratio(stat_idx)) {
                stats[stat_idx] = std::clamp(rate, 0.0, 1.0);
            } else {
                stats[stat_idx] = std::round(rate * minutes / 90.0);
            }
        }

        PlayerSeasonRecord r;
        r.player_id = "synth-" + std::to_string(100000 + i);
        r.position = static_cast<PositionGroup>(pos);
        r.season = "2020-2021";
        r.stats = StatVector::from_array(stats);
        r.destination_tier = kTierByClass[cls];
        d.records.push_back(std::move(r));
    }
    return d;
}

}  // namespace scoutnet
