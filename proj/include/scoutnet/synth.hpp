#pragma once

#include <array>
#include <cstdint>

#include "scoutnet/dataset.hpp"

namespace scoutnet {

// Seeded generator of synthetic player seasons with a planted
// quality signal, so the full pipeline can be exercised without real data.
struct SynthConfig {
    std::size_t n_records = 4000;
    // Class proportions for labels 0, 0.33, 0.66, 1.0; skewed toward 0 like
    // a real transfer market.
    std::array<double, 4> class_mix = {0.55, 0.20, 0.15, 0.10};
    // Goalkeeper, Defender, Midfielder, Attacker.
    std::array<double, 4> position_mix = {0.10, 0.35, 0.30, 0.25};
    double signal_strength = 1.0;
    // When set, the informative statistics differ by position group, so a
    // global view and a positional view fail on different players.
    bool complementary_errors = true;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

Dataset generate(const SynthConfig& cfg);

}  // namespace scoutnet
