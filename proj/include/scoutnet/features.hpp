#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scoutnet/dataset.hpp"

namespace scoutnet {

inline constexpr int kPer90Count = kStatCount - 1;  // minutes excluded
inline constexpr double kDefaultMinMinutes = 90.0;

// Which blocks enter the model input:
//   Raw   -> the 16 raw stats
//   Per90 -> the 15 per-90 stats
//   Both  -> raw followed by per-90 (length 31)
enum class FeatureMode { Raw, Per90, Both };

const std::string& feature_mode_to_string(FeatureMode m);
std::optional<FeatureMode> feature_mode_from_string(const std::string& s);

int feature_length(FeatureMode m);

// Per-90 rescaling: x * 90 / minutes for every non-minutes stat, in canonical
// order. Records below the minutes threshold are ineligible; the caller is
// expected to filter them out before calling (throws DataError otherwise).
std::vector<double> per90_block(const StatVector& s,
                                double min_minutes = kDefaultMinMinutes);

bool eligible(const StatVector& s, double min_minutes = kDefaultMinMinutes);

// Unnormalized model input for one record under the given mode.
std::vector<double> assemble_features(const StatVector& s, FeatureMode mode,
                                      double min_minutes = kDefaultMinMinutes);

// Per-feature min/max fitted on the training split only.
struct Normalizer {
    std::vector<double> min;
    std::vector<double> max;
    std::size_t fitted_on = 0;

    bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows);

// (x - min) / (max - min), clamped to [0,1]; constant features map to 0.
std::vector<double> apply_normalizer(const Normalizer& n,
                                     const std::vector<double>& v);

}  // namespace scoutnet
