#pragma once

#include <array>
#include <optional>
#include <string>

namespace scoutnet {

// Destination-league tier of a player two seasons after the statistics
// season. Ordered from strongest to weakest destination.
enum class LeagueTier {
    Top5,
    Top5to10Europe,
    OtherFirstDivision,
    SecondDivisionOrNoImprovement,
};

inline constexpr int kClassCount = 4;

// Canonical potential-label values, ascending. Class matching everywhere in
// the codebase is an exact comparison against these doubles.
inline constexpr std::array<double, kClassCount> kClassValues = {0.0, 0.33, 0.66, 1.0};

// Tier -> quantized potential label.
//   Top5 -> 1.0, Top5to10Europe -> 0.66, OtherFirstDivision -> 0.33,
//   SecondDivisionOrNoImprovement -> 0.0
double label_for_tier(LeagueTier t);

// Index into kClassValues for a canonical label value; throws DataError for
// anything that is not one of the four class values.
int class_index(double label);

// True iff the label is one of the four canonical class values.
bool is_class_value(double label);

// Wire strings used by the dataset files: "top5", "top5_10_europe",
// "other_first_division", "second_division_or_none".
const std::string& tier_to_string(LeagueTier t);
std::optional<LeagueTier> tier_from_string(const std::string& s);

}  // namespace scoutnet
