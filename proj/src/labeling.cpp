#include "scoutnet/labeling.hpp"

#include <sstream>

#include "scoutnet/errors.hpp"

namespace scoutnet {

namespace {
const std::array<std::string, 4> kTierNames = {
    "top5", "top5_10_europe", "other_first_division", "second_division_or_none"};
}

double label_for_tier(LeagueTier t) {
    switch (t) {
        case LeagueTier::Top5: return 1.0;
        case LeagueTier::Top5to10Europe: return 0.66;
        case LeagueTier::OtherFirstDivision: return 0.33;
        case LeagueTier::SecondDivisionOrNoImprovement: return 0.0;
    }
    throw DataError("invalid LeagueTier value");
}

int class_index(double label) {
    for (int i = 0; i < kClassCount; ++i) {
        if (label == kClassValues[i]) return i;
    }
    throw DataError("label " + std::to_string(label) +
                    " is not one of the class values {0, 0.33, 0.66, 1}");
}

bool is_class_value(double label) {
    for (double v : kClassValues) {
        if (label == v) return true;
    }
    return false;
}

const std::string& tier_to_string(LeagueTier t) {
    return kTierNames[static_cast<int>(t)];
}

std::optional<LeagueTier> tier_from_string(const std::string& s) {
    for (int i = 0; i < 4; ++i) {
        if (kTierNames[i] == s) return static_cast<LeagueTier>(i);
    }
    return std::nullopt;
}

double record_label(const PlayerSeasonRecord& r) {
    if (!r.destination_tier) {
        throw DataError("record " + r.player_id + " has no destination_tier");
    }
    return label_for_tier(*r.destination_tier);
}

std::vector<double> label_dataset(const Dataset& d) {
    std::vector<std::string> missing;
    for (const auto& r : d.records) {
        if (!r.destination_tier) missing.push_back(r.player_id);
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << missing.size() << " record(s) lack destination_tier:";
        for (const auto& id : missing) msg << ' ' << id;
        throw DataError(msg.str());
    }
    std::vector<double> labels;
    labels.reserve(d.records.size());
    for (const auto& r : d.records) labels.push_back(label_for_tier(*r.destination_tier));
    return labels;
}

ClassDistribution class_distribution(const std::vector<double>& labels) {
    ClassDistribution dist;
    for (double l : labels) {
        dist.counts[class_index(l)]++;
        dist.total++;
    }
    return dist;
}

ClassDistribution class_distribution(const Dataset& d) {
    return class_distribution(label_dataset(d));
}

}  // namespace scoutnet
