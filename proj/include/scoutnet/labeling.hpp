#pragma once

#include <array>
#include <cstddef>

#include "scoutnet/dataset.hpp"

namespace scoutnet {

struct ClassDistribution {
    std::array<std::size_t, kClassCount> counts = {0, 0, 0, 0};  // by class index
    std::size_t total = 0;
};

// Label of a record's destination tier; throws DataError when the tier is
// absent, listing the offending player_id.
double record_label(const PlayerSeasonRecord& r);

// Labels for every record in file order; throws DataError listing all
// player_ids that lack a destination tier.
std::vector<double> label_dataset(const Dataset& d);

ClassDistribution class_distribution(const std::vector<double>& labels);
ClassDistribution class_distribution(const Dataset& d);

}  // namespace scoutnet
