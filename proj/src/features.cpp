#include "scoutnet/features.hpp"

#include <algorithm>

#include "scoutnet/errors.hpp"

namespace scoutnet {

namespace {
const std::array<std::string, 3> kModeNames = {"raw", "per90", "both"};
}

const std::string& feature_mode_to_string(FeatureMode m) {
    return kModeNames[static_cast<int>(m)];
}

std::optional<FeatureMode> feature_mode_from_string(const std::string& s) {
    for (int i = 0; i < 3; ++i) {
        if (kModeNames[i] == s) return static_cast<FeatureMode>(i);
    }
    return std::nullopt;
}

int feature_length(FeatureMode m) {
    switch (m) {
        case FeatureMode::Raw: return kStatCount;
        case FeatureMode::Per90: return kPer90Count;
        case FeatureMode::Both: return kStatCount + kPer90Count;
    }
    throw ConfigError("invalid FeatureMode");
}

bool eligible(const StatVector& s, double min_minutes) {
    return s.minutes >= min_minutes;
}

std::vector<double> per90_block(const StatVector& s, double min_minutes) {
    if (!eligible(s, min_minutes)) {
        throw DataError("record excluded: minutes " + std::to_string(s.minutes) +
                        " below threshold " + std::to_string(min_minutes));
    }
    auto arr = s.as_array();
    std::vector<double> out;
    out.reserve(kPer90Count);
    const double scale = 90.0 / s.minutes;
    for (int i = 1; i < kStatCount; ++i) out.push_back(arr[i] * scale);
    return out;
}

std::vector<double> assemble_features(const StatVector& s, FeatureMode mode,
                                      double min_minutes) {
    std::vector<double> out;
    if (mode == FeatureMode::Raw || mode == FeatureMode::Both) {
        auto arr = s.as_array();
        out.assign(arr.begin(), arr.end());
    }
    if (mode == FeatureMode::Per90 || mode == FeatureMode::Both) {
        auto p90 = per90_block(s, min_minutes);
        out.insert(out.end(), p90.begin(), p90.end());
    }
    return out;
}

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DataError("fit_normalizer: no training records");
    const std::size_t width = rows.front().size();
    Normalizer n;
    n.min = rows.front();
    n.max = rows.front();
    n.fitted_on = rows.size();
    for (const auto& row : rows) {
        if (row.size() != width) {
            throw DataError("fit_normalizer: inconsistent feature lengths");
        }
        for (std::size_t i = 0; i < width; ++i) {
            n.min[i] = std::min(n.min[i], row[i]);
            n.max[i] = std::max(n.max[i], row[i]);
        }
    }
    return n;
}

std::vector<double> apply_normalizer(const Normalizer& n, const std::vector<double>& v) {
    if (v.size() != n.min.size()) {
        throw DataError("apply_normalizer: expected length " +
                        std::to_string(n.min.size()) + ", got " +
                        std::to_string(v.size()));
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double range = n.max[i] - n.min[i];
        if (range <= 0.0) {
            out[i] = 0.0;  // constant training feature
        } else {
            out[i] = std::clamp((v[i] - n.min[i]) / range, 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace scoutnet
