#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scoutnet/labels.hpp"

namespace scoutnet {

inline constexpr int kStatCount = 16;

// One season of raw statistics for one player. Field order is fixed and is
// the column order of the dataset files.
struct StatVector {
    double minutes = 0.0;
    double goals = 0.0;
    double assists = 0.0;
    double passes = 0.0;
    double key_passes = 0.0;
    double tackles = 0.0;
    double blocks = 0.0;
    double interceptions = 0.0;
    double won_duels = 0.0;
    double successful_dribbles = 0.0;
    double fouls_won = 0.0;
    double duels_ratio = 0.0;      // in [0,1]
    double dribbles_ratio = 0.0;   // in [0,1]
    double fouls_committed = 0.0;
    double yellow_cards = 0.0;
    double red_cards = 0.0;

    std::array<double, kStatCount> as_array() const;
    static StatVector from_array(const std::array<double, kStatCount>& a);

    bool operator==(const StatVector&) const = default;
};

// Stat names in canonical order (same order as as_array()).
const std::array<std::string, kStatCount>& stat_names();

// Index of a stat name in the canonical order, or -1.
int stat_index(const std::string& name);

// True for duels_ratio / dribbles_ratio, which live in [0,1] rather than
// being non-negative counts.
bool stat_is_ratio(int index);

enum class PositionGroup { Goalkeeper, Defender, Midfielder, Attacker };

inline constexpr std::array<PositionGroup, 4> kAllPositions = {
    PositionGroup::Goalkeeper, PositionGroup::Defender,
    PositionGroup::Midfielder, PositionGroup::Attacker};

const std::string& position_to_string(PositionGroup p);
std::optional<PositionGroup> position_from_string(const std::string& s);

struct PlayerSeasonRecord {
    std::string player_id;
    PositionGroup position = PositionGroup::Midfielder;
    std::string season;
    StatVector stats;
    std::optional<LeagueTier> destination_tier;  // present only on labeled data

    bool operator==(const PlayerSeasonRecord&) const = default;
};

struct Provenance {
    std::string source;
    std::string schema_version = "1";

    bool operator==(const Provenance&) const = default;
};

// Immutable after construction; iteration order is the file order.
struct Dataset {
    std::vector<PlayerSeasonRecord> records;
    Provenance provenance;

    std::size_t size() const { return records.size(); }
    bool labeled() const;  // true iff every record carries a destination tier
};

enum class FileFormat { Csv, Json };

// Infers Csv/Json from the file extension (.json -> Json, anything else Csv).
FileFormat format_for_path(const std::string& path);

// Parsing. Errors (missing column/key, non-numeric value, bad enum value,
// duplicate (player_id, season)) throw DataError naming the field and row.
// Missing optional numeric stats default to 0 with a warning on [warnings];
// missing player_id/position/season are errors. With enforce_invariants off,
// well-formed files load even when records break StatVector/Dataset
// invariants, so validate_dataset can list every violation.
Dataset parse_dataset(std::istream& in, FileFormat format,
                      std::vector<std::string>* warnings = nullptr,
                      bool enforce_invariants = true);
Dataset load_dataset(const std::string& path,
                     std::vector<std::string>* warnings = nullptr,
                     bool enforce_invariants = true);

void serialize_dataset(const Dataset& d, std::ostream& out, FileFormat format);
void save_dataset(const Dataset& d, const std::string& path);

struct Violation {
    std::size_t record_index = 0;
    std::string field;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

// Checks every StatVector and Dataset invariant; an empty result means the
// dataset is valid. Violations are data, not failures: this never throws.
std::vector<Violation> validate_dataset(const Dataset& d);

}  // namespace scoutnet
