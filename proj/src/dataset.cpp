#include "scoutnet/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "scoutnet/errors.hpp"
#include "scoutnet/numio.hpp"

namespace scoutnet {

namespace {

using nlohmann::json;

const std::array<std::string, kStatCount> kStatNames = {
    "minutes",        "goals",          "assists",
    "passes",         "key_passes",     "tackles",
    "blocks",         "interceptions",  "won_duels",
    "successful_dribbles", "fouls_won", "duels_ratio",
    "dribbles_ratio", "fouls_committed", "yellow_cards",
    "red_cards"};

const std::array<std::string, 4> kPositionNames = {"Goalkeeper", "Defender",
                                                   "Midfielder", "Attacker"};

// Dataset file columns, in order. destination_tier is optional and encodes
// the labels; an empty value means unlabeled.
std::vector<std::string> dataset_columns() {
    std::vector<std::string> cols = {"player_id", "position", "season"};
    for (const auto& s : kStatNames) cols.push_back(s);
    cols.push_back("destination_tier");
    return cols;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// One CSV record, honoring quoted fields; returns false at end of stream.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool quoted = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(field);
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int next = in.peek();
                if (next == '"') {
                    in.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch == '\n') {
            fields.push_back(field);
            return true;
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(field);
            return true;
        } else {
            field += ch;
        }
        c = in.get();
    }
}

PositionGroup parse_position_or_throw(const std::string& s, std::size_t row) {
    auto p = position_from_string(s);
    if (!p) {
        throw DataError("row " + std::to_string(row) + ": unknown position \"" + s +
                        "\" (expected Goalkeeper/Defender/Midfielder/Attacker)");
    }
    return *p;
}

std::optional<LeagueTier> parse_tier_or_throw(const std::string& s, std::size_t row) {
    if (s.empty()) return std::nullopt;
    auto t = tier_from_string(s);
    if (!t) {
        throw DataError("row " + std::to_string(row) + ": unknown destination_tier \"" +
                        s + "\"");
    }
    return t;
}

void check_duplicates(const Dataset& d) {
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& r = d.records[i];
        if (!seen.insert({r.player_id, r.season}).second) {
            throw DataError("duplicate (player_id, season) = (" + r.player_id + ", " +
                            r.season + ") at record " + std::to_string(i));
        }
    }
}

void check_invariants(const Dataset& d) {
    auto violations = validate_dataset(d);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << violations.size() << " validation error(s); first: record "
        << violations.front().record_index << ", field " << violations.front().field
        << ": " << violations.front().rule;
    throw DataError(msg.str());
}

Dataset parse_csv(std::istream& in, std::vector<std::string>* warnings,
                  bool enforce_invariants) {
    std::vector<std::string> header;
    if (!read_csv_row(in, header)) throw DataError("empty input: missing CSV header");

    const auto expected = dataset_columns();
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (std::find(expected.begin(), expected.end(), header[i]) == expected.end()) {
            throw DataError("unknown column \"" + header[i] + "\" in CSV header");
        }
        if (!col_index.emplace(header[i], i).second) {
            throw DataError("duplicated column \"" + header[i] + "\" in CSV header");
        }
    }
    for (const auto& col : expected) {
        if (col == "destination_tier") continue;  // optional
        if (!col_index.count(col)) throw DataError("missing required column \"" + col + "\"");
    }

    Dataset d;
    std::vector<std::string> fields;
    std::size_t row = 1;  // header was row 0
    auto get = [&](const std::string& col) -> const std::string* {
        auto it = col_index.find(col);
        if (it == col_index.end() || it->second >= fields.size()) return nullptr;
        return &fields[it->second];
    };
    while (read_csv_row(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) {
            ++row;
            continue;  // blank line
        }
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        PlayerSeasonRecord r;
        const std::string* v = get("player_id");
        if (!v || v->empty())
            throw DataError("row " + std::to_string(row) + ": missing player_id");
        r.player_id = *v;
        v = get("position");
        if (!v || v->empty())
            throw DataError("row " + std::to_string(row) + ": missing position");
        r.position = parse_position_or_throw(*v, row);
        v = get("season");
        if (!v || v->empty())
            throw DataError("row " + std::to_string(row) + ": missing season");
        r.season = *v;

        std::array<double, kStatCount> stats{};
        for (int s = 0; s < kStatCount; ++s) {
            v = get(kStatNames[s]);
            if (!v || v->empty()) {
                stats[s] = 0.0;
                if (warnings) {
                    warnings->push_back("row " + std::to_string(row) + ": missing " +
                                        kStatNames[s] + ", defaulted to 0");
                }
                continue;
            }
            auto parsed = parse_double(*v);
            if (!parsed) {
                throw DataError("row " + std::to_string(row) + ": non-numeric value \"" +
                                *v + "\" in column " + kStatNames[s]);
            }
            stats[s] = *parsed;
        }
        r.stats = StatVector::from_array(stats);

        if (const std::string* t = get("destination_tier")) {
            r.destination_tier = parse_tier_or_throw(*t, row);
        }
        d.records.push_back(std::move(r));
        ++row;
    }
    if (enforce_invariants) {
        check_duplicates(d);
        check_invariants(d);
    }
    return d;
}

Dataset parse_json_text(std::istream& in, std::vector<std::string>* warnings,
                        bool enforce_invariants) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed JSON: ") + e.what());
    }

    json records;
    if (doc.is_array()) {
        records = doc;
    } else if (doc.is_object()) {
        if (doc.contains("schema_version") && doc["schema_version"] != "1") {
            throw DataError("unsupported dataset schema_version " +
                            doc["schema_version"].dump());
        }
        if (!doc.contains("records") || !doc["records"].is_array()) {
            throw DataError("dataset JSON object lacks a \"records\" array");
        }
        records = doc["records"];
    } else {
        throw DataError("dataset JSON must be an array or an object with records");
    }

    const auto expected = dataset_columns();
    Dataset d;
    std::size_t row = 0;
    for (const auto& obj : records) {
        if (!obj.is_object())
            throw DataError("record " + std::to_string(row) + " is not an object");
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::find(expected.begin(), expected.end(), it.key()) == expected.end()) {
                throw DataError("record " + std::to_string(row) + ": unknown key \"" +
                                it.key() + "\"");
            }
        }
        PlayerSeasonRecord r;
        if (!obj.contains("player_id") || !obj["player_id"].is_string() ||
            obj["player_id"].get<std::string>().empty()) {
            throw DataError("record " + std::to_string(row) + ": missing player_id");
        }
        r.player_id = obj["player_id"].get<std::string>();
        if (!obj.contains("position") || !obj["position"].is_string()) {
            throw DataError("record " + std::to_string(row) + ": missing position");
        }
        r.position = parse_position_or_throw(obj["position"].get<std::string>(), row);
        if (!obj.contains("season") || !obj["season"].is_string() ||
            obj["season"].get<std::string>().empty()) {
            throw DataError("record " + std::to_string(row) + ": missing season");
        }
        r.season = obj["season"].get<std::string>();

        std::array<double, kStatCount> stats{};
        for (int s = 0; s < kStatCount; ++s) {
            if (!obj.contains(kStatNames[s]) || obj[kStatNames[s]].is_null()) {
                stats[s] = 0.0;
                if (warnings) {
                    warnings->push_back("record " + std::to_string(row) + ": missing " +
                                        kStatNames[s] + ", defaulted to 0");
                }
                continue;
            }
            const auto& val = obj[kStatNames[s]];
            if (!val.is_number()) {
                throw DataError("record " + std::to_string(row) +
                                ": non-numeric value in key " + kStatNames[s]);
            }
            stats[s] = val.get<double>();
        }
        r.stats = StatVector::from_array(stats);

        if (obj.contains("destination_tier") && !obj["destination_tier"].is_null()) {
            const auto& t = obj["destination_tier"];
            if (!t.is_string()) {
                throw DataError("record " + std::to_string(row) +
                                ": destination_tier must be a string");
            }
            r.destination_tier = parse_tier_or_throw(t.get<std::string>(), row);
        }
        d.records.push_back(std::move(r));
        ++row;
    }
    if (enforce_invariants) {
        check_duplicates(d);
        check_invariants(d);
    }
    return d;
}

}  // namespace

std::array<double, kStatCount> StatVector::as_array() const {
    return {minutes,        goals,   assists,       passes,
            key_passes,     tackles, blocks,        interceptions,
            won_duels,      successful_dribbles,    fouls_won,
            duels_ratio,    dribbles_ratio,         fouls_committed,
            yellow_cards,   red_cards};
}

StatVector StatVector::from_array(const std::array<double, kStatCount>& a) {
    StatVector s;
    s.minutes = a[0];
    s.goals = a[1];
    s.assists = a[2];
    s.passes = a[3];
    s.key_passes = a[4];
    s.tackles = a[5];
    s.blocks = a[6];
    s.interceptions = a[7];
    s.won_duels = a[8];
    s.successful_dribbles = a[9];
    s.fouls_won = a[10];
    s.duels_ratio = a[11];
    s.dribbles_ratio = a[12];
    s.fouls_committed = a[13];
    s.yellow_cards = a[14];
    s.red_cards = a[15];
    return s;
}

const std::array<std::string, kStatCount>& stat_names() { return kStatNames; }

int stat_index(const std::string& name) {
    for (int i = 0; i < kStatCount; ++i) {
        if (kStatNames[i] == name) return i;
    }
    return -1;
}

bool stat_is_ratio(int index) {
    return kStatNames[index] == "duels_ratio" || kStatNames[index] == "dribbles_ratio";
}

const std::string& position_to_string(PositionGroup p) {
    return kPositionNames[static_cast<int>(p)];
}

std::optional<PositionGroup> position_from_string(const std::string& s) {
    for (int i = 0; i < 4; ++i) {
        if (kPositionNames[i] == s) return static_cast<PositionGroup>(i);
    }
    return std::nullopt;
}

bool Dataset::labeled() const {
    return std::all_of(records.begin(), records.end(),
                       [](const PlayerSeasonRecord& r) { return r.destination_tier.has_value(); });
}

FileFormat format_for_path(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return FileFormat::Json;
    return FileFormat::Csv;
}

Dataset parse_dataset(std::istream& in, FileFormat format,
                      std::vector<std::string>* warnings, bool enforce_invariants) {
    return format == FileFormat::Csv
               ? parse_csv(in, warnings, enforce_invariants)
               : parse_json_text(in, warnings, enforce_invariants);
}

Dataset load_dataset(const std::string& path, std::vector<std::string>* warnings,
                     bool enforce_invariants) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file " + path);
    Dataset d = parse_dataset(in, format_for_path(path), warnings, enforce_invariants);
    d.provenance.source = path;
    return d;
}

void serialize_dataset(const Dataset& d, std::ostream& out, FileFormat format) {
    const auto cols = dataset_columns();
    if (format == FileFormat::Csv) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out << ',';
            out << cols[i];
        }
        out << '\n';
        for (const auto& r : d.records) {
            out << csv_escape(r.player_id) << ',' << position_to_string(r.position)
                << ',' << csv_escape(r.season);
            for (double v : r.stats.as_array()) out << ',' << format_double(v);
            out << ',';
            if (r.destination_tier) out << tier_to_string(*r.destination_tier);
            out << '\n';
        }
        return;
    }
    json doc;
    doc["schema_version"] = "1";
    json records = json::array();
    for (const auto& r : d.records) {
        json obj;
        obj["player_id"] = r.player_id;
        obj["position"] = position_to_string(r.position);
        obj["season"] = r.season;
        auto arr = r.stats.as_array();
        for (int s = 0; s < kStatCount; ++s) obj[kStatNames[s]] = arr[s];
        if (r.destination_tier) obj["destination_tier"] = tier_to_string(*r.destination_tier);
        records.push_back(std::move(obj));
    }
    doc["records"] = std::move(records);
    out << doc.dump(2) << '\n';
}

void save_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file " + path);
    serialize_dataset(d, out, format_for_path(path));
}

std::vector<Violation> validate_dataset(const Dataset& d) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& r = d.records[i];
        if (r.player_id.empty()) out.push_back({i, "player_id", "nonempty"});
        auto arr = r.stats.as_array();
        for (int s = 0; s < kStatCount; ++s) {
            if (!std::isfinite(arr[s])) {
                out.push_back({i, kStatNames[s], "finite"});
                continue;
            }
            if (stat_is_ratio(s)) {
                if (arr[s] < 0.0 || arr[s] > 1.0)
                    out.push_back({i, kStatNames[s], "in [0,1]"});
            } else if (arr[s] < 0.0) {
                out.push_back({i, kStatNames[s], "non-negative"});
            }
        }
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& r = d.records[i];
        if (!seen.insert({r.player_id, r.season}).second) {
            out.push_back({i, "player_id", "duplicate (player_id, season)"});
        }
    }
    return out;
}

}  // namespace scoutnet
