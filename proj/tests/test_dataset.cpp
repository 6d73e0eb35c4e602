#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "scoutnet/dataset.hpp"
#include "scoutnet/errors.hpp"

using namespace scoutnet;

namespace {

const char* kHeader =
    "player_id,position,season,minutes,goals,assists,passes,key_passes,tackles,"
    "blocks,interceptions,won_duels,successful_dribbles,fouls_won,duels_ratio,"
    "dribbles_ratio,fouls_committed,yellow_cards,red_cards,destination_tier";

PlayerSeasonRecord make_record(const std::string& id, PositionGroup pos,
                               double minutes = 900.0) {
    PlayerSeasonRecord r;
    r.player_id = id;
    r.position = pos;
    r.season = "2020-2021";
    r.stats.minutes = minutes;
    return r;
}

Dataset random_dataset(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, 2000);
    std::uniform_int_distribution<int> pos(0, 3);
    std::uniform_int_distribution<int> tier(0, 4);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        PlayerSeasonRecord r;
        r.player_id = "p" + std::to_string(i);
        r.position = static_cast<PositionGroup>(pos(rng));
        r.season = "2020-2021";
        std::array<double, kStatCount> stats{};
        for (int s = 0; s < kStatCount; ++s) {
            stats[s] = stat_is_ratio(s) ? unit(rng) : static_cast<double>(count(rng));
        }
        // Exercise non-integer values too.
        stats[1] += unit(rng);
        r.stats = StatVector::from_array(stats);
        int t = tier(rng);
        if (t < 4) r.destination_tier = static_cast<LeagueTier>(t);
        d.records.push_back(std::move(r));
    }
    return d;
}

}  // namespace

TEST_CASE("csv row parses to a record field-for-field") {
    std::istringstream in(std::string(kHeader) +
                          "\np1,Defender,2020-2021,900,5,0,0,0,0,0,0,0,0,0,0,0,0,0,0,\n");
    Dataset d = parse_dataset(in, FileFormat::Csv);
    REQUIRE(d.size() == 1);
    CHECK(d.records[0].player_id == "p1");
    CHECK(d.records[0].position == PositionGroup::Defender);
    CHECK(d.records[0].stats.minutes == 900.0);
    CHECK(d.records[0].stats.goals == 5.0);
    CHECK(d.records[0].stats.passes == 0.0);
    CHECK_FALSE(d.records[0].destination_tier.has_value());
}

TEST_CASE("empty file with valid header parses to zero records") {
    std::istringstream in(std::string(kHeader) + "\n");
    Dataset d = parse_dataset(in, FileFormat::Csv);
    CHECK(d.size() == 0);
    CHECK(validate_dataset(d).empty());
}

TEST_CASE("ratio outside [0,1] is rejected at parse") {
    std::istringstream in(std::string(kHeader) +
                          "\np1,Defender,2020-2021,900,0,0,0,0,0,0,0,0,0,0,1.3,0,0,0,0,\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in, FileFormat::Csv),
                         doctest::Contains("duels_ratio"), DataError);
}

TEST_CASE("missing required column names the field") {
    std::string header(kHeader);
    auto pos = header.find(",goals");
    header.erase(pos, 6);
    std::istringstream in(header + "\np1,Defender,2020-2021,900,0,0,0,0,0,0,0,0,0,0,0,0,0,0,\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in, FileFormat::Csv), doctest::Contains("goals"),
                         DataError);
}

TEST_CASE("non-numeric stat value names the row") {
    std::istringstream in(std::string(kHeader) +
                          "\np1,Defender,2020-2021,900,abc,0,0,0,0,0,0,0,0,0,0,0,0,0,0,\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in, FileFormat::Csv), doctest::Contains("row 1"),
                         DataError);
}

TEST_CASE("duplicate (player_id, season) is rejected") {
    std::string row = "\np1,Defender,2020-2021,900,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,";
    std::istringstream in(std::string(kHeader) + row + row + "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in, FileFormat::Csv), doctest::Contains("duplicate"),
                         DataError);
}

TEST_CASE("missing optional stat defaults to 0 with a warning") {
    std::istringstream in(std::string(kHeader) +
                          "\np1,Defender,2020-2021,900,,0,0,0,0,0,0,0,0,0,0,0,0,0,0,\n");
    std::vector<std::string> warnings;
    Dataset d = parse_dataset(in, FileFormat::Csv, &warnings);
    CHECK(d.records[0].stats.goals == 0.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("goals") != std::string::npos);
}

TEST_CASE("unknown destination_tier string is rejected") {
    std::istringstream in(std::string(kHeader) +
                          "\np1,Defender,2020-2021,900,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,laliga\n");
    CHECK_THROWS_AS(parse_dataset(in, FileFormat::Csv), DataError);
}

TEST_CASE("validate reports minutes sign, ratio range and duplicates") {
    Dataset d;
    d.records.push_back(make_record("a", PositionGroup::Attacker));
    d.records.push_back(make_record("b", PositionGroup::Defender, -5.0));
    d.records.push_back(make_record("a", PositionGroup::Attacker));  // dup of record 0
    d.records[0].stats.dribbles_ratio = 1.5;
    auto violations = validate_dataset(d);
    REQUIRE(violations.size() == 3);
    CHECK(violations[0] == Violation{0, "dribbles_ratio", "in [0,1]"});
    CHECK(violations[1] == Violation{1, "minutes", "non-negative"});
    CHECK(violations[2].record_index == 2);
    CHECK(violations[2].rule == "duplicate (player_id, season)");
}

TEST_CASE("validate is empty on a clean dataset") {
    Dataset d;
    d.records.push_back(make_record("a", PositionGroup::Goalkeeper));
    d.records.push_back(make_record("b", PositionGroup::Midfielder));
    CHECK(validate_dataset(d).empty());
}

TEST_CASE("parse-serialize round trip is the identity, both formats") {
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 20; ++iter) {
        Dataset d = random_dataset(rng, 1 + iter * 3);
        for (FileFormat fmt : {FileFormat::Csv, FileFormat::Json}) {
            std::ostringstream out;
            serialize_dataset(d, out, fmt);
            std::istringstream in(out.str());
            Dataset back = parse_dataset(in, fmt);
            REQUIRE(back.records == d.records);
        }
    }
}

TEST_CASE("quoted csv fields survive the round trip") {
    Dataset d;
    auto r = make_record("weird \"id\", with comma", PositionGroup::Attacker);
    r.season = "2020,2021";
    d.records.push_back(r);
    std::ostringstream out;
    serialize_dataset(d, out, FileFormat::Csv);
    std::istringstream in(out.str());
    Dataset back = parse_dataset(in, FileFormat::Csv);
    CHECK(back.records == d.records);
}

TEST_CASE("parsing identical bytes twice gives identical datasets") {
    std::mt19937_64 rng(7);
    Dataset d = random_dataset(rng, 25);
    std::ostringstream out;
    serialize_dataset(d, out, FileFormat::Csv);
    std::istringstream in1(out.str()), in2(out.str());
    Dataset a = parse_dataset(in1, FileFormat::Csv);
    Dataset b = parse_dataset(in2, FileFormat::Csv);
    CHECK(a.records == b.records);
}

TEST_CASE("every successfully parsed dataset validates clean") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 10; ++iter) {
        Dataset d = random_dataset(rng, 30);
        std::ostringstream out;
        serialize_dataset(d, out, FileFormat::Json);
        std::istringstream in(out.str());
        Dataset back = parse_dataset(in, FileFormat::Json);
        CHECK(validate_dataset(back).empty());
    }
}

TEST_CASE("json with unknown record key is rejected") {
    std::istringstream in(R"([{"player_id":"p1","position":"Defender","season":"s",
        "minutes":90,"market_value":1}])");
    CHECK_THROWS_WITH_AS(parse_dataset(in, FileFormat::Json),
                         doctest::Contains("market_value"), DataError);
}
