#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SCOUT_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("scout_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("unknown flag exits 1 with usage") {
    CHECK(run("synth --frobnicate") == 1);
    CHECK(run("definitely-not-a-command") == 1);
    CHECK(run("--help") == 0);
    CHECK(run("train --help") == 0);
}

TEST_CASE("missing files exit 2") {
    TempDir tmp;
    CHECK(run("validate --data " + tmp.file("nope.csv")) == 2);
    CHECK(run("predict --model " + tmp.file("nope.json") + " --data " +
              tmp.file("nope.csv") + " --out " + tmp.file("p.csv")) == 2);
}

TEST_CASE("synth then train then evaluate produces a report with a sweep") {
    TempDir tmp;
    const std::string data = tmp.file("d.csv");
    const std::string model = tmp.file("m.json");
    const std::string test_data = tmp.file("test.csv");
    const std::string report = tmp.file("r.json");

    REQUIRE(run("synth --out " + data + " --n 400 --seed 2") == 0);
    REQUIRE(run("validate --data " + data) == 0);
    REQUIRE(run("train --data " + data + " --out " + model + " --test-out " + test_data +
                " --epochs 10 --folds 2") == 0);
    REQUIRE(run("evaluate --model " + model + " --data " + test_data + " --out " + report) == 0);

    CHECK(fs::exists(report));
    CHECK(fs::exists(tmp.file("r.sweep.csv")));
    const std::string report_text = slurp(report);
    CHECK(report_text.find("\"sweep\"") != std::string::npos);
    CHECK(report_text.find("\"alpha\": 0.4") != std::string::npos);

    // predict emits a score-descending CSV over eligible records.
    const std::string preds = tmp.file("p.csv");
    REQUIRE(run("predict --model " + model + " --data " + test_data + " --out " + preds) == 0);
    std::ifstream in(preds);
    std::string line;
    std::getline(in, line);
    CHECK(line == "player_id,position,score");
    double last = 2.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const double score = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(score <= last);
        last = score;
    }

    // sweep from precomputed predictions agrees with the documented schema.
    const std::string sweep_out = tmp.file("s.csv");
    REQUIRE(run("sweep --predictions " + preds + " --data " + test_data + " --grid 0:0.4:0.01 --out " +
                sweep_out) == 0);
    std::ifstream sw(sweep_out);
    std::getline(sw, line);
    CHECK(line == "alpha,flagged,precision,recall");
}

TEST_CASE("validate lists violations and exits 2") {
    TempDir tmp;
    const std::string data = tmp.file("bad.csv");
    std::ofstream out(data);
    out << "player_id,position,season,minutes,goals,assists,passes,key_passes,tackles,"
           "blocks,interceptions,won_duels,successful_dribbles,fouls_won,duels_ratio,"
           "dribbles_ratio,fouls_committed,yellow_cards,red_cards,destination_tier\n";
    out << "p1,Defender,2020-2021,900,0,0,0,0,0,0,0,0,0,0,1.4,0,0,0,0,top5\n";
    out.close();
    CHECK(run("validate --data " + data) == 2);
}

TEST_CASE("evaluate rejects a feature-mode mismatch with exit 2") {
    TempDir tmp;
    const std::string data = tmp.file("d.csv");
    const std::string model = tmp.file("m.json");
    REQUIRE(run("synth --out " + data + " --n 400 --seed 4") == 0);
    REQUIRE(run("train --data " + data + " --out " + model +
                " --epochs 5 --folds 2 --feature-mode per90") == 0);
    CHECK(run("evaluate --model " + model + " --data " + data + " --out " + tmp.file("r.json") +
              " --feature-mode raw") == 2);
    CHECK(run("evaluate --model " + model + " --data " + data + " --out " + tmp.file("r.json") +
              " --feature-mode per90") == 0);
}

TEST_CASE("config file values are used and flags override them") {
    TempDir tmp;
    const std::string config = tmp.file("cfg.json");
    std::ofstream out(config);
    out << R"({"synth": {"n_records": 120, "seed": 9}})";
    out.close();

    const std::string a = tmp.file("a.csv");
    const std::string b = tmp.file("b.csv");
    REQUIRE(run("synth --config " + config + " --out " + a) == 0);
    REQUIRE(run("synth --config " + config + " --out " + b + " --n 60") == 0);

    auto count_lines = [](const std::string& path) {
        std::ifstream in(path);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            if (!line.empty()) n++;
        }
        return n;
    };
    CHECK(count_lines(a) == 121);  // header + config value
    CHECK(count_lines(b) == 61);   // header + flag override
}
