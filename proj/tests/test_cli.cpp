#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "causalkit/dag.hpp"
#include "causalkit/inquiry.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causalkit;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CmdResult run_cli(const std::string& args) {
    std::string cmd = std::string(CAUSALKIT_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult result;
    char buffer[4096];
    size_t got;
    while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, got);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "causalkit_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spill(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const fs::path kFixture = fs::path(CAUSALKIT_DATA_DIR) / "wb_panel_fixture.csv";

// Small three-predictor panel with a lagged tanh link into the target.
void write_small_panel(const fs::path& path) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::ostringstream out;
    out << "country_code,indicator_code,year,value\n";
    out.precision(10);
    for (int c = 0; c < 30; ++c) {
        std::string country = "K" + std::to_string(100 + c);
        double a_prev = 0.0;
        for (int year : {2000, 2005, 2010}) {
            double a = gauss(rng), b = gauss(rng), x = gauss(rng);
            double y = year == 2000 ? gauss(rng) : std::tanh(1.5 * a_prev) + 0.3 * gauss(rng);
            out << country << ",AAA.ZS," << year << "," << a << "\n";
            out << country << ",BBB.ZS," << year << "," << b << "\n";
            out << country << ",XXX.ZS," << year << "," << x << "\n";
            out << country << ",EN.ATM.CO2E.PC," << year << "," << y << "\n";
            a_prev = a;
        }
    }
    spill(path, out.str());
}

}  // namespace

TEST_CASE("ingest writes panel and lagged files") {
    fs::path dir = fresh_dir("ingest");
    CmdResult result = run_cli("ingest --input " + kFixture.string() + " --output " + dir.string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("retained") != std::string::npos);
    CHECK(fs::exists(dir / "panel.json"));
    CHECK(fs::exists(dir / "lagged.json"));
}

TEST_CASE("ingest input and argument errors exit 2") {
    fs::path dir = fresh_dir("ingest_err");
    CHECK(run_cli("ingest --input /nonexistent.csv --output " + dir.string()).exit_code == 2);
    CHECK(run_cli("ingest --output " + dir.string()).exit_code == 2);  // no input
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("ingest --input " + kFixture.string() + " --missing-threshold 1.5 --output " + dir.string())
              .exit_code == 2);
    fs::path garbled = dir / "bad.csv";
    spill(garbled, "country_code,indicator_code,year,value\nAAA,X,20x0,1\n");
    CHECK(run_cli("ingest --input " + garbled.string() + " --output " + dir.string()).exit_code == 2);
}

TEST_CASE("screen emits the report set deterministically") {
    fs::path dir = fresh_dir("screen");
    REQUIRE(run_cli("ingest --input " + kFixture.string() + " --output " + dir.string()).exit_code == 0);
    CHECK(run_cli("screen --output " + dir.string() + " --seed 7").exit_code == 0);
    for (const char* file : {"screening.json", "correlation.csv", "target_rank.csv"}) CHECK(fs::exists(dir / file));

    std::string first = slurp(dir / "screening.json");
    CHECK(run_cli("screen --output " + dir.string() + " --seed 7").exit_code == 0);
    CHECK(slurp(dir / "screening.json") == first);

    json report = json::parse(first);
    CHECK(report["retained"].size() + report["rejected"].size() == 14);
    CHECK(run_cli("screen --output " + fresh_dir("screen_empty").string()).exit_code == 2);  // no lagged.json
}

TEST_CASE("discover writes order, dag, and diagnostics and is repeatable") {
    fs::path dir = fresh_dir("discover");
    fs::path csv = dir / "panel.csv";
    write_small_panel(csv);
    REQUIRE(run_cli("ingest --input " + csv.string() + " --output " + dir.string()).exit_code == 0);
    CHECK(run_cli("discover --output " + dir.string()).exit_code == 2);  // seed required
    CHECK(run_cli("discover --output " + dir.string() + " --seed 3").exit_code == 0);
    for (const char* file : {"order.json", "dag.dot", "dag.csv", "diagnostics.json"}) CHECK(fs::exists(dir / file));

    std::string dag_csv = slurp(dir / "dag.csv");
    CHECK(dag_csv.find("EN.ATM.CO2E.PC") != std::string::npos);
    CHECK(slurp(dir / "dag.dot").find("AAA.ZS\" -> \"EN.ATM.CO2E.PC") != std::string::npos);

    CHECK(run_cli("discover --output " + dir.string() + " --seed 3").exit_code == 0);
    CHECK(slurp(dir / "dag.csv") == dag_csv);
}

TEST_CASE("discover per-pair emits one dag per lag pair") {
    fs::path dir = fresh_dir("per_pair");
    fs::path csv = dir / "panel.csv";
    write_small_panel(csv);
    REQUIRE(run_cli("ingest --input " + csv.string() + " --output " + dir.string()).exit_code == 0);
    CHECK(run_cli("discover --per-pair --output " + dir.string() + " --seed 3").exit_code == 0);
    CHECK(fs::exists(dir / "dag_2000.csv"));
    CHECK(fs::exists(dir / "dag_2005.csv"));
    CHECK(fs::exists(dir / "dag_2000.dot"));
}

TEST_CASE("evaluate reproduces the metric examples") {
    fs::path dir = fresh_dir("evaluate");
    Dag truth({"a", "b", "c"});
    truth.add_edge(0, 1);
    Dag reversed({"a", "b", "c"});
    reversed.add_edge(1, 0);
    spill(dir / "truth.csv", truth.to_adjacency_csv());
    spill(dir / "reversed.csv", reversed.to_adjacency_csv());

    CmdResult same =
        run_cli("evaluate --truth " + (dir / "truth.csv").string() + " --predicted " + (dir / "truth.csv").string() +
                " --output " + dir.string());
    CHECK(same.exit_code == 0);
    json identical = json::parse(slurp(dir / "metrics.json"));
    CHECK(identical["sid"] == 0);
    CHECK(identical["shd"] == 0);
    CHECK(identical["f1"] == 1.0);
    CHECK(identical["l2"] == 0.0);

    CmdResult rev =
        run_cli("evaluate --truth " + (dir / "truth.csv").string() + " --predicted " + (dir / "reversed.csv").string() +
                " --output " + dir.string());
    CHECK(rev.exit_code == 0);
    json flipped = json::parse(slurp(dir / "metrics.json"));
    CHECK(flipped["sid"] == 2);
    CHECK(flipped["shd"] == 1);
    CHECK(flipped["f1"] == 0.0);
    CHECK(flipped["l2"].get<double>() == doctest::Approx(1.41421356).epsilon(1e-6));

    Dag other({"a", "b", "z"});
    spill(dir / "other.csv", other.to_adjacency_csv());
    CHECK(run_cli("evaluate --truth " + (dir / "truth.csv").string() + " --predicted " + (dir / "other.csv").string() +
                  " --output " + dir.string())
              .exit_code == 2);
}

TEST_CASE("simulate with edge probability zero recovers the empty graph") {
    fs::path dir = fresh_dir("simulate");
    CmdResult result =
        run_cli("simulate --d 4 --n 400 --seeds 2 --edge-prob 0 --seed 1 --output " + dir.string());
    CHECK(result.exit_code == 0);
    std::string table = slurp(dir / "simulate.csv");
    CHECK(table.find("shd,0,0") != std::string::npos);
    CHECK(fs::exists(dir / "sim_seed_0" / "scm.json"));
    CHECK(fs::exists(dir / "sim_seed_1" / "samples.csv"));
    CHECK(fs::exists(dir / "sim_seed_0" / "metrics.json"));

    fs::path again = fresh_dir("simulate_again");
    CHECK(run_cli("simulate --d 4 --n 400 --seeds 2 --edge-prob 0 --seed 1 --output " + again.string()).exit_code == 0);
    CHECK(slurp(again / "simulate.csv") == table);
    CHECK(run_cli("simulate --d 4 --n 400 --seeds 2 --output " + dir.string()).exit_code == 2);  // seed required
}

TEST_CASE("inquire generates the battery and optional transcripts") {
    fs::path dir = fresh_dir("inquire");
    Dag dag({"EG.CFT.ACCS.RU.ZS", "EG.CFT.ACCS.UR.ZS", "SP.URB.TOTL.IN.ZS", "EN.ATM.CO2E.PC"});
    dag.add_edge(0, 3);
    dag.add_edge(2, 3);
    spill(dir / "dag.csv", dag.to_adjacency_csv());

    std::string codes = "EG.CFT.ACCS.RU.ZS EG.CFT.ACCS.UR.ZS SP.URB.TOTL.IN.ZS";
    CHECK(run_cli("inquire --dag " + (dir / "dag.csv").string() + " --codes " + codes + " --output " + dir.string())
              .exit_code == 0);
    json questions = json::parse(slurp(dir / "questions.json"));
    CHECK(questions.size() == 32);
    CHECK(questions[0]["text"] == "What does EG.CFT.ACCS.RU.ZS represent in the context of global carbon emissions?");

    CHECK(run_cli("inquire --dag " + (dir / "dag.csv").string() + " --codes NOT.A.CODE --output " + dir.string())
              .exit_code == 2);

    // Canned transport keyed by the exact prompts the CLI will render.
    DiscoveryContext context;
    for (int i = 0; i < dag.size(); ++i)
        for (int j : dag.children(i)) context.edges.push_back({dag.codes[i], dag.codes[j]});
    json canned = json::object();
    for (const auto& entry : questions) {
        CausalQuestion q;
        q.text = entry["text"].get<std::string>();
        canned[prompt_hash(render_prompt(q, context))] = "canned answer";
    }
    spill(dir / "transport.json", canned.dump());
    CHECK(run_cli("inquire --dag " + (dir / "dag.csv").string() + " --codes " + codes + " --transport " +
                  (dir / "transport.json").string() + " --output " + dir.string())
              .exit_code == 0);
    json transcripts = json::parse(slurp(dir / "transcripts.json"));
    CHECK(transcripts.size() == 32);
    CHECK(transcripts[0]["response"] == "canned answer");
    CHECK(transcripts[0]["prompt_hash"] == prompt_hash(transcripts[0]["prompt"].get<std::string>()));

    spill(dir / "empty_transport.json", "{}");
    CHECK(run_cli("inquire --dag " + (dir / "dag.csv").string() + " --codes " + codes + " --transport " +
                  (dir / "empty_transport.json").string() + " --output " + dir.string())
              .exit_code == 2);
}

TEST_CASE("pipeline runs end to end with a manifest and resume") {
    fs::path dir = fresh_dir("pipeline");
    CmdResult result =
        run_cli("pipeline --input " + kFixture.string() + " --output " + dir.string() + " --seed 11");
    CHECK(result.exit_code == 0);
    for (const char* file : {"panel.json", "lagged.json", "screening.json", "correlation.csv", "target_rank.csv",
                             "order.json", "dag.dot", "dag.csv", "diagnostics.json", "questions.json", "manifest.json"})
        CHECK(fs::exists(dir / file));

    json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["seed"] == 11);
    for (const char* stage : {"ingest", "screen", "discover", "inquire"}) {
        CHECK(manifest["stages"][stage]["status"] == "done");
        CHECK(!manifest["stages"][stage]["outputs"].empty());
    }

    CmdResult resumed =
        run_cli("pipeline --input " + kFixture.string() + " --output " + dir.string() + " --seed 11 --resume");
    CHECK(resumed.exit_code == 0);
    CHECK(resumed.output.find("skipping completed stage discover") != std::string::npos);
}

TEST_CASE("pipeline failure marks the stage and leaves earlier outputs") {
    fs::path dir = fresh_dir("pipeline_fail");
    fs::path csv = dir / "panel.csv";
    write_small_panel(csv);
    // basis_size too large for the row count: discover fails after ingest
    // and screen have written their artifacts.
    CmdResult result = run_cli("pipeline --input " + csv.string() + " --output " + dir.string() +
                               " --seed 5 --basis-size 40");
    CHECK(result.exit_code == 2);
    CHECK(fs::exists(dir / "lagged.json"));
    CHECK(fs::exists(dir / "screening.json"));
    json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["stages"]["ingest"]["status"] == "done");
    CHECK(manifest["stages"]["discover"]["status"] == "failed");
    CHECK(!manifest["stages"].contains("inquire"));

    CmdResult resumed = run_cli("pipeline --input " + csv.string() + " --output " + dir.string() + " --seed 5 --resume");
    CHECK(resumed.exit_code == 0);
    CHECK(resumed.output.find("skipping completed stage ingest") != std::string::npos);
    CHECK(json::parse(slurp(dir / "manifest.json"))["stages"]["discover"]["status"] == "done");
}

TEST_CASE("config file values apply and flags override them") {
    fs::path dir = fresh_dir("config");
    fs::path csv = dir / "panel.csv";
    write_small_panel(csv);
    json config{{"input", csv.string()},
                {"missing_threshold", 0.35},
                {"seed", 21},
                {"output", (dir / "from_file").string()},
                {"kernel", {{"bandwidth", "median"}, {"eta", 0.05}}},
                {"prune", {{"alpha", 0.001}, {"basis", "polynomial"}, {"basis_size", 3}}}};
    spill(dir / "config.json", config.dump(2));

    fs::path overridden = dir / "from_flag";
    CHECK(run_cli("pipeline --config " + (dir / "config.json").string() + " --output " + overridden.string())
              .exit_code == 0);
    CHECK(fs::exists(overridden / "dag.csv"));
    CHECK(!fs::exists(dir / "from_file"));
    json manifest = json::parse(slurp(overridden / "manifest.json"));
    CHECK(manifest["config"]["missing_threshold"] == 0.35);
    CHECK(manifest["config"]["seed"] == 21);
    CHECK(manifest["config"]["output"] == overridden.string());

    spill(dir / "bad.json", "{not json");
    CHECK(run_cli("pipeline --config " + (dir / "bad.json").string()).exit_code == 2);
}
