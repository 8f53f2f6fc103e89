#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

#include "rrl/mlp.hpp"
#include "support/paths.hpp"

namespace {

std::string cli_path() { return RRL_CLI_PATH; }

// runs the tool with stdout+stderr captured; returns the exit status
int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = cli_path() + " " + args + " > " + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

int run_shell(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++n;
    return n;
}

bool same_bytes(const std::string& a, const std::string& b) { return slurp(a) == slurp(b); }

void write_input_csv(const std::string& path, int rows) {
    std::ofstream out(path);
    out << "m_dot_feed,T_J_in,T_CW_EHE_in\n";
    for (int i = 0; i < rows; ++i) out << "8000,353.15,340.15\n";
}

}  // namespace

TEST_CASE("cli argument errors and help exit as documented") {
    const std::string dir = rrl_test::scratch_dir("cli-basic");
    CHECK(run_cli("--help", dir + "/help.log") == 0);
    CHECK(slurp(dir + "/help.log").find("simulate") != std::string::npos);
    // a subcommand is mandatory
    CHECK(run_cli("", dir + "/none.log") == 2);
    CHECK(run_cli("frobnicate", dir + "/unknown.log") == 2);
}

TEST_CASE("missing configuration files are reported as config errors") {
    const std::string dir = rrl_test::scratch_dir("cli-missing");
    write_input_csv(dir + "/input.csv", 2);
    const int rc = run_cli("simulate --reactor-config /nonexistent/reactor.txt --input " + dir +
                               "/input.csv --out " + dir + "/out",
                           dir + "/log.txt");
    CHECK(rc == 2);
    CHECK(slurp(dir + "/log.txt").find("config error") != std::string::npos);
}

TEST_CASE("simulate replays a scripted input table") {
    const std::string dir = rrl_test::scratch_dir("cli-simulate");
    write_input_csv(dir + "/input.csv", 5);
    const int rc = run_cli("simulate --input " + dir + "/input.csv --seed 123 --out " + dir +
                               "/out",
                           dir + "/log.txt");
    CHECK(rc == 0);
    CHECK(file_exists(dir + "/out/config.json"));
    CHECK(line_count(dir + "/out/trajectory.csv") == 1 + 1 + 5);   // header, t=0, 5 intervals
    const std::string summary = slurp(dir + "/out/summary.json");
    CHECK(summary.find("\"intervals\": 5") != std::string::npos);

    // out-of-box inputs are rejected with the offending row named
    std::ofstream bad(dir + "/bad.csv");
    bad << "m_dot_feed,T_J_in,T_CW_EHE_in\n8000,353.15,340.15\n99999,353.15,340.15\n";
    bad.close();
    const int rc2 = run_cli("simulate --input " + dir + "/bad.csv --out " + dir + "/out2",
                            dir + "/log2.txt");
    CHECK(rc2 == 2);
    CHECK(slurp(dir + "/log2.txt").find("row") != std::string::npos);
}

TEST_CASE("baseline writes per-episode artifacts and metrics") {
    const std::string dir = rrl_test::scratch_dir("cli-baseline");
    const int rc = run_cli("baseline --episodes 1 --out " + dir + "/out", dir + "/log.txt");
    CHECK(rc == 0);
    CHECK(file_exists(dir + "/out/config.json"));
    CHECK(file_exists(dir + "/out/metrics.json"));
    CHECK(file_exists(dir + "/out/episode_001.json"));
    CHECK(file_exists(dir + "/out/episode_001_trajectory.csv"));
    CHECK(file_exists(dir + "/out/episode_001_transitions.csv"));
    CHECK(slurp(dir + "/out/config.json").find("baseline_theta") != std::string::npos);
    CHECK(slurp(dir + "/out/metrics.json").find("completion_rate") != std::string::npos);
}

TEST_CASE("train cem produces weights, curve and frozen-config reruns bit-identically") {
    const std::string dir = rrl_test::scratch_dir("cli-train");
    const std::string common =
        "train --algo cem --env recipe --scenario 3 --seed 42 --population 4 "
        "--generations 2 --hidden 4";
    REQUIRE(run_cli(common + " --out " + dir + "/a", dir + "/a.log") == 0);
    CHECK(file_exists(dir + "/a/weights.json"));
    CHECK(file_exists(dir + "/a/train_metrics.json"));
    CHECK(line_count(dir + "/a/curve.csv") == 1 + 2);   // header + one point per generation

    // an identical run replayed from the frozen config reproduces every byte
    REQUIRE(run_cli("train --frozen-config " + dir + "/a/config.json --out " + dir + "/b",
                    dir + "/b.log") == 0);
    CHECK(same_bytes(dir + "/a/config.json", dir + "/b/config.json"));
    CHECK(same_bytes(dir + "/a/weights.json", dir + "/b/weights.json"));
    CHECK(same_bytes(dir + "/a/curve.csv", dir + "/b/curve.csv"));
    CHECK(same_bytes(dir + "/a/train_metrics.json", dir + "/b/train_metrics.json"));

    // explicit flags override frozen values
    REQUIRE(run_cli("train --frozen-config " + dir + "/a/config.json --generations 3 --out " +
                        dir + "/c",
                    dir + "/c.log") == 0);
    CHECK(line_count(dir + "/c/curve.csv") == 1 + 3);
}

TEST_CASE("evaluate rejects weights whose shape does not fit the environment") {
    const std::string dir = rrl_test::scratch_dir("cli-eval");
    const std::string train =
        "train --algo cem --env recipe --scenario 3 --seed 41 --population 4 "
        "--generations 1 --hidden 4 --out " +
        dir + "/t";
    REQUIRE(run_cli(train, dir + "/t.log") == 0);

    // wrong environment: the recipe policy has a 40-wide input, direct needs 10
    const int rc = run_cli("evaluate --weights " + dir + "/t/weights.json --env direct --out " +
                               dir + "/bad",
                           dir + "/bad.log");
    CHECK(rc == 2);
    const std::string msg = slurp(dir + "/bad.log");
    CHECK(msg.find("40") != std::string::npos);
    CHECK(msg.find("10") != std::string::npos);

    // matching environment works and writes metrics plus episode artifacts
    const int rc2 = run_cli("evaluate --weights " + dir + "/t/weights.json --env recipe "
                            "--episodes 1 --out " +
                                dir + "/ok",
                            dir + "/ok.log");
    CHECK(rc2 == 0);
    CHECK(file_exists(dir + "/ok/metrics.json"));

    // corrupted weights are a config error
    std::ofstream(dir + "/corrupt.json") << "{ not json";
    const int rc3 = run_cli("evaluate --weights " + dir + "/corrupt.json --out " + dir + "/c",
                            dir + "/c.log");
    CHECK(rc3 == 2);
}

TEST_CASE("seed precedence is flag over environment variable over frozen file") {
    const std::string dir = rrl_test::scratch_dir("cli-seed");
    const std::string base = " baseline --episodes 1 ";

    // environment variable alone
    REQUIRE(run_shell("RECIPE_RL_SEED=1000777 " + cli_path() + base + "--out " + dir +
                      "/env > " + dir + "/env.log 2>&1") == 0);
    CHECK(slurp(dir + "/env/config.json").find("1000777") != std::string::npos);

    // explicit flag wins over the variable
    REQUIRE(run_shell("RECIPE_RL_SEED=1000777 " + cli_path() + base +
                      "--seed 1000555 --out " + dir + "/flag > " + dir + "/flag.log 2>&1") == 0);
    CHECK(slurp(dir + "/flag/config.json").find("1000555") != std::string::npos);
    CHECK(slurp(dir + "/flag/config.json").find("1000777") == std::string::npos);

    // malformed variable is a config error
    CHECK(run_shell("RECIPE_RL_SEED=banana " + cli_path() + base + "--out " + dir +
                    "/bad > " + dir + "/bad.log 2>&1") == 2);
    CHECK(slurp(dir + "/bad.log").find("RECIPE_RL_SEED") != std::string::npos);
}

TEST_CASE("grid smoke run writes a ranked table and resumes without retraining") {
    const std::string dir = rrl_test::scratch_dir("cli-grid");
    const std::string cmd =
        "grid --algos cem --archs 4 --batches 16 --lrs 1e-3 --noises 0.1 --buffers 100 "
        "--scenarios 2,3 --cem-population 4 --cem-generations 2 --eval-episodes 2 "
        "--seed 7 --out " +
        dir + "/g";
    REQUIRE(run_cli(cmd, dir + "/g1.log") == 0);
    CHECK(line_count(dir + "/g/results.csv") == 3);   // header + two cells
    CHECK(file_exists(dir + "/g/cell_0/weights.json"));
    CHECK(file_exists(dir + "/g/cell_1/curve.csv"));
    const std::string first = slurp(dir + "/g/results.csv");
    CHECK(first.find("cell_id,algorithm,arch") == 0);

    REQUIRE(run_cli(cmd, dir + "/g2.log") == 0);
    CHECK(slurp(dir + "/g/results.csv") == first);
    CHECK(slurp(dir + "/g2.log").find("2 resumed") != std::string::npos);
}
