#include <catch2/catch_amalgamated.hpp>

#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/io.hpp"

using namespace polyroth;

namespace {

std::string tmpdir() {
    static const std::string dir = [] {
        char tpl[] = "/tmp/polyroth_test_XXXXXX";
        const char* d = mkdtemp(tpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(POLYROTH_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool file_exists(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0;
}

}  // namespace

TEST_CASE("scales subcommand: exact bad-row count and headers") {
    const std::string dir = tmpdir();
    spit(dir + "/p.json", R"({"degree": 2, "coeffs": {"1": 1.0, "2": 1.0}})");
    REQUIRE(run_cli("scales --poly " + dir + "/p.json --gamma0 10 --window -50:50 --out " + dir +
                    "/scales.csv") == 0);
    const std::string csv = slurp(dir + "/scales.csv");
    REQUIRE(csv.rfind("# polyroth", 0) == 0);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // version header
    std::getline(in, line);
    REQUIRE(line == "k,dominating_r,in_J1r,good");
    int bad = 0, rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.size() >= 2 && line.substr(line.size() - 2) == ",0") ++bad;
    }
    CHECK(rows == 101);
    CHECK(bad == 21);
}

TEST_CASE("exit codes") {
    const std::string dir = tmpdir();
    CHECK(run_cli("scales") == 2);  // missing required flag
    spit(dir + "/const.json", R"({"degree": 2, "coeffs": {"0": 1.0, "2": 1.0}})");
    CHECK(run_cli("scales --poly " + dir + "/const.json") == 2);  // constant term rejected
    spit(dir + "/nonmonic.json", R"({"degree": 2, "coeffs": {"2": 3.0}})");
    CHECK(run_cli("trilinear --f nofile.json --poly " + dir + "/nonmonic.json") == 2);
}

TEST_CASE("decay rerun with the same seed is byte-identical") {
    const std::string dir = tmpdir();
    spit(dir + "/p.json", R"({"degree": 2, "coeffs": {"2": 1.0}})");
    REQUIRE(run_cli("admissible --poly " + dir + "/p.json --theta 1 --count 1 --out " + dir +
                    "/pairs.json") == 0);
    const std::string args = "decay --poly " + dir + "/p.json --pair " + dir +
                             "/pairs.json#0 --m 6:8 --trials 16 --n 11 --seed 9 --out " + dir;
    REQUIRE(run_cli(args + "/d1.csv") == 0);
    REQUIRE(run_cli(args + "/d2.csv") == 0);
    CHECK(slurp(dir + "/d1.csv") == slurp(dir + "/d2.csv"));
}

TEST_CASE("stored config reproduces the output byte for byte") {
    const std::string dir = tmpdir();
    spit(dir + "/p.json", R"({"degree": 2, "coeffs": {"1": 1.0, "2": 1.0}})");
    json cfg{{"command", "scales"},
             {"args", {{"poly", dir + "/p.json"}, {"gamma0", 8}, {"out", dir + "/direct.csv"}}}};
    spit(dir + "/cfg.json", cfg.dump());
    REQUIRE(run_cli("scales --poly " + dir + "/p.json --gamma0 8 --out " + dir + "/a.csv") == 0);
    REQUIRE(run_cli("--config " + dir + "/cfg.json") == 0);
    CHECK(slurp(dir + "/a.csv") == slurp(dir + "/direct.csv"));
}

TEST_CASE("atomic output: no partial file after a mid-run kill") {
    const std::string dir = tmpdir();
    spit(dir + "/p.json", R"({"degree": 2, "coeffs": {"2": 1.0}})");
    REQUIRE(run_cli("admissible --poly " + dir + "/p.json --theta 1 --count 1 --out " + dir +
                    "/pairs.json") == 0);
    const std::string target = dir + "/killed.csv";

    const pid_t pid = fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        execl(POLYROTH_BIN, POLYROTH_BIN, "decay", "--poly", (dir + "/p.json").c_str(), "--pair",
              (dir + "/pairs.json#0").c_str(), "--m", "6:9", "--trials", "24", "--n", "12",
              "--out", target.c_str(), (char*)nullptr);
        _exit(127);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    CHECK(!file_exists(target));  // either never written or fully renamed; here: killed before

    // The same invocation runs to completion afterwards.
    REQUIRE(run_cli("decay --poly " + dir + "/p.json --pair " + dir +
                    "/pairs.json#0 --m 6:9 --trials 24 --n 12 --out " + target) == 0);
    CHECK(file_exists(target));
}

TEST_CASE("atomic_write: concurrent readers never observe partial content") {
    const std::string path = tmpdir() + "/swap.dat";
    const std::string a(1 << 20, 'A'), b(1 << 20, 'B');
    atomic_write(path, a);
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        while (!stop) {
            const std::string got = slurp(path);
            if (got != a && got != b) ++bad;
        }
    });
    for (int i = 0; i < 25; ++i) atomic_write(path, i % 2 ? a : b);
    stop = true;
    reader.join();
    CHECK(bad == 0);
}

TEST_CASE("report aggregates decay tables and flags version mismatches") {
    const std::string dir = tmpdir();
    // A well-formed decay CSV.
    {
        CsvWriter csv({"m", "log2_norm_max", "trials"});
        csv.row({"6", "-3.0", "16"});
        csv.row({"7", "-3.5", "16"});
        csv.row({"8", "-4.0", "16"});
        atomic_write(dir + "/decay.csv", csv.str());
    }
    spit(dir + "/old.json", R"({"version": "polyroth 0.0", "I": 0.5})");
    REQUIRE(run_cli("report " + dir + "/decay.csv " + dir + "/old.json --out " + dir +
                    "/summary.json") == 0);
    json summary;
    std::ifstream(dir + "/summary.json") >> summary;
    REQUIRE(summary.at("decay_fits").size() == 1);
    CHECK(summary["decay_fits"][0]["gamma_hat"].get<double>() == Catch::Approx(0.5));
    CHECK(summary.at("warnings").size() == 1);  // the version mismatch

    // Empty bundle: exit 0, empty summary.
    REQUIRE(run_cli("report --out " + dir + "/empty.json") == 0);
    std::ifstream(dir + "/empty.json") >> summary;
    CHECK(summary.at("results").empty());
}

TEST_CASE("grid and interval-set json schemas") {
    const json g1{{"n", 4}, {"values", std::vector<double>(16, 0.25)}};
    const GridFunction f1 = grid_from_json(g1);
    CHECK(f1.integral().real() == Catch::Approx(0.25));

    const json g2{{"n", 6}, {"indicator", json::array({json::array({0.0, 0.5})})}};
    const GridFunction f2 = grid_from_json(g2);
    CHECK(f2.integral().real() == Catch::Approx(0.5));

    CHECK_THROWS_AS(grid_from_json(json{{"n", 4}, {"values", std::vector<double>(7, 1.0)}}),
                    precondition_error);

    const json s{{"N", 16.0}, {"intervals", json::array({json::array({0.0, 3.2}),
                                                         json::array({9.6, 16.0})})}};
    const IntervalSet set = interval_set_from_json(s);
    CHECK(set.horizon() == 16.0);
    CHECK(set.measure() == Catch::Approx(9.6));
    const json back = interval_set_to_json(set);
    CHECK(back.at("intervals").size() == 2);
}

TEST_CASE("config hash is stable and content-sensitive") {
    const json a{{"command", "scales"}, {"args", {{"gamma0", 10}}}};
    const json b{{"command", "scales"}, {"args", {{"gamma0", 11}}}};
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a) != config_hash(b));
}
