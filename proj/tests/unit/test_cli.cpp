#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "surfpde_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(SURFPDE_CLI) + " " + args + " > " + (workdir() / "last.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("nodes --surface sphere") == 1);
    CHECK(run("nodes --surface plane --n 10") == 1);
    CHECK(run("bench no-such-recipe") == 1);
    CHECK(run("discover --mode stationary --cloud /nonexistent --data /nonexistent") == 1);
}

TEST_CASE("nodes, discover and solve on a small sphere") {
    const std::string out = p("run");
    REQUIRE(run("nodes --surface sphere --n 200 --field exp-sum --pde helmholtz --output-dir " + out) == 0);
    CHECK(fs::exists(out + "/nodes.csv"));
    CHECK(fs::exists(out + "/data.csv"));
    CHECK(fs::exists(out + "/nodes.run.cfg"));
    REQUIRE(run("discover --mode stationary --cloud " + out + "/nodes.csv --data " + out +
                "/data.csv --normalize --output-dir " + out) == 0);
    const std::string log = slurp(p("last.log"));
    CHECK(log.find("Δ_S u") != std::string::npos);
    CHECK(log.find("# ") != std::string::npos);
    CHECK(fs::exists(out + "/model.txt"));
    CHECK(fs::exists(out + "/coefficients.csv"));
    CHECK(run("solve --model " + out + "/model.txt --cloud " + out + "/nodes.csv --data " + out +
              "/data.csv --reference --output-dir " + out) == 0);
    CHECK(fs::exists(out + "/solution.csv"));
}

TEST_CASE("config files feed options and unknown keys are rejected") {
    const std::string cfg = p("nodes.cfg");
    std::ofstream(cfg) << "[nodes]\nsurface=circle\nn=40\n";
    CHECK(run("nodes --config " + cfg + " --output-dir " + p("cfg")) == 0);
    CHECK(fs::exists(p("cfg") + "/nodes.csv"));
    // the saved run configuration replays, and flags still override it
    CHECK(run("nodes --config " + p("cfg") + "/nodes.run.cfg --n 25") == 0);
    CHECK(slurp(p("last.log")).find("N = 25") != std::string::npos);
    std::ofstream(cfg) << "[nodes]\nsurface=circle\nn=40\nbogus=1\n";
    CHECK(run("nodes --config " + cfg + " --output-dir " + p("cfg")) == 1);
}

TEST_CASE("the output directory can come from the environment") {
    const std::string dir = p("env");
    CHECK(run("nodes --surface circle --n 12 SURFPDE_IGNORED=1") == 1);
    const std::string cmd = "SURFPDE_OUTPUT_DIR=" + dir + " " + std::string(SURFPDE_CLI) +
                            " nodes --surface circle --n 12 > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir + "/nodes.csv"));
}

TEST_CASE("numerical failures exit with 2") {
    const std::string out = p("num");
    REQUIRE(run("nodes --surface sphere --n 60 --field z --output-dir " + out) == 0);
    // fourth-order features need m >= 4
    CHECK(run("discover --mode biharmonic --m 3 --cloud " + out + "/nodes.csv --data " + out +
              "/data.csv --output-dir " + out) == 2);
}

TEST_CASE("bench runs a quick recipe") {
    CHECK(run("bench ex1-circle --output-dir " + p("bench")) == 0);
    CHECK(fs::exists(p("bench") + "/bench_ex1-circle.csv"));
    CHECK(slurp(p("last.log")).find("PASS") != std::string::npos);
}
