// End-to-end tests of the conscli executable: exit codes, output schemas and
// seed reproducibility.

#include "consensus/config.hpp"
#include "consensus/runner.hpp"
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace consensus;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("conscli_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CONSCLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_reference_config(const fs::path& p, std::uint64_t seed) {
    const auto cfg = cli::reference_config(seed);
    std::ofstream out(p);
    out << cfg.to_toml();
}

}  // namespace

TEST_CASE("cli: reproduce-example emits the full artifact bundle") {
    TempDir tmp;
    const fs::path out = tmp.path / "bundle";
    REQUIRE(run_cli("reproduce-example --seed 3 --out " + out.string()) == 0);
    for (const char* name :
         {"trajectory.csv", "error.csv", "sigma.csv", "summary.txt", "config.toml"}) {
        CHECK(fs::exists(out / name));
    }
    const std::string summary = slurp(out / "summary.txt");
    CHECK(summary.find("phi_check_pass = true") != std::string::npos);
    CHECK(summary.find("error_decayed = true") != std::string::npos);

    // header row and strictly increasing time column
    std::ifstream csv(out / "trajectory.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("t,w1_1,w1_2,", 0) == 0);
    double prev = -1.0;
    std::string line;
    while (std::getline(csv, line)) {
        const double t = std::stod(line.substr(0, line.find(',')));
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("cli: identical seeds give byte-identical outputs") {
    TempDir tmp;
    const fs::path a = tmp.path / "a";
    const fs::path b = tmp.path / "b";
    REQUIRE(run_cli("reproduce-example --seed 11 --out " + a.string()) == 0);
    REQUIRE(run_cli("reproduce-example --seed 11 --out " + b.string()) == 0);
    for (const char* name : {"trajectory.csv", "error.csv", "sigma.csv", "summary.txt"}) {
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const fs::path c = tmp.path / "c";
    REQUIRE(run_cli("reproduce-example --seed 12 --out " + c.string()) == 0);
    CHECK(slurp(a / "trajectory.csv") != slurp(c / "trajectory.csv"));
}

TEST_CASE("cli: synth and simulate run from a config file") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "exp.toml";
    write_reference_config(cfg_path, 5);
    CHECK(run_cli("synth --config " + cfg_path.string() + " --out " +
                  (tmp.path / "s").string()) == 0);
    CHECK(fs::exists(tmp.path / "s" / "synth.txt"));
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --engine ode --out " +
                  (tmp.path / "r").string()) == 0);
    CHECK(fs::exists(tmp.path / "r" / "error.csv"));
    CHECK(run_cli("verify --config " + cfg_path.string() + " --out " +
                  (tmp.path / "v").string()) == 0);
    CHECK(fs::exists(tmp.path / "v" / "certificate.txt"));
    CHECK(fs::exists(tmp.path / "v" / "contraction.csv"));
}

TEST_CASE("cli: config errors exit with code 2") {
    TempDir tmp;
    const fs::path bad = tmp.path / "bad.toml";
    std::ofstream(bad) << "[model]\nA = [[1, 2]]\n";  // non-square, missing fields
    CHECK(run_cli("synth --config " + bad.string()) == 2);

    const fs::path missing = tmp.path / "missing.toml";
    CHECK(run_cli("synth --config " + missing.string()) == 2);
}

TEST_CASE("cli: infeasible synthesis exits with code 3") {
    TempDir tmp;
    auto cfg = cli::reference_config(1);
    cfg.graphs[0].second.setZero();  // disconnect the first graph
    const fs::path p = tmp.path / "disc.toml";
    std::ofstream(p) << cfg.to_toml();
    CHECK(run_cli("synth --config " + p.string() + " --out " + (tmp.path / "o").string()) ==
          3);
}

TEST_CASE("cli: divergence exits with code 4") {
    TempDir tmp;
    config::ExperimentConfig cfg;
    cfg.A = Matrix::Constant(1, 1, 40.0);
    cfg.B = Matrix::Identity(1, 1);
    Matrix K = Matrix::Zero(1, 1);
    cfg.K = K;
    cfg.gamma = std::vector<double>{1e-3};
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = 1.0;
    w(1, 0) = 1.0;
    cfg.graphs.emplace_back("G", w);
    cfg.horizon = 60.0;
    cfg.w0 = Matrix::Zero(2, 1);
    cfg.w0(0, 0) = 1.0;
    cfg.w0(1, 0) = -1.0;
    const fs::path p = tmp.path / "diverge.toml";
    std::ofstream(p) << cfg.to_toml();
    CHECK(run_cli("simulate --config " + p.string() + " --out " +
                  (tmp.path / "d").string()) == 4);
}

TEST_CASE("runner: boundary gains produce a flagged non-decaying error") {
    TempDir tmp;
    config::ExperimentConfig cfg;
    cfg.A = Matrix::Constant(1, 1, 0.2);
    cfg.B = Matrix::Identity(1, 1);
    cfg.K = Matrix(Matrix::Constant(1, 1, -1.2));  // A + BK = -1
    cfg.gamma = std::vector<double>{1.0};          // exactly lambda_A / lambda2
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = 0.1;
    w(1, 0) = 0.1;  // lambda2 = 0.2
    cfg.graphs.emplace_back("G", w);
    cfg.horizon = 50.0;
    cfg.w0 = Matrix::Zero(2, 1);
    cfg.w0(0, 0) = 1.0;
    cfg.w0(1, 0) = -1.0;  // the lambda2 eigenvector

    std::ostringstream log;
    const auto outcome = cli::run_simulate(cfg, log, (tmp.path / "b").string());
    CHECK(outcome.ratio > 0.2);  // nowhere near consensus
    const std::string summary = slurp(tmp.path / "b" / "summary.txt");
    CHECK(summary.find("error_decayed = false") != std::string::npos);
}

TEST_CASE("runner: stable model synthesizes unit gains and passes vacuously") {
    TempDir tmp;
    config::ExperimentConfig cfg;
    cfg.A.resize(2, 2);
    cfg.A << 0.0, 1.0, -2.0, -3.0;  // eigenvalues -1, -2
    cfg.B = Matrix::Identity(2, 2);
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = w(1, 0) = 1.0;
    w(1, 2) = w(2, 1) = 1.0;
    cfg.graphs.emplace_back("ring", w);
    cfg.w0 = Matrix::Zero(3, 2);
    cfg.w0 << 1.0, 0.0, -1.0, 2.0, 0.5, -0.5;

    std::ostringstream log;
    const auto rep = cli::run_synth(cfg, log, (tmp.path / "s").string());
    CHECK(rep.gamma == std::vector<double>{1.0, 1.0});
    CHECK(rep.gamma_designed);
    CHECK(rep.unstable_count == 0);
    CHECK(rep.all_pass);
}

TEST_CASE("runner: synthesized uniform gains satisfy the strict check on the reference family") {
    TempDir tmp;
    auto cfg = cli::reference_config(2);
    cfg.gamma.reset();  // force synthesis
    cfg.strict_jordan = true;
    std::ostringstream log;
    const auto rep = cli::run_synth(cfg, log, (tmp.path / "s").string());
    REQUIRE(rep.gamma.size() == 2);
    CHECK(rep.gamma[0] == rep.gamma[1]);  // one gain across the Jordan block
    CHECK(rep.gamma[0] > 0.1 / 0.141288650192627);
    CHECK(rep.switching.pass);
    CHECK(rep.all_pass);
}

TEST_CASE("cli: --seed overrides the config seed") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "exp.toml";
    write_reference_config(cfg_path, 5);
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --seed 21 --out " +
                    (tmp.path / "a").string()) == 0);
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --seed 21 --out " +
                    (tmp.path / "b").string()) == 0);
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --out " +
                    (tmp.path / "c").string()) == 0);
    CHECK(slurp(tmp.path / "a" / "trajectory.csv") == slurp(tmp.path / "b" / "trajectory.csv"));
    CHECK(slurp(tmp.path / "a" / "trajectory.csv") != slurp(tmp.path / "c" / "trajectory.csv"));
    CHECK(slurp(tmp.path / "a" / "summary.txt").find("seed = 21") != std::string::npos);
}

TEST_CASE("cli: engine=both records the cross-engine delta") {
    TempDir tmp;
    auto cfg = cli::reference_config(9);
    cfg.gamma = std::vector<double>{2.5, 2.5};  // uniform: the closed form applies
    const fs::path p = tmp.path / "both.toml";
    std::ofstream(p) << cfg.to_toml();
    REQUIRE(run_cli("simulate --config " + p.string() + " --engine both --out " +
                    (tmp.path / "o").string()) == 0);
    CHECK(fs::exists(tmp.path / "o" / "modal.csv"));
    const std::string summary = slurp(tmp.path / "o" / "summary.txt");
    const auto pos = summary.find("cross_engine_delta = ");
    REQUIRE(pos != std::string::npos);
    const double delta = std::stod(summary.substr(pos + 21));
    CHECK(delta < 1e-4);
}

TEST_CASE("cli: strict-jordan flag flips the synth verdict for the reference gains") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "exp.toml";
    write_reference_config(cfg_path, 5);
    CHECK(run_cli("synth --config " + cfg_path.string() + " --strict-jordan on --out " +
                  (tmp.path / "s1").string()) == 3);
    CHECK(run_cli("synth --config " + cfg_path.string() + " --strict-jordan off --out " +
                  (tmp.path / "s2").string()) == 0);
}
