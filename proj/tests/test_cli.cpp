#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(GLENN_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("glenn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("dump defaults") {
    const fs::path dir = fresh_dir("dump");
    const Result r = run("config --dump-defaults", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("[problem]") != std::string::npos);
    CHECK(r.out.find("model = reduced") != std::string::npos);

    // The dump is itself a valid configuration.
    write(dir / "defaults.ini", r.out);
    const Result solve = run("solve --config " + (dir / "defaults.ini").string() + " --mesh-n 2 --kappa 10 --out " +
                                 (dir / "out").string(),
                             dir);
    CHECK(solve.code == 0);
  }

  TEST_CASE("solve, train, hybrid and export") {
    const fs::path dir = fresh_dir("flow");
    write(dir / "run.ini",
          "[problem]\nmodel = reduced\n[run]\ninitial = phi1,phi2\n[solver]\ntol = 1e-9\n"
          "[network]\nwidth = 8\nblocks = 2\n[train]\nbatch_size = 32\nsteps_per_epoch = 10\nepochs = 2\n"
          "warmup_steps = 2\n");
    const std::string common = "--config " + (dir / "run.ini").string() + " --mesh-n 4 --out " + (dir / "o").string();

    const Result solve = run("solve " + common + " --kappa 5,10", dir);
    REQUIRE(solve.code == 0);
    const std::string table = slurp(dir / "o" / "energies.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
    for (const char* f : {"history_phi1_5.csv", "history_phi2_10.csv", "field_phi1_10.vtk", "field_phi2_5.vtk"}) {
      CHECK(fs::exists(dir / "o" / f));
    }

    const Result train = run("train " + common + " --seed 7", dir);
    REQUIRE(train.code == 0);
    CHECK(fs::exists(dir / "o" / "checkpoint.glenn"));
    CHECK(fs::exists(dir / "o" / "train_history.csv"));
    const std::string first_history = slurp(dir / "o" / "train_history.csv");
    REQUIRE(run("train " + common + " --seed 7", dir).code == 0);
    CHECK(slurp(dir / "o" / "train_history.csv") == first_history);

    const Result hybrid = run("hybrid " + common + " --kappa 10", dir);
    CHECK(hybrid.code == 0);
    CHECK(slurp(dir / "o" / "energies.csv").find("nn,10,") != std::string::npos);
    CHECK(fs::exists(dir / "o" / "field_nn_10.vtk"));

    const Result hybrid_out = run("hybrid " + common + " --kappa 40", dir);
    CHECK(hybrid_out.code == 0);
    CHECK(hybrid_out.err.find("warning") != std::string::npos);

    const Result exp = run("export " + common + " --kappa 10", dir);
    CHECK(exp.code == 0);
    CHECK(fs::exists(dir / "o" / "density_phi1_10.csv"));
  }

  TEST_CASE("errors exit nonzero with a diagnostic") {
    const fs::path dir = fresh_dir("errors");
    write(dir / "bad.ini", "[problem]\nmodel = sideways\n");
    const Result bad = run("solve --config " + (dir / "bad.ini").string(), dir);
    CHECK(bad.code != 0);
    CHECK(bad.err.find("model") != std::string::npos);

    const Result missing = run("solve --config " + (dir / "nope.ini").string(), dir);
    CHECK(missing.code != 0);
    CHECK_FALSE(missing.err.empty());

    const Result no_ckpt = run("hybrid --mesh-n 2 --out " + (dir / "empty").string(), dir);
    CHECK(no_ckpt.code != 0);
    CHECK(no_ckpt.err.find("checkpoint") != std::string::npos);

    const Result bad_kappa = run("solve --kappa 10,x --mesh-n 2 --out " + (dir / "k").string(), dir);
    CHECK(bad_kappa.code != 0);
    CHECK(bad_kappa.err.find("kappa") != std::string::npos);

    const Result none = run("", dir);
    CHECK(none.code != 0);
  }
}
