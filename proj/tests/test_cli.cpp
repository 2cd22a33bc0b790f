// Runs the command-line tool as a child process.

#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path path;
  Scratch() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("renewcast_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(RENEWCAST_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

const std::string kSmoke = "run --dataset synthetic --families dnn --ratios 0.2 --k 2 --seed 7 --synthetic-rows 1200 -q";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("smoke run writes one model row") {
    Scratch dir;
    const auto out = dir.path / "out";
    REQUIRE(cli(kSmoke + " --out " + out.string()) == 0);
    const auto metrics = slurp(out / "metrics.csv");
    CHECK(line_count(metrics) == 2);
    CHECK(metrics.rfind("model,ratio,train_rmse,train_rmse_ci,val_rmse,val_rmse_ci\n", 0) == 0);
    CHECK(metrics.find("\nDNN,0.2,") != std::string::npos);
    for (const char* f : {"manifest.json", "friedman.csv", "metrics_all.csv", "plots/dnn_0.2.svg", "parameters.csv",
                          "stationarity.csv", "descriptive.csv", "mutual_information.csv"}) {
      CHECK_MESSAGE(fs::exists(out / f), f);
    }
  }

  TEST_CASE("configuration errors exit 2 before anything is written") {
    Scratch dir;
    const auto out = dir.path / "out";
    CHECK(cli("run --dataset synthetic --families dnn --ratios 1.5 --seed 7 --out " + out.string()) == 2);
    CHECK(!fs::exists(out));
    CHECK(cli("run --dataset synthetic --families dnn --out " + out.string()) == 2);  // no seed
    CHECK(cli("run --dataset synthetic --families nonsense --seed 1 --out " + out.string()) == 2);
    CHECK(cli("run --no-such-flag --seed 1 --out " + out.string()) == 2);
    CHECK(cli("run --dataset dataset2 --dataset2-csv " + (dir.path / "absent.csv").string() + " --seed 1 --out " +
              out.string()) == 2);
    CHECK(!fs::exists(out));
    CHECK(cli("report --out " + out.string() + " --seed 1") == 2);  // no manifest yet
  }

  TEST_CASE("same seed gives byte-identical outputs") {
    Scratch dir;
    const auto out = dir.path / "out";
    REQUIRE(cli(kSmoke + " --out " + out.string()) == 0);
    const auto metrics = slurp(out / "metrics.csv");
    const auto manifest = slurp(out / "manifest.json");
    const auto all = slurp(out / "metrics_all.csv");
    fs::remove_all(out);
    REQUIRE(cli(kSmoke + " --out " + out.string()) == 0);
    CHECK(slurp(out / "metrics.csv") == metrics);
    CHECK(slurp(out / "manifest.json") == manifest);
    CHECK(slurp(out / "metrics_all.csv") == all);

    // Re-emitting from the manifest reproduces the tables.
    fs::remove(out / "metrics.csv");
    REQUIRE(cli("report --seed 7 --out " + out.string()) == 0);
    CHECK(slurp(out / "metrics.csv") == metrics);
  }

  TEST_CASE("inspect writes the statistics tables only") {
    Scratch dir;
    const auto out = dir.path / "out";
    REQUIRE(cli("inspect --dataset synthetic --synthetic-rows 800 --seed 3 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "stationarity.csv"));
    CHECK(fs::exists(out / "descriptive.csv"));
    CHECK(!fs::exists(out / "metrics.csv"));
  }
}
