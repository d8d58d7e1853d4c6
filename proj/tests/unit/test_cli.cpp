#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(STRAINSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("exit codes") {
  const auto out = std::filesystem::temp_directory_path() / "strainsim-cli-test";
  std::filesystem::remove_all(out);
  CHECK(run("list") == 0);
  CHECK(run("sim power-budget --out " + out.string()) == 0);
  CHECK(std::filesystem::exists(out / "power-budget" / "summary.json"));
  CHECK(run("report --in " + out.string()) == 0);
  CHECK(run("sim no-such-scenario --out " + out.string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("sim power-budget --set version=7 --out " + out.string()) == 3);
  CHECK(run("sim power-budget --set badkey --out " + out.string()) == 2);
  CHECK(run("sim ac-broadening --set scenarios.ac-broadening.v_ac=1e6 --out " + out.string()) == 4);
  CHECK(run("sim power-budget --config /nonexistent.json --out " + out.string()) == 3);
  std::filesystem::remove_all(out);
}

TEST_CASE("fit subcommand") {
  const auto dir = std::filesystem::temp_directory_path() / "strainsim-cli-fit";
  std::filesystem::remove_all(dir);
  CHECK(run("sim sideband-comb --out " + dir.string()) == 0);
  const auto csv = (dir / "sideband-comb" / "sideband_0p5v.csv").string();
  CHECK(run("fit sideband --drive-mhz 1000 --g-orb-hz 10000 --in " + csv) == 0);
  CHECK(run("fit sideband --in " + csv) == 2);
  CHECK(run("fit lorentzian --in /nonexistent.csv") == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config from the environment") {
  const std::string cmd = "STRAINSIM_CONFIG=/nonexistent.json " + std::string(STRAINSIM_CLI_PATH) +
                          " sim power-budget --out /tmp/strainsim-cli-env >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 3);
}
