#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* bin = std::getenv("AGGDIFF_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

int run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " > cli_stdout.log 2> cli_stderr.log";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_config(const fs::path& path, const std::string& extra_model = "sigma = 2.1") {
  std::ofstream out(path);
  out << "[domain]\ntype = \"torus\"\nlength = 1.0\ncells = 16\n"
      << "[model]\nkappa = 1.0\npotential = \"kuramoto\"\n"
      << extra_model << "\n"
      << "[initial]\nkind = \"cosine\"\namplitude = 0.2\nmode = 1\n"
      << "[time]\ndt_init = 0.0625\nt_max = 0.5\nnewton_tol = 1e-12\n"
      << "[output]\ndirectory = \"out_cli\"\nsnapshot_every = 2\n";
}

} // namespace

TEST_CASE("evolve subcommand") {
  fs::remove_all("out_cli_evolve");
  write_config("cli_evolve.cfg");
  CHECK(run("evolve --config cli_evolve.cfg --out out_cli_evolve") == 0);
  CHECK(fs::exists("out_cli_evolve/timeseries.csv"));
  CHECK(fs::exists("out_cli_evolve/final_state.dat"));
  CHECK(fs::exists("out_cli_evolve/snapshot_000000.dat"));
}

TEST_CASE("steady subcommand with a seed file") {
  fs::remove_all("out_cli_steady");
  write_config("cli_steady.cfg");
  // seed file: any positive profile on the 16-cell mesh
  {
    std::ofstream out("cli_seed.dat");
    for (int k = 0; k < 16; ++k)
      out << (k + 0.5) / 16.0 << " " << (k < 8 ? 3.0 : 0.1) << "\n";
  }
  CHECK(run("steady --config cli_steady.cfg --out out_cli_steady --seed-file cli_seed.dat") == 0);
  CHECK(fs::exists("out_cli_steady/steady_summary.txt"));
  CHECK(fs::exists("out_cli_steady/fixedpoint_0.dat"));
}

TEST_CASE("compare subcommand") {
  fs::remove_all("out_cli_compare");
  write_config("cli_compare.cfg");
  CHECK(run("compare --config cli_compare.cfg --out out_cli_compare") == 0);
  CHECK(fs::exists("out_cli_compare/sg/timeseries.csv"));
  CHECK(fs::exists("out_cli_compare/upwind/timeseries.csv"));
  CHECK(fs::exists("out_cli_compare/gap_compare.csv"));
}

TEST_CASE("check subcommand") {
  fs::remove_all("out_cli_check");
  write_config("cli_check.cfg");
  CHECK(run("check --config cli_check.cfg --out out_cli_check") == 0);
}

TEST_CASE("check exits 1 when an invariant fails") {
  fs::remove_all("out_cli_check_bad");
  std::ofstream out("cli_check_bad.cfg");
  out << "[domain]\ntype = \"torus\"\nlength = 1.0\ncells = 16\n"
      << "[model]\nkappa = 1.0\npotential = \"kuramoto\"\nsigma = 2.1\n"
      << "[initial]\nkind = \"cosine\"\namplitude = 0.2\nmode = 1\n"
      << "[time]\ndt_init = 0.0625\nt_max = 0.5\nnewton_tol = 1e-3\n" // too loose
      << "[output]\ndirectory = \"out_cli_check_bad\"\n";
  out.close();
  CHECK(run("check --config cli_check_bad.cfg") == 1);
}

TEST_CASE("configuration errors exit with status 2") {
  write_config("cli_bad.cfg", "sigma = 2.1\nkapa = 1.0"); // unknown key
  CHECK(run("evolve --config cli_bad.cfg") == 2);
  CHECK(run("evolve --config no_such_file.cfg") == 2);
}

TEST_CASE("missing subcommand or flags fail") {
  CHECK(run("") != 0);
  CHECK(run("evolve") != 0);
}
