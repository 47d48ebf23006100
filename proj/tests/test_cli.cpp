#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return CCBM_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ccbm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// rows keyed by method name, fields keyed by header column
std::map<std::string, std::map<std::string, std::string>> parse_report(const fs::path& csv) {
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  std::map<std::string, std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string cell;
      std::getline(ls, cell, ',');
      row[header[i]] = cell;
    }
    rows[row["method"]] = row;
  }
  return rows;
}

}  // namespace

TEST_CASE("cli mesh subcommand writes the native format") {
  const fs::path dir = fresh_dir("mesh");
  const fs::path file = dir / "mesh.txt";
  REQUIRE(run_cli("mesh --r1 1 --r2 2 --ntheta 4 --nr 1 --out " + file.string()) == 0);
  const std::string text = slurp(file);
  CHECK(text.rfind("8 8\n", 0) == 0);
  CHECK(text.find("gamma_m:") != std::string::npos);
  CHECK(text.find("gamma_u:") != std::string::npos);
}

TEST_CASE("cli run subcommand produces a report in band") {
  const fs::path dir = fresh_dir("run");
  REQUIRE(run_cli("run --case 2 --noise 0.01 --seed 7 --method gkb --out " + dir.string()) == 0);
  auto rows = parse_report(dir / "report.csv");
  REQUIRE(rows.count("gkb") == 1);
  CHECK(std::stod(rows["gkb"]["err_phi"]) <= 1e-2);
  CHECK(std::stoi(rows["gkb"]["k_delta"]) <= 8);
  CHECK(rows["gkb"]["case"] == "example2");
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("cli compare runs the three methods on identical data") {
  const fs::path dir = fresh_dir("compare");
  REQUIRE(run_cli("compare --case 1 --noise 0.01 --seed 7 --out " + dir.string()) == 0);
  auto rows = parse_report(dir / "compare.csv");
  REQUIRE(rows.size() == 3);
  const double err_gkb = std::stod(rows["gkb"]["err_phi"]);
  const double err_cg = std::stod(rows["cgls"]["err_phi"]);
  CHECK(std::abs(err_gkb - err_cg) <= 0.05 * err_cg);
  CHECK(std::stoi(rows["landweber"]["k_delta"]) >= 5 * std::stoi(rows["gkb"]["k_delta"]));
  // identical noise level on all three rows
  CHECK(rows["gkb"]["delta"] == rows["cgls"]["delta"]);
  CHECK(rows["gkb"]["delta"] == rows["landweber"]["delta"]);
}

TEST_CASE("cli outputs are bit-identical across repeated invocations") {
  const fs::path dir_a = fresh_dir("determinism_a");
  const fs::path dir_b = fresh_dir("determinism_b");
  const std::string flags = "run --case 2 --noise 0.05 --seed 11 --ntheta 24 --nr 3 --out ";
  REQUIRE(run_cli(flags + dir_a.string()) == 0);
  REQUIRE(run_cli(flags + dir_b.string()) == 0);
  CHECK(slurp(dir_a / "report.csv") == slurp(dir_b / "report.csv"));
  CHECK(slurp(dir_a / "report.json") == slurp(dir_b / "report.json"));
}

TEST_CASE("cli diagnose writes both diagnostic tables") {
  const fs::path dir = fresh_dir("diagnose");
  REQUIRE(run_cli("diagnose --case 1 --noise 0.01 --kmax 5 --ntheta 24 --nr 3 --out " +
                  dir.string()) == 0);
  CHECK(slurp(dir / "diagnostics.csv").rfind("k,gamma,beta,norm_G,cond_G\n", 0) == 0);
  CHECK(slurp(dir / "semiconvergence.csv").rfind("k,err_phi,err_t,residual\n", 0) == 0);
}

TEST_CASE("cli config file merges under explicit flags") {
  const fs::path dir = fresh_dir("config");
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"case": 2, "noise": 0.05, "seed": 11, "ntheta": 24, "nr": 3, "method": "gkb"})";
  }
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  REQUIRE(run_cli("run --config " + cfg.string() + " --out " + out_a.string()) == 0);
  auto rows_a = parse_report(out_a / "report.csv");
  CHECK(rows_a["gkb"]["case"] == "example2");
  CHECK(std::stod(rows_a["gkb"]["delta_prime"]) == 0.05);

  // the flag wins over the file value
  REQUIRE(run_cli("run --config " + cfg.string() + " --noise 0.01 --out " + out_b.string()) == 0);
  auto rows_b = parse_report(out_b / "report.csv");
  CHECK(std::stod(rows_b["gkb"]["delta_prime"]) == 0.01);
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("run --case 9 2> /dev/null") == 1);            // out-of-range flag
  CHECK(run_cli("mesh --r1 2 --r2 1 --out /tmp/ccbm_bad_mesh.txt 2> /dev/null") == 1);
  CHECK(run_cli("run --case 1 --method nope --out /tmp 2> /dev/null") == 1);

  const fs::path dir = fresh_dir("badcfg");
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"unknown_key": 1})";
  }
  CHECK(run_cli("run --config " + cfg.string() + " --out " + dir.string() + " 2> /dev/null") == 1);
}
