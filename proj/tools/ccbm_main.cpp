#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ccbm/benchmarks.hpp"
#include "ccbm/mesh.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOptions {
  int case_id = 1;
  double zeta = 1;
  int n_theta = 100;
  int n_r = 18;
  double noise = 0;
  std::uint64_t seed = 42;
  std::string method = "gkb";
  double tau = 1.01;
  int max_iter = 2000;
  int k_max = 25;
  std::string config_path;
  std::string out_dir = ".";
  bool timings = false;
};

// Registers the experiment flags shared by run/compare/diagnose and returns
// the option handles needed for config-file merging.
std::vector<CLI::Option*> add_experiment_flags(CLI::App* cmd, CliOptions& opt) {
  std::vector<CLI::Option*> handles;
  handles.push_back(cmd->add_option("--case", opt.case_id, "Benchmark case (1, 2 or 3)")
                        ->check(CLI::Range(1, 3)));
  handles.push_back(cmd->add_option("--zeta", opt.zeta, "Diffusion ratio (case 3 only)"));
  handles.push_back(cmd->add_option("--ntheta", opt.n_theta, "Angular resolution"));
  handles.push_back(cmd->add_option("--nr", opt.n_r, "Radial resolution"));
  handles.push_back(cmd->add_option("--noise", opt.noise, "Relative noise level delta'"));
  handles.push_back(cmd->add_option("--seed", opt.seed, "Noise seed"));
  handles.push_back(cmd->add_option("--method", opt.method, "gkb, landweber or cgls"));
  handles.push_back(cmd->add_option("--tau", opt.tau, "Discrepancy factor (> 1)"));
  handles.push_back(cmd->add_option("--max-iter", opt.max_iter, "Iteration cap"));
  handles.push_back(cmd->add_option("--kmax", opt.k_max, "Diagnostic iteration depth"));
  cmd->add_option("--config", opt.config_path, "JSON config file; flags take precedence");
  cmd->add_option("--out", opt.out_dir, "Output directory");
  cmd->add_flag("--timings", opt.timings, "Record wall-clock times in reports");
  return handles;
}

// Config keys mirror the flag names; a flag given on the command line wins
// over the file value, unknown keys are rejected.
void merge_config_file(const CliOptions& opt, const std::vector<CLI::Option*>& handles,
                       CliOptions& out) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw ccbm::ParameterError("cannot open config file " + opt.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ccbm::ParameterError("config file " + opt.config_path + ": " + e.what());
  }
  if (!j.is_object()) throw ccbm::ParameterError("config file must hold a JSON object");

  auto handle = [&handles](const std::string& flag) -> const CLI::Option* {
    for (const auto* h : handles) {
      if (h->get_name() == "--" + flag) return h;
    }
    return nullptr;
  };
  for (const auto& [key, value] : j.items()) {
    const CLI::Option* h = handle(key == "max_iter" ? "max-iter" : key);
    if (h == nullptr) throw ccbm::ParameterError("config file: unknown key '" + key + "'");
    if (h->count() > 0) continue;  // flag wins
    try {
      if (key == "case") {
        out.case_id = value.get<int>();
      } else if (key == "zeta") {
        out.zeta = value.get<double>();
      } else if (key == "ntheta") {
        out.n_theta = value.get<int>();
      } else if (key == "nr") {
        out.n_r = value.get<int>();
      } else if (key == "noise") {
        out.noise = value.get<double>();
      } else if (key == "seed") {
        out.seed = value.get<std::uint64_t>();
      } else if (key == "method") {
        out.method = value.get<std::string>();
      } else if (key == "tau") {
        out.tau = value.get<double>();
      } else if (key == "max_iter") {
        out.max_iter = value.get<int>();
      } else if (key == "kmax") {
        out.k_max = value.get<int>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ccbm::ParameterError("config file: bad value for '" + key + "': " + e.what());
    }
  }
}

ccbm::ExperimentConfig to_experiment_config(const CliOptions& opt) {
  ccbm::ExperimentConfig cfg;
  cfg.case_id = ccbm::case_from_int(opt.case_id);
  cfg.zeta = opt.zeta;
  cfg.n_theta = opt.n_theta;
  cfg.n_r = opt.n_r;
  cfg.delta_prime = opt.noise;
  cfg.seed = opt.seed;
  cfg.method = ccbm::method_from_string(opt.method);
  cfg.stopping.tau = opt.tau;
  cfg.stopping.max_iter = opt.max_iter;
  return cfg;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) throw ccbm::ParameterError("cannot write " + path.string());
  writer(out);
}

int run_mesh(double r1, double r2, int n_theta, int n_r, const std::string& out_path) {
  const ccbm::Mesh mesh = ccbm::generate_annulus(r1, r2, n_theta, n_r);
  ccbm::write_mesh(mesh, out_path);
  std::cout << "wrote " << out_path << " (" << mesh.node_count() << " nodes, "
            << mesh.triangle_count() << " triangles, h = " << mesh.h << ")\n";
  return 0;
}

int run_single(const CliOptions& opt) {
  const auto cfg = to_experiment_config(opt);
  const std::vector<ccbm::ExperimentResult> rows = {ccbm::run_experiment(cfg)};
  fs::create_directories(opt.out_dir);
  write_file(fs::path(opt.out_dir) / "report.csv",
             [&](std::ostream& o) { ccbm::write_report_csv(o, rows, opt.timings); });
  write_file(fs::path(opt.out_dir) / "report.json",
             [&](std::ostream& o) { ccbm::write_report_json(o, rows, opt.timings); });
  std::cout << "k = " << rows[0].run.k_delta << ", err_phi = " << rows[0].err_phi
            << ", err_t = " << rows[0].err_t << ", stop = "
            << ccbm::to_string(rows[0].run.stop_reason) << '\n';
  return 0;
}

int run_compare(const CliOptions& opt) {
  auto cfg = to_experiment_config(opt);
  std::vector<ccbm::ExperimentResult> rows;
  for (ccbm::Method m : {ccbm::Method::gkb, ccbm::Method::cgls, ccbm::Method::landweber}) {
    cfg.method = m;  // identical data: the noise seed is fixed per cell
    rows.push_back(ccbm::run_experiment(cfg));
  }
  fs::create_directories(opt.out_dir);
  write_file(fs::path(opt.out_dir) / "compare.csv",
             [&](std::ostream& o) { ccbm::write_report_csv(o, rows, opt.timings); });
  write_file(fs::path(opt.out_dir) / "compare.json",
             [&](std::ostream& o) { ccbm::write_report_json(o, rows, opt.timings); });
  for (const auto& r : rows) {
    std::cout << ccbm::to_string(r.method) << ": k = " << r.run.k_delta
              << ", err_phi = " << r.err_phi << ", err_t = " << r.err_t << '\n';
  }
  return 0;
}

int run_diagnose(const CliOptions& opt) {
  auto cfg = to_experiment_config(opt);
  cfg.method = ccbm::Method::gkb;
  const auto diagnostics = ccbm::assumption_diagnostics(cfg, opt.k_max);
  const auto curve = ccbm::semiconvergence_curve(cfg, opt.k_max);
  fs::create_directories(opt.out_dir);
  write_file(fs::path(opt.out_dir) / "diagnostics.csv",
             [&](std::ostream& o) { ccbm::write_diagnostics_csv(o, diagnostics); });
  write_file(fs::path(opt.out_dir) / "semiconvergence.csv",
             [&](std::ostream& o) { ccbm::write_curve_csv(o, curve); });
  std::cout << "wrote diagnostics.csv and semiconvergence.csv (" << diagnostics.size()
            << " steps)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cauchy data completion on the annulus: bidiagonalization solver with "
               "discrepancy stopping, Landweber and CGLS baselines"};
  app.require_subcommand(1);

  // mesh
  double r1 = 1, r2 = 2;
  int mesh_ntheta = 100, mesh_nr = 18;
  std::string mesh_out;
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Generate an annulus mesh file");
  mesh_cmd->add_option("--r1", r1, "Inner radius");
  mesh_cmd->add_option("--r2", r2, "Outer radius");
  mesh_cmd->add_option("--ntheta", mesh_ntheta, "Angular resolution");
  mesh_cmd->add_option("--nr", mesh_nr, "Radial resolution");
  mesh_cmd->add_option("--out", mesh_out, "Output mesh file")->required();

  CliOptions run_opt, cmp_opt, diag_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one benchmark experiment");
  auto run_handles = add_experiment_flags(run_cmd, run_opt);
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Run all three methods on identical data");
  auto cmp_handles = add_experiment_flags(cmp_cmd, cmp_opt);
  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "Emit recurrence diagnostics and per-step error curves");
  auto diag_handles = add_experiment_flags(diag_cmd, diag_opt);

  try {
    app.parse(argc, argv);
    if (mesh_cmd->parsed()) return run_mesh(r1, r2, mesh_ntheta, mesh_nr, mesh_out);
    if (run_cmd->parsed()) {
      merge_config_file(run_opt, run_handles, run_opt);
      return run_single(run_opt);
    }
    if (cmp_cmd->parsed()) {
      merge_config_file(cmp_opt, cmp_handles, cmp_opt);
      return run_compare(cmp_opt);
    }
    if (diag_cmd->parsed()) {
      merge_config_file(diag_opt, diag_handles, diag_opt);
      return run_diagnose(diag_opt);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ccbm::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ccbm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
