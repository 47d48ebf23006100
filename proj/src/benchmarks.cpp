#include "ccbm/benchmarks.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "ccbm/block_system.hpp"
#include "ccbm/rng.hpp"

namespace ccbm {

namespace {

// exponential family shared by example1 (zeta = 1) and example3
Scalar exp_state(Scalar x, Scalar y, Scalar zeta) {
  return std::exp(std::sqrt(zeta) * x) * std::cos(y);
}
Scalar exp_outer_neumann(Scalar x, Scalar y, Scalar zeta) {
  const Scalar rz = std::sqrt(zeta);
  return std::exp(rz * x) * (rz * x * std::cos(y) - zeta * y * std::sin(y)) / 2;
}
Scalar exp_inner_neumann(Scalar x, Scalar y, Scalar zeta) {
  const Scalar rz = std::sqrt(zeta);
  return std::exp(rz * x) * (zeta * y * std::sin(y) - rz * x * std::cos(y));
}

}  // namespace

Case case_from_int(int id) {
  switch (id) {
    case 1:
      return Case::example1;
    case 2:
      return Case::example2;
    case 3:
      return Case::example3;
  }
  throw ParameterError("unknown benchmark case " + std::to_string(id));
}

std::string to_string(Case c) {
  switch (c) {
    case Case::example1:
      return "example1";
    case Case::example2:
      return "example2";
    case Case::example3:
      return "example3";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "gkb") return Method::gkb;
  if (name == "landweber") return Method::landweber;
  if (name == "cgls") return Method::cgls;
  throw ParameterError("unknown method '" + name + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::gkb:
      return "gkb";
    case Method::landweber:
      return "landweber";
    case Method::cgls:
      return "cgls";
  }
  return "unknown";
}

Scalar BenchmarkCase::outer_neumann(Scalar x, Scalar y) const {
  return id == Case::example2 ? x * x - y * y : exp_outer_neumann(x, y, zeta);
}
Scalar BenchmarkCase::outer_dirichlet(Scalar x, Scalar y) const {
  return id == Case::example2 ? x * x - y * y : exp_state(x, y, zeta);
}
Scalar BenchmarkCase::inner_neumann(Scalar x, Scalar y) const {
  return id == Case::example2 ? 2 * y * y - 2 * x * x : exp_inner_neumann(x, y, zeta);
}
Scalar BenchmarkCase::inner_dirichlet(Scalar x, Scalar y) const {
  return id == Case::example2 ? x * x - y * y : exp_state(x, y, zeta);
}

BenchmarkCase make_case(Case id, Scalar zeta) {
  if (id != Case::example3 && zeta != 1) {
    throw ParameterError("zeta is a parameter of example3 only");
  }
  if (!(zeta > 0)) throw ParameterError("zeta must be positive");
  return BenchmarkCase{id, zeta};
}

std::pair<CauchyData, BoundaryPair> evaluate_case(const BenchmarkCase& bc, const Mesh& mesh) {
  if (std::abs(mesh.r1 - 1) > 1e-9 || std::abs(mesh.r2 - 2) > 1e-9) {
    throw ParameterError("evaluate_case: the closed forms require mesh radii (1, 2)");
  }
  CauchyData data;
  const auto m = static_cast<Index>(mesh.gamma_m_nodes.size());
  data.neumann.resize(m);
  data.dirichlet.resize(m);
  for (Index i = 0; i < m; ++i) {
    const Vector2& p = mesh.nodes[mesh.gamma_m_nodes[static_cast<std::size_t>(i)]];
    data.neumann[i] = bc.outer_neumann(p.x(), p.y());
    data.dirichlet[i] = bc.outer_dirichlet(p.x(), p.y());
  }
  BoundaryPair truth;
  const auto u = static_cast<Index>(mesh.gamma_u_nodes.size());
  truth.neumann.resize(u);
  truth.dirichlet.resize(u);
  for (Index i = 0; i < u; ++i) {
    const Vector2& p = mesh.nodes[mesh.gamma_u_nodes[static_cast<std::size_t>(i)]];
    truth.neumann[i] = bc.inner_neumann(p.x(), p.y());
    truth.dirichlet[i] = bc.inner_dirichlet(p.x(), p.y());
  }
  return {std::move(data), std::move(truth)};
}

CauchyData add_noise(const Mesh& mesh, const CauchyData& data, Scalar delta_prime,
                     std::uint64_t seed) {
  if (delta_prime < 0) throw ParameterError("add_noise: delta_prime must be nonnegative");
  const auto m = static_cast<Index>(mesh.gamma_m_nodes.size());
  if (data.neumann.size() != m || data.dirichlet.size() != m) {
    throw ParameterError("add_noise: data length does not match gamma_m");
  }
  CauchyData noisy = data;
  noisy.delta_prime = delta_prime;
  noisy.delta = 0;
  if (delta_prime == 0) return noisy;
  for (Index i = 0; i < m; ++i) {
    const auto node = static_cast<std::uint64_t>(mesh.gamma_m_nodes[static_cast<std::size_t>(i)]);
    // one random field evaluated per point: the same factor perturbs both
    // components, so the noise stays a pointwise relative perturbation of
    // the measured pair
    const Scalar factor = 1 + delta_prime * 2 * (node_draw(seed, node, 0) - 0.5);
    noisy.neumann[i] *= factor;
    noisy.dirichlet[i] *= factor;
  }
  return noisy;
}

std::pair<Scalar, Scalar> relative_errors(const FemSystem& fem, const BoundaryPair& rec,
                                          const BoundaryPair& truth) {
  const BoundaryPair zero = BoundaryPair::zero(truth.size());
  const Scalar norm_n = norm_pair(fem, BoundaryPair(truth.neumann, zero.dirichlet));
  const Scalar norm_d = norm_pair(fem, BoundaryPair(zero.neumann, truth.dirichlet));
  if (norm_n == 0 || norm_d == 0) {
    throw ParameterError("relative_errors: zero-norm truth component");
  }
  const Scalar err_n =
      norm_pair(fem, BoundaryPair(Vector(rec.neumann - truth.neumann), zero.dirichlet)) / norm_n;
  const Scalar err_d =
      norm_pair(fem, BoundaryPair(zero.neumann, Vector(rec.dirichlet - truth.dirichlet))) /
      norm_d;
  return {err_n, err_d};
}

namespace {

struct Workspace {
  Mesh mesh;
  FemSystem fem;
  BlockFactor factor;
  Workspace(Mesh m, FemSystem f) : mesh(std::move(m)), fem(std::move(f)), factor(fem) {}
};

// Cells of an experiment grid share one immutable workspace per
// (resolution, zeta); kept for the process lifetime so sweeps do not
// refactorize.
std::shared_ptr<const Workspace> shared_workspace(int n_theta, int n_r, Scalar zeta) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, Scalar>, std::shared_ptr<const Workspace>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[std::make_tuple(n_theta, n_r, zeta)];
  if (!slot) {
    Mesh mesh = generate_annulus(1, 2, n_theta, n_r);
    FemSystem fem = assemble(mesh, zeta);
    slot = std::make_shared<const Workspace>(std::move(mesh), std::move(fem));
  }
  return slot;
}

struct PreparedProblem {
  std::shared_ptr<const Workspace> ws;
  BoundaryPair truth;
  Vector f_delta;
  Scalar delta = 0;
};

PreparedProblem prepare(const ExperimentConfig& cfg) {
  if (cfg.case_id != Case::example3 && cfg.zeta != 1) {
    throw ParameterError("run_experiment: zeta is a parameter of example3 only");
  }
  PreparedProblem prob;
  prob.ws = shared_workspace(cfg.n_theta, cfg.n_r, cfg.zeta);
  const BenchmarkCase bc = make_case(cfg.case_id, cfg.zeta);
  auto [exact, truth] = evaluate_case(bc, prob.ws->mesh);
  prob.truth = std::move(truth);
  const Vector f = compute_rhs(prob.ws->factor, prob.ws->fem, exact);
  if (cfg.delta_prime == 0) {
    prob.f_delta = f;
    prob.delta = 0;
  } else {
    const CauchyData noisy = add_noise(prob.ws->mesh, exact, cfg.delta_prime, cfg.seed);
    prob.f_delta = compute_rhs(prob.ws->factor, prob.ws->fem, noisy);
    prob.delta = norm_field(prob.ws->fem, prob.f_delta - f);
  }
  return prob;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const PreparedProblem prob = prepare(cfg);
  const CauchyOps ops = make_cauchy_ops(prob.ws->factor, prob.ws->fem);

  RunReport run;
  switch (cfg.method) {
    case Method::gkb:
      run = gkb_solve(ops, prob.f_delta, prob.delta, cfg.stopping, cfg.reorth);
      break;
    case Method::landweber:
      run = landweber_solve(ops, prob.f_delta, prob.delta, cfg.stopping);
      break;
    case Method::cgls:
      run = cgls_solve(ops, prob.f_delta, prob.delta, cfg.stopping);
      break;
  }

  ExperimentResult result;
  result.case_id = cfg.case_id;
  result.method = cfg.method;
  result.zeta = cfg.zeta;
  result.delta_prime = cfg.delta_prime;
  result.seed = cfg.seed;
  result.tau = cfg.stopping.tau;
  result.delta = prob.delta;
  std::tie(result.err_phi, result.err_t) =
      relative_errors(prob.ws->fem, run.phi_final, prob.truth);
  result.run = std::move(run);
  return result;
}

std::vector<CurvePoint> semiconvergence_curve(const ExperimentConfig& cfg, int k_max) {
  if (k_max < 1) throw ParameterError("semiconvergence_curve: k_max must be at least 1");
  const PreparedProblem prob = prepare(cfg);
  const CauchyOps ops = make_cauchy_ops(prob.ws->factor, prob.ws->fem);
  const FemSystem& fem = prob.ws->fem;

  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(k_max));
  StoppingConfig run_cfg = cfg.stopping;
  run_cfg.max_iter = k_max;
  gkb_solve(ops, prob.f_delta, /*delta=*/0, run_cfg, cfg.reorth, nullptr,
            [&](int k, const BoundaryPair& phi, Scalar residual) {
              auto [ep, et] = relative_errors(fem, phi, prob.truth);
              curve.push_back({k, ep, et, residual});
            });
  return curve;
}

std::vector<DiagnosticsRow> assumption_diagnostics(const ExperimentConfig& cfg, int k_max) {
  if (k_max < 1) throw ParameterError("assumption_diagnostics: k_max must be at least 1");
  const PreparedProblem prob = prepare(cfg);
  const CauchyOps ops = make_cauchy_ops(prob.ws->factor, prob.ws->fem);

  StoppingConfig run_cfg = cfg.stopping;
  run_cfg.max_iter = k_max;
  GkbState state;
  gkb_solve(ops, prob.f_delta, /*delta=*/0, run_cfg, cfg.reorth, &state);

  const int depth = std::min<int>(static_cast<int>(state.betas.size()),
                                  static_cast<int>(state.gammas.size()) - 1);
  const std::vector<Scalar> conds = gkb_condition_numbers(state, depth);
  std::vector<DiagnosticsRow> rows;
  rows.reserve(static_cast<std::size_t>(depth));
  for (int k = 1; k <= depth; ++k) {
    const Matrix g = bidiagonal_matrix(state.gammas, state.betas, k);
    const Scalar norm_g = singular_values(g).front();
    rows.push_back({k, state.gammas[static_cast<std::size_t>(k) - 1],
                    state.betas[static_cast<std::size_t>(k) - 1], norm_g,
                    conds[static_cast<std::size_t>(k) - 1]});
  }
  return rows;
}

namespace {

std::string fmt(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char kReportCsvHeader[] =
    "case,method,delta_prime,seed,tau,k_delta,err_phi,err_t,delta,stop_reason,wall_ms";

void write_report_csv(std::ostream& out, const std::vector<ExperimentResult>& rows,
                      bool include_timings) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.case_id) << ',' << to_string(r.method) << ',' << fmt(r.delta_prime) << ','
        << r.seed << ',' << fmt(r.tau) << ',' << r.run.k_delta << ',' << fmt(r.err_phi) << ','
        << fmt(r.err_t) << ',' << fmt(r.delta) << ',' << to_string(r.run.stop_reason) << ','
        << fmt(include_timings ? r.run.wall_ms : 0) << '\n';
  }
}

void write_report_json(std::ostream& out, const std::vector<ExperimentResult>& rows,
                       bool include_timings) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["case"] = to_string(r.case_id);
    j["method"] = to_string(r.method);
    j["zeta"] = r.zeta;
    j["delta_prime"] = r.delta_prime;
    j["seed"] = r.seed;
    j["tau"] = r.tau;
    j["k_delta"] = r.run.k_delta;
    j["err_phi"] = r.err_phi;
    j["err_t"] = r.err_t;
    j["delta"] = r.delta;
    j["stop_reason"] = to_string(r.run.stop_reason);
    j["wall_ms"] = include_timings ? r.run.wall_ms : 0;
    j["residual_history"] = r.run.residual_history;
    j["gammas"] = r.run.gammas;
    j["betas"] = r.run.betas;
    reports.push_back(std::move(j));
  }
  out << reports.dump(2) << '\n';
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& rows) {
  out << "k,err_phi,err_t,residual\n";
  for (const auto& r : rows) {
    out << r.k << ',' << fmt(r.err_phi) << ',' << fmt(r.err_t) << ',' << fmt(r.residual) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << "k,gamma,beta,norm_G,cond_G\n";
  for (const auto& r : rows) {
    out << r.k << ',' << fmt(r.gamma) << ',' << fmt(r.beta) << ',' << fmt(r.norm_G) << ','
        << fmt(r.cond_G) << '\n';
  }
}

}  // namespace ccbm
