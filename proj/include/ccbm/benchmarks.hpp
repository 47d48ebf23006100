#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ccbm/mesh.hpp"
#include "ccbm/operators.hpp"
#include "ccbm/solvers.hpp"
#include "ccbm/types.hpp"

namespace ccbm {

enum class Case { example1 = 1, example2 = 2, example3 = 3 };

Case case_from_int(int id);
std::string to_string(Case c);

/// Closed-form boundary data of the three benchmark problems on the annulus
/// with radii (1, 2). The Neumann values are conormal derivatives with
/// respect to the outward normal: (x,y)/2 on the outer circle and -(x,y) on
/// the inner one, so the radii are baked into the formulas. example3 with
/// zeta = 1 evaluates through exactly the same expressions as example1.
struct BenchmarkCase {
  Case id = Case::example1;
  Scalar zeta = 1;

  Scalar outer_neumann(Scalar x, Scalar y) const;
  Scalar outer_dirichlet(Scalar x, Scalar y) const;
  Scalar inner_neumann(Scalar x, Scalar y) const;
  Scalar inner_dirichlet(Scalar x, Scalar y) const;
};

BenchmarkCase make_case(Case id, Scalar zeta = 1);

enum class Method { gkb, landweber, cgls };

Method method_from_string(const std::string& name);
std::string to_string(Method m);

struct ExperimentConfig {
  Case case_id = Case::example1;
  Scalar zeta = 1;      // used by example3; must stay 1 otherwise
  int n_theta = 100;    // default resolution gives h close to 0.1375
  int n_r = 18;
  Scalar delta_prime = 0;
  std::uint64_t seed = 42;
  Method method = Method::gkb;
  StoppingConfig stopping;
  Reorthogonalize reorth = Reorthogonalize::automatic;
};

/// Samples the closed forms at the boundary nodes: exact measured data on
/// gamma_m and the true solution pair on gamma_u. Throws ParameterError if
/// the mesh radii are not (1, 2).
std::pair<CauchyData, BoundaryPair> evaluate_case(const BenchmarkCase& bc, const Mesh& mesh);

/// Multiplies each node's data pair by a factor in
/// [1 - delta_prime, 1 + delta_prime] drawn from that node's stream of the
/// given seed (one shared draw per node, as a random field evaluated at the
/// node). delta is left at 0; it is measured against the exact right-hand
/// side downstream.
CauchyData add_noise(const Mesh& mesh, const CauchyData& data, Scalar delta_prime,
                     std::uint64_t seed);

/// C_u-weighted relative errors of the reconstruction against the truth,
/// one per component. Throws on zero-norm truth.
std::pair<Scalar, Scalar> relative_errors(const FemSystem& fem, const BoundaryPair& rec,
                                          const BoundaryPair& truth);

struct ExperimentResult {
  Case case_id = Case::example1;
  Method method = Method::gkb;
  Scalar zeta = 1;
  Scalar delta_prime = 0;
  std::uint64_t seed = 0;
  Scalar tau = 0;
  RunReport run;
  Scalar err_phi = 0;
  Scalar err_t = 0;
  Scalar delta = 0;
};

/// Full pipeline: mesh, assembly, factorization, exact data, noise, noise
/// level, solve, errors.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CurvePoint {
  int k = 0;
  Scalar err_phi = 0;
  Scalar err_t = 0;
  Scalar residual = 0;
};

/// Per-step reconstruction errors of the bidiagonalization iteration run to
/// k_max with the discrepancy stop disabled.
std::vector<CurvePoint> semiconvergence_curve(const ExperimentConfig& cfg, int k_max);

struct DiagnosticsRow {
  int k = 0;
  Scalar gamma = 0;
  Scalar beta = 0;
  Scalar norm_G = 0;
  Scalar cond_G = 0;
};

/// Recurrence coefficients and projected-matrix spectra for k = 1..k_max.
std::vector<DiagnosticsRow> assumption_diagnostics(const ExperimentConfig& cfg, int k_max);

// Report serialization. Timings are optional so that identical inputs can
// produce bit-identical files.
extern const char kReportCsvHeader[];
void write_report_csv(std::ostream& out, const std::vector<ExperimentResult>& rows,
                      bool include_timings);
void write_report_json(std::ostream& out, const std::vector<ExperimentResult>& rows,
                       bool include_timings);
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& rows);
void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows);

}  // namespace ccbm
