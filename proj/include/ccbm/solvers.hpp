#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccbm/operators.hpp"
#include "ccbm/types.hpp"

namespace ccbm {

/// Discrepancy stopping: iterate until the residual falls below tau * delta.
struct StoppingConfig {
  Scalar tau = 1.01;          // discrepancy factor, > 1
  int max_iter = 2000;
  Scalar breakdown_eps = 1e-14;  // relative to the initial residual norm
};

enum class StopReason { discrepancy, breakdown, max_iter };

std::string to_string(StopReason reason);

/// Reorthogonalization of the bidiagonalization bases. `automatic` keeps it
/// on for the first 200 steps and drops it beyond that.
enum class Reorthogonalize { off, on, automatic };

/// Evolving state of the bidiagonalization: recurrence coefficients, the
/// two orthonormal bases, the Givens-rotation carry terms and the current
/// iterate. Exposed so diagnostics can replay the projected small systems.
struct GkbState {
  std::vector<Scalar> gammas;       // gamma_1 .. gamma_{k+1}
  std::vector<Scalar> betas;        // beta_1 .. beta_{k+1}
  std::vector<Vector> V;            // domain basis v_1 .. v_{k+1}
  std::vector<BoundaryPair> P;      // boundary basis p_1 .. p_{k+1}
  BoundaryPair q;                   // current update direction
  BoundaryPair phi;                 // current iterate
  Scalar tau_bar = 0;
  Scalar mu_bar = 0;                // signed; |mu_bar| is the residual
  std::vector<Scalar> residual_history;  // |mu_bar_1|, |mu_bar_2|, ...
  int k = 0;
};

struct RunReport {
  std::string method;
  int k_delta = 0;
  BoundaryPair phi_final;
  std::vector<Scalar> residual_history;
  std::vector<Scalar> gammas;
  std::vector<Scalar> betas;
  StopReason stop_reason = StopReason::max_iter;
  Scalar delta = 0;
  Scalar tau = 0;
  Scalar wall_ms = 0;
};

/// Called after every completed step with the step index, the current
/// iterate and its residual norm.
using StepObserver = std::function<void(int, const BoundaryPair&, Scalar)>;

/// Bidiagonalization solver with Givens-rotation QR updates and discrepancy
/// stopping. Runs until the residual drops below tau * delta, the recurrence
/// breaks down, or max_iter steps. With delta = 0 the discrepancy test never
/// fires, which is the way to drive the iteration to a prescribed depth.
RunReport gkb_solve(const CauchyOps& ops, const Vector& f_delta, Scalar delta,
                    const StoppingConfig& cfg,
                    Reorthogonalize reorth = Reorthogonalize::automatic,
                    GkbState* state_out = nullptr, const StepObserver& observer = {});

/// Fixed-step gradient iteration on the normal equation; omega defaults to
/// 1/||K||^2 estimated by power iteration.
RunReport landweber_solve(const CauchyOps& ops, const Vector& f_delta, Scalar delta,
                          const StoppingConfig& cfg, std::optional<Scalar> omega = std::nullopt,
                          const StepObserver& observer = {});

/// Conjugate gradients on the normal equation in factored form.
RunReport cgls_solve(const CauchyOps& ops, const Vector& f_delta, Scalar delta,
                     const StoppingConfig& cfg, const StepObserver& observer = {});

/// Power-iteration estimate of the operator norm, deterministic under a
/// fixed seed; the Rayleigh-quotient sequence is monotone nondecreasing.
Scalar estimate_op_norm(const CauchyOps& ops, int iters, std::uint64_t seed);

/// The (j+1) x j lower-bidiagonal projected matrix of the first j steps.
Matrix bidiagonal_matrix(const std::vector<Scalar>& gammas, const std::vector<Scalar>& betas,
                         int j);

/// Spectral condition numbers of the projected matrices for j = 1..up_to.
/// sigma_min below 1e-30 is reported as +inf.
std::vector<Scalar> gkb_condition_numbers(const GkbState& state, int up_to);

}  // namespace ccbm
