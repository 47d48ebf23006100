#include "ccbm/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "ccbm/block_system.hpp"
#include "ccbm/rng.hpp"

namespace ccbm {

namespace {

using Clock = std::chrono::steady_clock;

Scalar elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<Scalar, std::milli>(Clock::now() - start).count();
}

void require_finite(Scalar value, const char* what, int step) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(what) + " became nonfinite at step " +
                         std::to_string(step));
  }
}

bool reorth_active(Reorthogonalize mode, int step) {
  switch (mode) {
    case Reorthogonalize::off:
      return false;
    case Reorthogonalize::on:
      return true;
    case Reorthogonalize::automatic:
      return step <= 200;
  }
  return false;
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::discrepancy:
      return "discrepancy";
    case StopReason::breakdown:
      return "breakdown";
    case StopReason::max_iter:
      return "max_iter";
  }
  return "unknown";
}

RunReport gkb_solve(const CauchyOps& ops, const Vector& f_delta, Scalar delta,
                    const StoppingConfig& cfg, Reorthogonalize reorth, GkbState* state_out,
                    const StepObserver& observer) {
  if (!(cfg.tau > 1)) throw ParameterError("gkb_solve: tau must exceed 1");
  if (cfg.max_iter < 1) throw ParameterError("gkb_solve: max_iter must be at least 1");
  if (delta < 0) throw ParameterError("gkb_solve: delta must be nonnegative");
  if (!f_delta.allFinite()) throw ParameterError("gkb_solve: nonfinite right-hand side");

  const auto start = Clock::now();
  GkbState st;
  RunReport report;
  report.method = "gkb";
  report.delta = delta;
  report.tau = cfg.tau;

  const Scalar gamma1 = ops.field_norm(f_delta);
  if (gamma1 == 0) {
    st.phi = BoundaryPair::zero(ops.pair_size);
    st.residual_history = {0};
    report.phi_final = st.phi;
    report.k_delta = 0;
    report.stop_reason = StopReason::discrepancy;
    report.residual_history = st.residual_history;
    if (state_out) *state_out = std::move(st);
    report.wall_ms = elapsed_ms(start);
    return report;
  }

  // two-pass modified Gram-Schmidt against the stored basis
  auto reorthogonalize_field = [&](Vector& w) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& v : st.V) w -= ops.field_dot(v, w) * v;
    }
  };
  auto reorthogonalize_pair = [&](BoundaryPair& s) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const BoundaryPair& p : st.P) s -= ops.pair_dot(p, s) * p;
    }
  };

  st.gammas.push_back(gamma1);
  st.V.push_back(f_delta / gamma1);
  BoundaryPair s = ops.adjoint(st.V.front());
  const Scalar beta1 = ops.pair_norm(s);
  require_finite(beta1, "beta", 1);
  if (beta1 <= cfg.breakdown_eps * gamma1) {
    // the data has no component the operator can see
    st.phi = BoundaryPair::zero(ops.pair_size);
    report.phi_final = st.phi;
    report.k_delta = 0;
    report.stop_reason = gamma1 <= cfg.tau * delta ? StopReason::discrepancy
                                                   : StopReason::breakdown;
    report.residual_history = {gamma1};
    report.gammas = st.gammas;
    if (state_out) *state_out = std::move(st);
    report.wall_ms = elapsed_ms(start);
    return report;
  }
  st.betas.push_back(beta1);
  st.P.push_back((1 / beta1) * s);

  st.phi = BoundaryPair::zero(ops.pair_size);
  st.q = st.P.front();
  st.mu_bar = gamma1;
  st.tau_bar = beta1;
  st.residual_history.push_back(gamma1);

  StopReason reason = StopReason::max_iter;
  int k = 0;
  for (int j = 1; j <= cfg.max_iter; ++j) {
    // extend the domain basis
    Vector w = ops.forward(st.P.back()) - st.betas.back() * st.V.back();
    if (reorth_active(reorth, j)) reorthogonalize_field(w);
    const Scalar gamma_next = ops.field_norm(w);
    require_finite(gamma_next, "gamma", j);
    const bool gamma_breakdown = gamma_next <= cfg.breakdown_eps * gamma1;

    Scalar beta_next = 0;
    bool beta_breakdown = true;
    if (!gamma_breakdown) {
      st.gammas.push_back(gamma_next);
      st.V.push_back(w / gamma_next);
      // extend the boundary basis
      BoundaryPair snew = ops.adjoint(st.V.back()) - gamma_next * st.P.back();
      if (reorth_active(reorth, j)) reorthogonalize_pair(snew);
      beta_next = ops.pair_norm(snew);
      require_finite(beta_next, "beta", j);
      beta_breakdown = beta_next <= cfg.breakdown_eps * gamma1;
      if (!beta_breakdown) {
        st.betas.push_back(beta_next);
        st.P.push_back((1 / beta_next) * snew);
      }
    }

    // Givens rotation: fold the new subdiagonal entry into the QR factors
    const Scalar tau_j = std::sqrt(st.tau_bar * st.tau_bar + gamma_next * gamma_next);
    require_finite(tau_j, "tau", j);
    const Scalar c = st.tau_bar / tau_j;
    const Scalar sn = gamma_next / tau_j;
    const Scalar mu = c * st.mu_bar;
    const Scalar mu_bar_next = -sn * st.mu_bar;

    // iterate and direction updates
    st.phi += (mu / tau_j) * st.q;
    if (!gamma_breakdown && !beta_breakdown) {
      const Scalar eta_next = sn * beta_next;
      st.q = st.P.back() - (eta_next / tau_j) * st.q;
      st.tau_bar = c * beta_next;
    }
    st.mu_bar = mu_bar_next;
    st.k = ++k;
    const Scalar residual = std::abs(st.mu_bar);
    st.residual_history.push_back(residual);
    if (observer) observer(k, st.phi, residual);

    if (residual <= cfg.tau * delta) {
      reason = StopReason::discrepancy;
      break;
    }
    if (gamma_breakdown || beta_breakdown) {
      reason = residual <= cfg.tau * delta ? StopReason::discrepancy : StopReason::breakdown;
      break;
    }
  }

  report.k_delta = k;
  report.phi_final = st.phi;
  report.residual_history = st.residual_history;
  report.gammas = st.gammas;
  report.betas = st.betas;
  report.stop_reason = reason;
  report.wall_ms = elapsed_ms(start);
  if (state_out) *state_out = std::move(st);
  return report;
}

RunReport landweber_solve(const CauchyOps& ops, const Vector& f_delta, Scalar delta,
                          const StoppingConfig& cfg, std::optional<Scalar> omega,
                          const StepObserver& observer) {
  if (delta < 0) throw ParameterError("landweber_solve: delta must be nonnegative");
  if (!f_delta.allFinite()) throw ParameterError("landweber_solve: nonfinite right-hand side");

  const auto start = Clock::now();
  const Scalar norm_est = estimate_op_norm(ops, 30, 1);
  Scalar step = 0;
  if (omega) {
    if (!(*omega > 0) || !(*omega < 2 / (norm_est * norm_est))) {
      throw ParameterError("landweber_solve: omega outside the convergent range (0, 2/||K||^2)");
    }
    step = *omega;
  } else {
    step = 1 / (norm_est * norm_est);
  }

  RunReport report;
  report.method = "landweber";
  report.delta = delta;
  report.tau = cfg.tau;

  BoundaryPair phi = BoundaryPair::zero(ops.pair_size);
  Vector residual_field = f_delta;  // f - K phi at phi = 0
  Scalar residual = ops.field_norm(residual_field);
  report.residual_history.push_back(residual);

  StopReason reason = StopReason::max_iter;
  int k = 0;
  if (residual <= cfg.tau * delta || residual == 0) {
    reason = StopReason::discrepancy;
  } else {
    for (int j = 1; j <= cfg.max_iter; ++j) {
      phi += step * ops.adjoint(residual_field);
      residual_field = f_delta - ops.forward(phi);
      residual = ops.field_norm(residual_field);
      require_finite(residual, "residual", j);
      k = j;
      report.residual_history.push_back(residual);
      if (observer) observer(k, phi, residual);
      if (residual <= cfg.tau * delta) {
        reason = StopReason::discrepancy;
        break;
      }
    }
  }

  report.k_delta = k;
  report.phi_final = phi;
  report.stop_reason = reason;
  report.wall_ms = elapsed_ms(start);
  return report;
}

RunReport cgls_solve(const CauchyOps& ops, const Vector& f_delta, Scalar delta,
                     const StoppingConfig& cfg, const StepObserver& observer) {
  if (delta < 0) throw ParameterError("cgls_solve: delta must be nonnegative");
  if (!f_delta.allFinite()) throw ParameterError("cgls_solve: nonfinite right-hand side");

  const auto start = Clock::now();
  RunReport report;
  report.method = "cgls";
  report.delta = delta;
  report.tau = cfg.tau;

  BoundaryPair phi = BoundaryPair::zero(ops.pair_size);
  Vector r = f_delta;  // residual in the domain space
  Scalar residual = ops.field_norm(r);
  report.residual_history.push_back(residual);

  StopReason reason = StopReason::max_iter;
  int k = 0;
  if (residual <= cfg.tau * delta || residual == 0) {
    reason = StopReason::discrepancy;
  } else {
    BoundaryPair s = ops.adjoint(r);
    BoundaryPair p = s;
    Scalar s_sq = ops.pair_dot(s, s);
    for (int j = 1; j <= cfg.max_iter; ++j) {
      if (s_sq <= 0 || !std::isfinite(s_sq)) {
        reason = StopReason::breakdown;
        break;
      }
      const Vector w = ops.forward(p);
      const Scalar w_sq = ops.field_dot(w, w);
      if (w_sq <= 0 || !std::isfinite(w_sq)) {
        reason = StopReason::breakdown;
        break;
      }
      const Scalar alpha = s_sq / w_sq;
      phi += alpha * p;
      r -= alpha * w;
      residual = ops.field_norm(r);
      require_finite(residual, "residual", j);
      k = j;
      report.residual_history.push_back(residual);
      if (observer) observer(k, phi, residual);
      if (residual <= cfg.tau * delta) {
        reason = StopReason::discrepancy;
        break;
      }
      s = ops.adjoint(r);
      const Scalar s_sq_next = ops.pair_dot(s, s);
      p = s + (s_sq_next / s_sq) * p;
      s_sq = s_sq_next;
    }
  }

  report.k_delta = k;
  report.phi_final = phi;
  report.stop_reason = reason;
  report.wall_ms = elapsed_ms(start);
  return report;
}

Scalar estimate_op_norm(const CauchyOps& ops, int iters, std::uint64_t seed) {
  if (iters < 10) throw ParameterError("estimate_op_norm: need at least 10 iterations");
  std::uint64_t state = seed;
  Vector n0(ops.pair_size), d0(ops.pair_size);
  for (Index i = 0; i < ops.pair_size; ++i) {
    n0[i] = 2 * uniform01(state) - 1;
    d0[i] = 2 * uniform01(state) - 1;
  }
  BoundaryPair x(std::move(n0), std::move(d0));
  const Scalar nx = ops.pair_norm(x);
  if (nx == 0) return 0;
  x *= 1 / nx;

  Scalar rayleigh = 0;
  for (int it = 0; it < iters; ++it) {
    const Vector kx = ops.forward(x);
    rayleigh = ops.field_dot(kx, kx);  // = <x, K*K x> for unit x
    BoundaryPair y = ops.adjoint(kx);
    const Scalar ny = ops.pair_norm(y);
    if (ny == 0) break;
    x = (1 / ny) * y;
  }
  return std::sqrt(std::max(rayleigh, Scalar(0)));
}

Matrix bidiagonal_matrix(const std::vector<Scalar>& gammas, const std::vector<Scalar>& betas,
                         int j) {
  if (j < 1 || static_cast<int>(betas.size()) < j || static_cast<int>(gammas.size()) < j + 1) {
    throw ParameterError("bidiagonal_matrix: not enough recurrence coefficients for j = " +
                         std::to_string(j));
  }
  Matrix g = Matrix::Zero(j + 1, j);
  for (int i = 0; i < j; ++i) {
    g(i, i) = betas[static_cast<std::size_t>(i)];
    g(i + 1, i) = gammas[static_cast<std::size_t>(i) + 1];
  }
  return g;
}

std::vector<Scalar> gkb_condition_numbers(const GkbState& state, int up_to) {
  std::vector<Scalar> conds;
  conds.reserve(static_cast<std::size_t>(up_to));
  for (int j = 1; j <= up_to; ++j) {
    const Matrix g = bidiagonal_matrix(state.gammas, state.betas, j);
    const auto sv = singular_values(g);
    const Scalar sigma_max = sv.front();
    const Scalar sigma_min = sv.back();
    const Scalar cond =
        sigma_min < 1e-30 ? std::numeric_limits<Scalar>::infinity() : sigma_max / sigma_min;
    // lower bound carried by the extreme bidiagonal entries
    const Scalar b1 = state.betas[0], g2 = state.gammas[1];
    const Scalar bj = state.betas[static_cast<std::size_t>(j) - 1];
    const Scalar gj1 = state.gammas[static_cast<std::size_t>(j)];
    const Scalar bound = std::sqrt((b1 * b1 + g2 * g2) / (bj * bj + gj1 * gj1));
    if (cond < bound * (1 - 1e-8)) {
      throw NumericalError("gkb_condition_numbers: condition number of step " +
                           std::to_string(j) + " violates its lower bound");
    }
    conds.push_back(cond);
  }
  return conds;
}

}  // namespace ccbm
