#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ccbm/benchmarks.hpp"
#include "ccbm/block_system.hpp"
#include "ccbm/operators.hpp"
#include "oracles.hpp"

using namespace ccbm;

namespace {

int node_at_angle(const Mesh& mesh, const std::vector<int>& ring, Scalar x, Scalar y) {
  for (int i : ring) {
    if ((mesh.nodes[i] - Vector2(x, y)).norm() < 1e-9) return i;
  }
  REQUIRE(false);
  return -1;
}

Index local_index(const std::vector<int>& ring, int node) {
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (ring[i] == node) return static_cast<Index>(i);
  }
  REQUIRE(false);
  return -1;
}

// combined relative error of a curve point, weighted by the truth norms
Scalar combined_error(const CurvePoint& pt, Scalar weight_phi, Scalar weight_t) {
  return std::sqrt((pt.err_phi * pt.err_phi * weight_phi + pt.err_t * pt.err_t * weight_t) /
                   (weight_phi + weight_t));
}

}  // namespace

TEST_CASE("closed forms evaluate to the hand-computed boundary values") {
  const Mesh mesh = generate_annulus(1, 2, 16, 2);

  SUBCASE("exponential case") {
    const auto [data, truth] = evaluate_case(make_case(Case::example1), mesh);
    const Scalar e1 = std::exp(1.0), e2 = std::exp(2.0);
    const Index at_20 = local_index(mesh.gamma_m_nodes, node_at_angle(mesh, mesh.gamma_m_nodes, 2, 0));
    CHECK(data.neumann[at_20] == doctest::Approx(e2).epsilon(1e-12));
    CHECK(data.dirichlet[at_20] == doctest::Approx(e2).epsilon(1e-12));
    const Index at_10 = local_index(mesh.gamma_u_nodes, node_at_angle(mesh, mesh.gamma_u_nodes, 1, 0));
    CHECK(truth.neumann[at_10] == doctest::Approx(-e1).epsilon(1e-12));
    CHECK(truth.dirichlet[at_10] == doctest::Approx(e1).epsilon(1e-12));
  }

  SUBCASE("polynomial case") {
    const auto [data, truth] = evaluate_case(make_case(Case::example2), mesh);
    const int top_m = mesh.gamma_m_nodes[4];  // angle pi/2 on the outer ring
    CHECK(mesh.nodes[top_m].y() == doctest::Approx(2.0).epsilon(1e-14));
    const Index at_top = local_index(mesh.gamma_m_nodes, top_m);
    CHECK(data.neumann[at_top] == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(data.dirichlet[at_top] == doctest::Approx(-4.0).epsilon(1e-12));
    const int top_u = mesh.gamma_u_nodes[4];
    const Index at_top_u = local_index(mesh.gamma_u_nodes, top_u);
    CHECK(truth.neumann[at_top_u] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(truth.dirichlet[at_top_u] == doctest::Approx(-1.0).epsilon(1e-12));
  }

  SUBCASE("radii guard") {
    const Mesh wrong = generate_annulus(1, 3, 8, 1);
    CHECK_THROWS_AS(evaluate_case(make_case(Case::example1), wrong), ParameterError);
  }

  SUBCASE("zeta outside example3") {
    CHECK_THROWS_AS(make_case(Case::example1, 2.0), ParameterError);
    CHECK_THROWS_AS(make_case(Case::example3, -1.0), ParameterError);
  }
}

TEST_CASE("noise injection") {
  const Mesh mesh = generate_annulus(1, 2, 32, 4);
  const auto [data, truth] = evaluate_case(make_case(Case::example1), mesh);

  SUBCASE("zero level leaves the data untouched") {
    const CauchyData same = add_noise(mesh, data, 0, 42);
    CHECK(same.neumann == data.neumann);
    CHECK(same.dirichlet == data.dirichlet);
  }

  SUBCASE("per-node relative bound") {
    const Scalar dp = 0.05;
    const CauchyData noisy = add_noise(mesh, data, dp, 42);
    for (Index i = 0; i < data.neumann.size(); ++i) {
      CHECK(std::abs(noisy.neumann[i] - data.neumann[i]) <=
            dp * std::abs(data.neumann[i]) * (1 + 1e-12));
      CHECK(std::abs(noisy.dirichlet[i] - data.dirichlet[i]) <=
            dp * std::abs(data.dirichlet[i]) * (1 + 1e-12));
    }
  }

  SUBCASE("fixed seed reproduces bit-identical data") {
    const CauchyData a = add_noise(mesh, data, 0.05, 42);
    const CauchyData b = add_noise(mesh, data, 0.05, 42);
    CHECK(a.neumann == b.neumann);
    CHECK(a.dirichlet == b.dirichlet);
    const CauchyData c = add_noise(mesh, data, 0.05, 43);
    CHECK(a.neumann != c.neumann);
  }

  SUBCASE("noise level scales linearly through the solve") {
    const FemSystem fem = assemble(mesh, 1);
    const BlockFactor factor(fem);
    const Vector f = compute_rhs(factor, fem, data);
    const Vector f_full =
        compute_rhs(factor, fem, add_noise(mesh, data, 0.04, 7));
    const Vector f_half =
        compute_rhs(factor, fem, add_noise(mesh, data, 0.02, 7));
    const Scalar full = norm_field(fem, f_full - f);
    const Scalar half = norm_field(fem, f_half - f);
    CHECK(half <= 0.5 * full * 1.05);
    CHECK(half == doctest::Approx(0.5 * full).epsilon(1e-9));
  }
}

TEST_CASE("relative errors") {
  const Mesh mesh = generate_annulus(1, 2, 16, 2);
  const FemSystem fem = assemble(mesh, 1);
  const auto [data, truth] = evaluate_case(make_case(Case::example1), mesh);

  auto [e0n, e0d] = relative_errors(fem, truth, truth);
  CHECK(e0n == 0);
  CHECK(e0d == 0);

  auto [e2n, e2d] = relative_errors(fem, 2 * truth, truth);
  CHECK(e2n == 1.0);
  CHECK(e2d == 1.0);

  const BoundaryPair zero = BoundaryPair::zero(truth.size());
  CHECK_THROWS_AS(relative_errors(fem, truth, zero), ParameterError);
}

TEST_CASE("benchmark bands at the reference resolution") {
  ExperimentConfig cfg;
  cfg.delta_prime = 0.01;
  cfg.seed = 42;

  SUBCASE("polynomial case is reconstructed to a percent") {
    cfg.case_id = Case::example2;
    const ExperimentResult r = run_experiment(cfg);
    CHECK(r.run.stop_reason == StopReason::discrepancy);
    CHECK(r.err_phi <= 1e-2);
    CHECK(r.err_t <= 2e-2);
    CHECK(r.run.k_delta <= 8);
  }

  SUBCASE("exponential case error bands and shrinking depth") {
    cfg.case_id = Case::example1;
    const Scalar reference_err_t[3] = {2.78e-2, 1.22e-1, 1.94e-1};
    const Scalar levels[3] = {0.01, 0.05, 0.1};
    int k_prev = 1 << 20;
    for (int i = 0; i < 3; ++i) {
      cfg.delta_prime = levels[i];
      const ExperimentResult r = run_experiment(cfg);
      CHECK(r.run.k_delta <= 20);
      CHECK(r.err_t <= 3 * reference_err_t[i]);
      CHECK(r.err_t >= reference_err_t[i] / 3);
      CHECK(r.run.k_delta <= k_prev);
      k_prev = r.run.k_delta;
    }
  }

  SUBCASE("anisotropic case stays in its band") {
    cfg.case_id = Case::example3;
    cfg.zeta = 2;
    const ExperimentResult r = run_experiment(cfg);
    CHECK(r.run.stop_reason == StopReason::discrepancy);
    CHECK(r.run.k_delta <= 40);
    CHECK(r.err_phi <= 3 * 1.70e-1);
    CHECK(r.err_t <= 3 * 3.99e-2);
  }

  SUBCASE("anisotropic case with unit ratio reproduces the isotropic cell bitwise") {
    cfg.case_id = Case::example1;
    const ExperimentResult iso = run_experiment(cfg);
    cfg.case_id = Case::example3;
    cfg.zeta = 1;
    const ExperimentResult aniso = run_experiment(cfg);
    CHECK(iso.err_phi == aniso.err_phi);
    CHECK(iso.err_t == aniso.err_t);
    CHECK(iso.delta == aniso.delta);
    CHECK(iso.run.k_delta == aniso.run.k_delta);
  }

  SUBCASE("conjugate-gradient baseline tracks the bidiagonalization solver") {
    cfg.case_id = Case::example1;
    cfg.method = Method::gkb;
    const ExperimentResult gkb = run_experiment(cfg);
    cfg.method = Method::cgls;
    const ExperimentResult cg = run_experiment(cfg);
    CHECK(std::abs(gkb.run.k_delta - cg.run.k_delta) <= 1);
    CHECK(std::abs(gkb.err_phi - cg.err_phi) <= 0.05 * cg.err_phi);
    CHECK(std::abs(gkb.err_t - cg.err_t) <= 0.05 * cg.err_t);
  }

  SUBCASE("gradient baseline needs an order of magnitude more steps") {
    cfg.case_id = Case::example1;
    cfg.method = Method::gkb;
    const ExperimentResult gkb = run_experiment(cfg);
    cfg.method = Method::landweber;
    const ExperimentResult lw = run_experiment(cfg);
    CHECK(lw.run.stop_reason == StopReason::discrepancy);
    CHECK(lw.run.k_delta >= 30);
    CHECK(lw.run.k_delta <= 1500);
    CHECK(lw.run.k_delta >= 5 * gkb.run.k_delta);
  }
}

TEST_CASE("noise-free run drives the residual to the floor") {
  ExperimentConfig cfg;
  cfg.case_id = Case::example2;
  cfg.n_theta = 16;
  cfg.n_r = 1;
  cfg.delta_prime = 0;
  cfg.stopping.max_iter = 100;
  const ExperimentResult r = run_experiment(cfg);
  Scalar best = r.run.residual_history.front();
  for (Scalar res : r.run.residual_history) best = std::min(best, res);
  CHECK(best <= 1e-8 * r.run.residual_history.front());
}

TEST_CASE("error trend across noise levels") {
  ExperimentConfig cfg;
  cfg.case_id = Case::example1;
  cfg.seed = 42;
  Scalar err_prev = -1;
  int inversions = 0;
  for (Scalar dp : {0.01, 0.05, 0.1}) {
    cfg.delta_prime = dp;
    const ExperimentResult r = run_experiment(cfg);
    const Scalar err = r.err_t;
    if (err < err_prev) {
      ++inversions;
      CHECK(err >= err_prev * 0.9);  // a single small inversion is tolerated
    }
    err_prev = err;
  }
  CHECK(inversions <= 1);
}

TEST_CASE("semi-convergence of the per-step error curve") {
  ExperimentConfig cfg;
  cfg.seed = 42;

  // truth-norm weights for the combined error
  auto weights = [&cfg](Case c) {
    const Mesh mesh = generate_annulus(1, 2, cfg.n_theta, cfg.n_r);
    const FemSystem fem = assemble(mesh, 1);
    const auto [data, truth] = evaluate_case(make_case(c), mesh);
    const BoundaryPair zero = BoundaryPair::zero(truth.size());
    const Scalar wn = dot_pair(fem, BoundaryPair(truth.neumann, zero.dirichlet),
                               BoundaryPair(truth.neumann, zero.dirichlet));
    const Scalar wd = dot_pair(fem, BoundaryPair(zero.neumann, truth.dirichlet),
                               BoundaryPair(zero.neumann, truth.dirichlet));
    return std::pair{wn, wd};
  };

  SUBCASE("noisy curve has an interior minimum") {
    cfg.case_id = Case::example1;
    cfg.delta_prime = 0.1;
    const auto [wn, wd] = weights(cfg.case_id);
    const auto curve = semiconvergence_curve(cfg, 30);
    REQUIRE(curve.size() >= 10);
    std::size_t argmin = 0;
    Scalar best = combined_error(curve[0], wn, wd);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      const Scalar err = combined_error(curve[i], wn, wd);
      if (err < best) {
        best = err;
        argmin = i;
      }
    }
    CHECK(argmin > 0);
    CHECK(argmin + 1 < curve.size());
    CHECK(combined_error(curve.back(), wn, wd) >= 1.1 * best);
  }

  SUBCASE("noise-free curve decreases to a plateau") {
    cfg.case_id = Case::example2;
    cfg.delta_prime = 0;
    const auto [wn, wd] = weights(cfg.case_id);
    const auto curve = semiconvergence_curve(cfg, 40);
    REQUIRE(curve.size() >= 10);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      const Scalar here = combined_error(curve[i], wn, wd);
      const Scalar next = combined_error(curve[i + 1], wn, wd);
      CHECK(next <= here * 1.001 + 1e-12);
    }
  }

  SUBCASE("residual column decreases strictly") {
    cfg.case_id = Case::example1;
    cfg.delta_prime = 0.1;
    const auto curve = semiconvergence_curve(cfg, 30);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      CHECK(curve[i + 1].residual < curve[i].residual);
    }
  }
}

TEST_CASE("recurrence diagnostics") {
  ExperimentConfig cfg;
  cfg.case_id = Case::example1;
  cfg.delta_prime = 0.01;
  cfg.seed = 42;
  const auto rows = assumption_diagnostics(cfg, 25);
  REQUIRE(rows.size() == 25);

  CHECK(rows[0].cond_G == 1.0);
  for (const auto& row : rows) {
    CHECK(row.gamma > 0);
    CHECK(row.beta > 0);
    CHECK(row.norm_G <= 0.5 * row.k);
    CHECK(row.cond_G >= 1.0);
  }
  // the projected-matrix norm tracks the operator norm from the first step
  CHECK(rows.back().norm_G <= 1.5 * rows.front().norm_G);
}

TEST_CASE("report serialization") {
  ExperimentConfig cfg;
  cfg.case_id = Case::example2;
  cfg.delta_prime = 0.01;
  cfg.n_theta = 24;
  cfg.n_r = 3;
  const ExperimentResult r = run_experiment(cfg);

  SUBCASE("csv schema and determinism") {
    std::ostringstream a, b;
    write_report_csv(a, {r}, false);
    write_report_csv(b, {r}, false);
    CHECK(a.str() == b.str());
    const std::string head = a.str().substr(0, a.str().find('\n'));
    CHECK(head == "case,method,delta_prime,seed,tau,k_delta,err_phi,err_t,delta,stop_reason,wall_ms");
    CHECK(a.str().find("example2,gkb,0.01,42,1.01") != std::string::npos);
    CHECK(a.str().find("discrepancy,0") != std::string::npos);
  }

  SUBCASE("json mirrors the row") {
    std::ostringstream out;
    write_report_json(out, {r}, false);
    const auto j = nlohmann::json::parse(out.str());
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 1);
    CHECK(j[0]["case"] == "example2");
    CHECK(j[0]["method"] == "gkb");
    CHECK(j[0]["k_delta"] == r.run.k_delta);
    CHECK(j[0]["err_phi"] == doctest::Approx(r.err_phi).epsilon(1e-15));
    CHECK(j[0]["stop_reason"] == "discrepancy");
    CHECK(j[0]["residual_history"].size() == r.run.residual_history.size());
  }

  SUBCASE("curve and diagnostics headers") {
    std::ostringstream curve_out, diag_out;
    write_curve_csv(curve_out, semiconvergence_curve(cfg, 3));
    CHECK(curve_out.str().rfind("k,err_phi,err_t,residual\n", 0) == 0);
    write_diagnostics_csv(diag_out, assumption_diagnostics(cfg, 3));
    CHECK(diag_out.str().rfind("k,gamma,beta,norm_G,cond_G\n", 0) == 0);
  }
}
