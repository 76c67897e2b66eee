// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: reproduces the benchmark tables and the method's
// qualitative claims end to end. Each criterion prints one pass/fail line.

#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>

#include "helpers.hpp"
#include "podloc/ocp.hpp"
#include "podloc/pipeline.hpp"

using namespace podloc;

namespace {

bool within_factor(double value, double reference, double factor) {
  return value >= reference / factor && value <= reference * factor;
}

void criterion_line(int id, const std::string& what, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id,
              what.c_str());
  std::fflush(stdout);
}

PipelineConfig make_config(int test, GridMode mode, int dof, int ell,
                           int nrefine = 0) {
  PipelineConfig cfg;
  cfg.problem_id = test;
  cfg.grid_mode = mode;
  cfg.dof = dof;
  cfg.ell = ell;
  cfg.n_refine = nrefine;
  return cfg;
}

const PipelineResult& cached(int test, GridMode mode, int dof, int ell,
                             int nrefine = 0) {
  static std::map<std::string, PipelineResult> cache;
  const std::string key = std::to_string(test) + "|" +
                          (mode == GridMode::uniform ? "u" : "a") + "|" +
                          std::to_string(dof) + "|" + std::to_string(ell) +
                          "|" + std::to_string(nrefine);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, run(make_config(test, mode, dof, ell, nrefine)))
             .first;
  return it->second;
}

struct TableRow {
  double eps_y, eps_u, eps_p;
};

// Table 1 reference values (test 1, ell = 1)
const std::map<int, TableRow> kT1Uniform = {
    {20, {1.5120e-02, 1.9837e-01, 3.6247e-02}},
    {42, {1.1186e-02, 2.1071e-01, 3.8490e-02}},
    {61, {1.0774e-02, 2.1447e-01, 3.9173e-02}},
    {114, {1.1157e-02, 2.1846e-01, 3.9893e-02}}};
const std::map<int, TableRow> kT1Adaptive = {
    {21, {5.1874e-02, 5.3428e-02, 9.6343e-03}},
    {43, {5.1634e-02, 2.4868e-02, 4.3611e-03}},
    {62, {5.1599e-02, 2.3275e-02, 4.0691e-03}},
    {115, {5.1568e-02, 2.3027e-02, 4.0340e-03}}};

struct Table2Row {
  double eta_i, eta_b, zeta_sum, lambda_tail;
};
const std::map<int, Table2Row> kT2Rows = {
    {21, {4.9518e+00, 4.8031e-04, 1.6033e-02, 3.3938e-04}},
    {43, {1.1976e+00, 5.0087e-05, 1.9200e-02, 2.9454e-04}},
    {62, {7.2852e-01, 2.9835e-05, 1.9707e-02, 2.9212e-04}},
    {115, {3.4966e-01, 1.4845e-05, 2.0191e-02, 2.9090e-04}}};

}  // namespace

TEST_CASE("criterion 1: Table 1 reproduction within x2.5 in under 60 s") {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  for (const auto& [n, ref] : kT1Uniform) {
    const auto& r = cached(1, GridMode::uniform, n + 1, 1);
    ok &= within_factor(r.errors->eps_y, ref.eps_y, 2.5);
    ok &= within_factor(r.errors->eps_u, ref.eps_u, 2.5);
    ok &= within_factor(r.errors->eps_p, ref.eps_p, 2.5);
  }
  for (const auto& [dof, ref] : kT1Adaptive) {
    const auto& r = cached(1, GridMode::adaptive, dof, 1);
    ok &= within_factor(r.errors->eps_y, ref.eps_y, 2.5);
    ok &= within_factor(r.errors->eps_u, ref.eps_u, 2.5);
    ok &= within_factor(r.errors->eps_p, ref.eps_p, 2.5);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  ok &= secs < 60.0;
  criterion_line(1, "Table 1 errors within x2.5, runtime < 60 s", ok);
  CHECK(ok);
}

TEST_CASE("criterion 2: adaptive beats uniform by 3x on control and adjoint") {
  const std::map<int, int> matched = {{20, 21}, {42, 43}, {61, 62}, {114, 115}};
  bool ok = true;
  for (const auto& [n, dof] : matched) {
    const auto& u = cached(1, GridMode::uniform, n + 1, 1);
    const auto& a = cached(1, GridMode::adaptive, dof, 1);
    ok &= a.errors->eps_u <= u.errors->eps_u / 3.0;
    ok &= a.errors->eps_p <= u.errors->eps_p / 3.0;
  }
  criterion_line(2, "adaptive eps_u, eps_p <= uniform / 3 row-wise", ok);
  CHECK(ok);
}

TEST_CASE("criterion 3: cost functional (Table 3)") {
  const double J_exact = 8.3988e+01;
  const auto& a21 = cached(1, GridMode::adaptive, 21, 1);
  const auto& u20 = cached(1, GridMode::uniform, 21, 1);
  const bool ok = std::abs(a21.cost - J_exact) <= 0.10 * J_exact &&
                  u20.cost > 10.0 * J_exact;
  criterion_line(3, "adaptive J within 10%, uniform J off by > 10x", ok);
  CHECK(ok);
}

TEST_CASE("criterion 4: estimator components (Table 2)") {
  bool ok = true;
  for (const auto& [dof, ref] : kT2Rows) {
    const auto& r = cached(1, GridMode::adaptive, dof, 1);
    const double zeta_sum = *r.estimators.zeta_k + *r.estimators.zeta_kl;
    ok &= within_factor(*r.estimators.eta_interior, ref.eta_i, 2.5);
    ok &= within_factor(*r.estimators.eta_boundary, ref.eta_b, 2.5);
    ok &= within_factor(zeta_sum, ref.zeta_sum, 2.5);
    ok &= within_factor(r.estimators.lambda_tail, ref.lambda_tail, 2.5);
  }
  criterion_line(4, "eta, zeta and eigenvalue-tail columns within x2.5", ok);
  CHECK(ok);
}

TEST_CASE("criterion 5: post-processing refinement (Table 4)") {
  double first = 0.0, last = 0.0, prev = -1.0;
  bool monotone = true;
  for (int nrefine : {0, 5, 10, 20, 30}) {
    const auto& r = cached(1, GridMode::adaptive, 43, 1, nrefine);
    const double ey = r.errors->eps_y;
    if (nrefine == 0) first = ey;
    if (nrefine == 30) last = ey;
    if (prev >= 0.0) monotone &= ey <= prev * (1.0 + 1e-9);
    prev = ey;
  }
  const bool ok = monotone && last <= 0.60 * first;
  criterion_line(5, "N_refine = 30 cuts eps_y by >= 40%, monotone", ok);
  CHECK(ok);
}

TEST_CASE("criterion 6: Test 2 separation and cost (Tables 5-6)") {
  const auto& a41 = cached(2, GridMode::adaptive, 41, 4);
  const auto& u40 = cached(2, GridMode::uniform, 41, 4);
  const auto& a135 = cached(2, GridMode::adaptive, 135, 4);
  bool ok = a41.errors->eps_y <= 1e-3 && a41.errors->eps_p <= 5e-2;
  ok &= u40.errors->eps_y >= 5e-2 && u40.errors->eps_p >= 5.0;
  ok &= std::abs(a135.cost - 1.0085e+03) <= 0.005 * 1.0085e+03;
  criterion_line(6, "Test 2: adaptive accuracy, uniform failure, J to 0.5%",
                 ok);
  CHECK(ok);
}

TEST_CASE("criterion 7: Test 2 with a single mode (Table 7)") {
  bool ok = true;
  for (int dof : {41, 69, 135}) {
    const auto& r1 = cached(2, GridMode::adaptive, dof, 1);
    const auto& r4 = cached(2, GridMode::adaptive, dof, 4);
    ok &= within_factor(r1.errors->eps_y, 2.1e-2, 2.5);
    ok &= std::abs(r1.errors->eps_u - r4.errors->eps_u) <=
          0.10 * r4.errors->eps_u;
    ok &= std::abs(r1.errors->eps_p - r4.errors->eps_p) <=
          0.10 * r4.errors->eps_p;
  }
  criterion_line(7, "ell = 1 plateaus on the state, matches u and p", ok);
  CHECK(ok);
}

TEST_CASE("criterion 8: Test 3 with box constraints (Table 8)") {
  const auto& r41 = cached(3, GridMode::adaptive, 41, 4);
  bool ok = within_factor(r41.errors->eps_y, 2.9482e-04, 2.5);
  ok &= within_factor(r41.errors->eps_u, 4.4969e-03, 2.5);
  ok &= within_factor(r41.errors->eps_p, 1.3183e-02, 2.5);
  ok &= r41.estimators.fixed_point_iterations.value_or(99) <= 5;

  // the control error shrinks under constraints on every matched grid
  for (int n : {20, 40, 68, 134}) {
    const auto& c = cached(3, GridMode::uniform, n + 1, 4);
    const auto& f = cached(2, GridMode::uniform, n + 1, 4);
    ok &= c.errors->eps_u <= f.errors->eps_u * (1.0 + 1e-12);
  }
  for (int dof : {21, 41, 69, 135}) {
    const auto& c = cached(3, GridMode::adaptive, dof, 4);
    const auto& f = cached(2, GridMode::adaptive, dof, 4);
    ok &= c.errors->eps_u <= f.errors->eps_u * (1.0 + 1e-12);
  }
  criterion_line(8, "Test 3 within x2.5, constrained eps_u never worse, "
                    "fixed point <= 5 iterations",
                 ok);
  CHECK(ok);
}

TEST_CASE("criterion 9: adaptive grid is insensitive to the coarse dx") {
  const ProblemSpec spec = test1();
  const AdaptResult a = adapt(spec, SpatialGrid::unit(5), 21);
  const AdaptResult b = adapt(spec, SpatialGrid::unit(100), 21);
  bool ok = a.grid.dof() == b.grid.dof();
  if (ok)
    for (int j = 0; j < a.grid.dof(); ++j)
      ok &= a.grid.node(j) == b.grid.node(j);
  criterion_line(9, "identical grids for dx = 1/5 and dx = 1/100", ok);
  CHECK(ok);
}

TEST_CASE("criterion 10: snapshot spectrum decays sharply") {
  const auto& r = cached(1, GridMode::adaptive, 21, 1);
  const dvec& lam = r.basis.eigenvalues;
  const bool ok = lam.size() >= 2 && lam[1] <= 1e-6 * lam[0];
  criterion_line(10, "lambda_2 / lambda_1 <= 1e-6 on Test 1 snapshots", ok);
  CHECK(ok);
}

TEST_CASE("criterion 11: property suite in under 30 s") {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::mt19937 gen(1234);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  // POD orthonormality and the err-POD identity on random data
  {
    const SpatialGrid sg = SpatialGrid::unit(24);
    const TimeGrid tg = TimeGrid::uniform(1.0, 5);
    auto randtraj = [&] {
      std::vector<dvec> v(tg.dof(), dvec(sg.interior()));
      for (auto& col : v)
        for (auto& x : col) x = dist(gen);
      return Trajectory(tg, v);
    };
    dvec init(sg.interior());
    for (auto& x : init) x = dist(gen);
    const SnapshotSet snaps{sg, randtraj(), randtraj(), randtraj(), init};
    const PODBasis basis =
        compute_basis(snaps, InnerProduct::L2, BasisSize::rank(4));
    const auto W = basis.ip_operator();
    for (int i = 0; i < basis.ell; ++i)
      for (int j = 0; j < basis.ell; ++j)
        ok &= std::abs(W.quad(basis.modes[i], basis.modes[j]) -
                       (i == j ? 1.0 : 0.0)) <= 1e-10;
    const double err = projection_error(snaps, basis);
    const double tail = basis.eigenvalue_tail();
    ok &= std::abs(err - tail) <= 1e-8 * std::max(1.0, tail);
  }

  // gradient versus central finite differences, full and reduced
  {
    const ProblemSpec s = podloc_tests::smooth_problem();
    const SpatialGrid sg = SpatialGrid::unit(25);
    const TimeGrid tg(std::vector<double>{0.0, 0.1, 0.22, 0.41, 0.6, 0.85,
                                          1.0});
    const FullOcpModel full(s, sg, tg);
    const SnapshotSet snaps =
        generate_snapshots(s, sg, tg, ControlTrajectory::zero(tg, 1));
    const PODBasis basis =
        compute_basis(snaps, InnerProduct::L2, BasisSize::rank(2));
    const ReducedModel rom = assemble_reduced(basis, s, sg);
    const ReducedOcpModel reduced(s, rom, sg, tg);

    auto check_fd = [&](const auto& model) {
      ControlTrajectory u = ControlTrajectory::zero(tg, 1);
      ControlTrajectory du = ControlTrajectory::zero(tg, 1);
      for (int j = 0; j < tg.dof(); ++j) {
        u.values[j][0] = dist(gen);
        du.values[j][0] = dist(gen);
      }
      const ControlTrajectory g = model.gradient(u);
      double gd = 0.0;
      for (int j = 0; j < tg.dof(); ++j)
        gd += tg.weight(j) * g.values[j][0] * du.values[j][0];
      const double eps = 1e-5;
      ControlTrajectory up = u, um = u;
      for (int j = 0; j < tg.dof(); ++j) {
        up.values[j][0] += eps * du.values[j][0];
        um.values[j][0] -= eps * du.values[j][0];
      }
      const double fd = (model.cost(up) - model.cost(um)) / (2.0 * eps);
      return std::abs(fd - gd) <= 1e-6 * std::abs(fd);
    };
    ok &= check_fd(full);
    ok &= check_fd(reduced);
  }

  // projection monotonicity on 100 random pairs
  {
    const ProblemSpec s = test3();
    const SpatialGrid sg = SpatialGrid::unit(5);
    const TimeGrid tg = TimeGrid::uniform(1.0, 8);
    std::vector<dvec> loads(s.m);
    for (int i = 0; i < s.m; ++i) loads[i] = control_load(sg, s.chi[i]);
    for (int trial = 0; trial < 100; ++trial) {
      double pairing = 0.0;
      for (int j = 0; j < tg.dof(); ++j) {
        const double t = tg.node(j);
        dvec p1(sg.interior()), p2(sg.interior());
        for (int i = 0; i < sg.interior(); ++i) {
          p1[i] = 5.0 * dist(gen);
          p2[i] = 5.0 * dist(gen);
        }
        for (int i = 0; i < s.m; ++i) {
          const double u1 = s.clamp(i, t, -dot(loads[i], p1) / s.alpha);
          const double u2 = s.clamp(i, t, -dot(loads[i], p2) / s.alpha);
          dvec diff = p1;
          axpy(-1.0, p2, diff);
          pairing += tg.weight(j) * (u2 - u1) * dot(loads[i], diff);
        }
      }
      ok &= pairing >= -1e-12;
    }
  }

  // clamp idempotence and nonexpansiveness (exact)
  {
    const ProblemSpec s = test3();
    for (int k = 0; k < 100; ++k) {
      const double t = k / 100.0;
      for (int i = 0; i < s.m; ++i) {
        const double a = 3.0 * dist(gen), b = 3.0 * dist(gen);
        const double ca = s.clamp(i, t, a), cb = s.clamp(i, t, b);
        ok &= s.clamp(i, t, ca) == ca;
        ok &= std::abs(ca - cb) <= std::abs(a - b);
      }
    }
  }

  // trapezoidal weights sum to T
  {
    const TimeGrid g(std::vector<double>{0.0, 0.02, 0.3, 0.31, 0.77, 1.0});
    double sum = 0.0;
    for (double w : g.weights()) sum += w;
    ok &= std::abs(sum - 1.0) <= 1e-12;
  }

  // implicit Euler energy decay for f = u = 0
  {
    ProblemSpec s = test1();
    s.f = [](double, double) { return 0.0; };
    s.y0 = [](double x) { return std::sin(M_PI * x); };
    const SpatialGrid sg = SpatialGrid::unit(30);
    const TimeGrid tg = TimeGrid::uniform(1.0, 20);
    const auto mass = assemble_mass(sg);
    const Trajectory y =
        solve_state(s, sg, tg, ControlTrajectory::zero(tg, 1));
    double prev = mass.quad(y.values[0], y.values[0]);
    for (int j = 1; j < tg.dof(); ++j) {
      const double cur = mass.quad(y.values[j], y.values[j]);
      ok &= cur <= prev + 1e-14;
      prev = cur;
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  ok &= secs < 30.0;
  criterion_line(11, "property suite green in under 30 s", ok);
  CHECK(ok);
}
