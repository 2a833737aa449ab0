// Copyright 2026 The margcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "margcert/bell.hpp"
#include "margcert/cli.hpp"
#include "margcert/linalg.hpp"
#include "margcert/optimize.hpp"
#include "margcert/sdp.hpp"
#include "margcert/separability.hpp"
#include "margcert/states.hpp"
#include "oracles.hpp"

using namespace margcert;

namespace {

constexpr double kSix = 5e-6;  // six-decimal reference values

struct Criterion {
  std::vector<Check> checks;
  double budget = 0.0;  ///< seconds

  void near(const std::string& n, double v, double t, double tol) {
    checks.push_back(check_near(n, v, t, tol));
  }
  void at_least(const std::string& n, double v, double t, double slack) {
    checks.push_back(check_at_least(n, v, t, slack));
  }
  void at_most(const std::string& n, double v, double t, double slack) {
    checks.push_back(check_at_most(n, v, t, slack));
  }
  void flag(const std::string& n, bool ok) { checks.push_back(check_flag(n, ok)); }
};

bool run(int number, const char* title, double budget,
         const std::function<void(Criterion&)>& body) {
  Criterion c;
  c.budget = budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.flag(std::string("exception: ") + e.what(), false);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.at_most("runtime_s", seconds, budget, 0.0);
  const bool pass = std::all_of(c.checks.begin(), c.checks.end(),
                                [](const Check& k) { return k.pass; });
  std::printf("%s  %2d  %-34s %8.2f s\n", pass ? "PASS" : "FAIL", number, title, seconds);
  for (const auto& k : c.checks) {
    if (k.kind == Check::Kind::kFlag)
      std::printf("        %s %s\n", k.pass ? "ok  " : "FAIL", k.name.c_str());
    else
      std::printf("        %s %-28s %.10f (target %.10f, tol %.1e)\n", k.pass ? "ok  " : "FAIL",
                  k.name.c_str(), k.value, k.target, k.tolerance);
  }
  std::fflush(stdout);
  return pass;
}

MeasurementSet bi_reference() { return bi_settings(0.0, 0.320997, 1.442524, 2.707329, -3.108820); }

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

int main() {
  const DensityMatrix rho = reference_state();
  const auto bi = builtin_expression("BI");
  int failures = 0;
  auto tally = [&](bool ok) { failures += ok ? 0 : 1; };

  tally(run(1, "separable marginals", 1.0, [&](Criterion& c) {
    for (const auto& r : certify_all_marginals(rho)) {
      c.at_least("lmin_PT " + r.pair, r.min_eigenvalue, 0.0, 1e-10);
      c.flag("separable " + r.pair, r.separable);
    }
  }));

  tally(run(2, "BI evaluation", 1.0, [&](Criterion& c) {
    c.near("Q", quantum_value(rho, bi, bi_reference()), 3.017583, kSix);
    c.near("L", local_bound(bi), 3.0, 0.0);
  }));

  tally(run(3, "conditional decomposition", 1.0, [&](Criterion& c) {
    const auto d = conditional_decomposition(rho, bi, bi_reference());
    c.near("p_plus", d.p_plus, 0.759101, kSix);
    c.near("Q_plus", d.q_plus, 2.898134, kSix);
    c.near("Q_minus", d.q_minus, 3.393981, kSix);
    c.near("recombined", d.recombined(), quantum_value(rho, bi, bi_reference()), 1e-9);
  }));

  tally(run(4, "family search, psi2 = Psi+", 60.0, [&](Criterion& c) {
    FamilySearchConfig cfg;
    cfg.freeze_psi_plus = true;
    FamilyParameters start = published_parameters();
    start.delta = 0.0;
    cfg.initial = start;
    cfg.initial_angles = std::array<double, 4>{0.320997, 1.442524, 2.707329, -3.108820};
    const auto r = optimize_family(cfg);
    c.at_least("Q", r.value, 3.017454, 1e-4);
    c.at_least("det_PT_BC", r.determinant, 0.0, 1e-9);
  }));

  tally(run(5, "seesaw, 20 restarts", 600.0, [&](Criterion& c) {
    SeesawConfig cfg;
    cfg.restarts = 20;
    const auto r = seesaw(bi, cfg);
    c.at_least("best Q", r.best_value, 3.017924, 5e-4);
    c.at_most("max decrease", r.max_decrease, 0.0, 1e-9);
    bool separable = true;
    for (const auto& m : certify_all_marginals(r.best_state)) separable = separable && m.separable;
    c.flag("best state has separable marginals", separable);
  }));

  tally(run(6, "Mermin", 61.0, [&](Criterion& c) {
    const auto mermin = builtin_expression("Mermin");
    const auto fixed = mermin_settings(3.500760, 1.605042);
    c.near("Q fixed", quantum_value(rho, mermin, fixed), 2.086929, kSix);
    c.near("L", local_bound(mermin), 2.0, 0.0);
    const auto best = optimize_measurements(rho, mermin, {}, fixed);
    c.at_least("Q general", best.value, 2.087190, 1e-4);
  }));

  tally(run(7, "Sliwa4", 1.0, [&](Criterion& c) {
    const auto s = sliwa4_quantum_value(rho);
    c.near("CHSH_max", s.chsh_max, 2.693620, kSix);
    c.near("Q_minus", s.q_minus, 3.387240, kSix);
    c.near("Q", s.evaluation.quantum, 2.334184, kSix);
    c.near("Q/L", s.evaluation.ratio, 1.167092, kSix);
    c.near("L", local_bound(builtin_expression("Sliwa4")), 2.0, 0.0);
  }));

  tally(run(8, "uniqueness", 120.0, [&](Criterion& c) {
    const auto u = uniqueness_test(rho);
    int optimal = 0;
    double gap = 0.0;
    for (const auto& e : u.entries) {
      optimal += e.lower_solution.optimal() + e.upper_solution.optimal();
      gap = std::max({gap, e.lower_solution.duality_gap, e.upper_solution.duality_gap});
    }
    c.near("optimal SDPs", optimal, 54, 0.0);
    c.at_most("max duality gap", gap, 0.0, 1e-8);
    c.at_most("max T^U - T^L", u.max_gap, 0.0, 1e-6);
    c.flag("unique", u.unique);
  }));

  tally(run(9, "negative controls", 120.0, [&](Criterion& c) {
    const auto u = uniqueness_test(ghz_state());
    c.near("GHZ gap T111", u.at(1, 1, 1).gap, 2.0, 1e-6);
    const auto ghz = cmd_certify(ghz_state());
    c.near("GHZ failing stage", ghz.failed_stage, 2, 0.0);
    const auto product = cmd_certify(product_state("000"));
    c.near("000 failing stage", product.failed_stage, 3, 0.0);
  }));

  tally(run(10, "property suites", 300.0, [&](Criterion& c) {
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      const int d = 2 + static_cast<int>(seed % 15);
      const ComplexMatrix a = oracle::random_hermitian(d, rng);
      const auto e = hermitian_eigen(a);
      const ComplexMatrix& v = e.eigenvectors;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(a);
      if (max_abs(v * e.eigenvalues.asDiagonal() * v.adjoint() - a) > 1e-10 ||
          max_abs(v.adjoint() * v - ComplexMatrix::Identity(d, d)) > 1e-10 ||
          (e.eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff() > 1e-10)
        ++bad;
      if (d == 8) {
        const DensityMatrix s = random_density_matrix(3, 1 + seed % 4, rng);
        if (max_abs(state_from_tensor(correlation_tensor(s)).matrix - s.matrix) > 1e-10) ++bad;
      }
    }
    c.near("linalg violations (100 seeds)", bad, 0, 0.0);

    bad = 0;
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
      const DensityMatrix s(oracle::random_mixture(4, 1 + trial % 4, rng), {2, 2});
      const double lmin = ppt_min_eigenvalue(s);
      if (std::abs(lmin) > 1e-10 && (det_partial_transpose(s) >= 0.0) != (lmin >= 0.0)) ++bad;
    }
    c.near("PPT/det disagreements (1000)", bad, 0, 0.0);

    bad = 0;
    const auto chsh = builtin_expression("CHSH");
    for (int trial = 0; trial < 1000; ++trial) {
      const DensityMatrix s = random_density_matrix(2, 1 + trial % 4, rng);
      if (quantum_value(s, chsh, random_measurements({2, 2}, rng)) > 2 * std::sqrt(2.0) + 1e-9)
        ++bad;
    }
    c.near("Tsirelson violations (1000)", bad, 0, 0.0);

    SeesawConfig cfg;
    cfg.restarts = 4;
    cfg.seed = 99;
    c.at_most("seesaw max decrease", seesaw(bi, cfg).max_decrease, 0.0, 1e-9);
  }));

  std::printf("%s  %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
