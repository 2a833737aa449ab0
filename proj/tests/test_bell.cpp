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


#include <numbers>

#include <catch2/catch_amalgamated.hpp>

#include "margcert/bell.hpp"
#include "margcert/errors.hpp"
#include "oracles.hpp"

using namespace margcert;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

oracle::Mat obs(double theta) {
  return std::cos(theta) * oracle::pauli(3) + std::sin(theta) * oracle::pauli(1);
}

// BI written out term by term from the factored form.
oracle::Mat bi_operator_oracle(double ta, double tb1, double tc1, double tb2, double tc2) {
  using oracle::kron;
  const oracle::Mat i = oracle::pauli(0), a = obs(ta), b1 = obs(tb1), b2 = obs(tb2),
                    c1 = obs(tc1), c2 = obs(tc2);
  const oracle::Mat ia = kron(kron(a, i), i);
  const oracle::Mat lin = kron(kron(i, b1), i) - kron(kron(i, b2), i) - kron(kron(i, i), c2);
  const oracle::Mat chsh = kron(kron(i, b1), c1) + kron(kron(i, b1), c2) +
                           kron(kron(i, b2), c1) - kron(kron(i, b2), c2);
  return -ia + lin + ia * lin + chsh;
}

MeasurementSet random_settings(const std::vector<int>& counts, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(0.0, kPi), p(0.0, 2 * kPi);
  MeasurementSet m;
  for (int c : counts) {
    m.emplace_back();
    for (int s = 0; s < c; ++s) m.back().push_back(Observable::spherical(t(rng), p(rng)));
  }
  return m;
}

DensityMatrix psi_plus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(1) = v(2) = 1.0 / std::sqrt(2.0);
  return pure_state(v, {2, 2});
}

MeasurementSet tsirelson_settings() {
  return {{Observable::equatorial(0.0), Observable::equatorial(kPi / 2)},
          {Observable::equatorial(kPi / 4), Observable::equatorial(-kPi / 4)}};
}

}  // namespace

TEST_CASE("equatorial observables") {
  const auto z = equatorial_observable(0.0), x = equatorial_observable(kPi / 2),
             mz = equatorial_observable(kPi);
  CHECK((z.matrix() - pauli(3)).norm() < 1e-15);
  CHECK((x.matrix() - pauli(1)).norm() < 1e-15);
  CHECK((mz.matrix() + pauli(3)).norm() < 1e-15);
  const auto e = hermitian_eigen(Observable::spherical(0.7, 2.1).matrix());
  CHECK_THAT(e.eigenvalues(0), WithinAbs(-1.0, 1e-14));
  CHECK_THAT(e.eigenvalues(1), WithinAbs(1.0, 1e-14));
  CHECK_THROWS_AS(Observable::from_bloch({1.0, 0.1, 0.0}), InvalidObservable);
}

TEST_CASE("builtin expression coefficients") {
  const auto bi = builtin_expression("BI");
  CHECK(bi.coefficient({1, 1, 0}) == 1.0);
  CHECK(bi.coefficient({1, 0, 0}) == -1.0);
  CHECK(bi.coefficient({1, 2, 0}) == -1.0);
  CHECK(bi.coefficient({1, 0, 2}) == -1.0);
  CHECK(bi.coefficient({0, 2, 2}) == -1.0);
  CHECK(bi.terms().size() == 11);
  CHECK(builtin_expression("Mermin").coefficient({1, 1, 1}) == -1.0);
  const auto s4 = builtin_expression("Sliwa4");
  CHECK(s4.coefficient({1, 2, 2}) == 1.0);
  CHECK(s4.coefficient({1, 0, 0}) == 2.0);
  CHECK(s4.coefficient({0, 2, 2}) == -1.0);
  CHECK_THROWS_AS(builtin_expression("Sliwa5"), UnknownName);
}

TEST_CASE("local bounds") {
  CHECK(local_bound(builtin_expression("BI")) == 3.0);
  CHECK(local_bound(builtin_expression("Mermin")) == 2.0);
  CHECK(local_bound(builtin_expression("Sliwa4")) == 2.0);
  CHECK(local_bound(builtin_expression("CHSH")) == 2.0);
}

TEST_CASE("local bound is invariant under outcome relabeling", "[property]") {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> coeff(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    BellExpression e({2, 2, 1});
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 2; ++b)
        for (int c = 0; c <= 1; ++c) e.add({a, b, c}, coeff(rng));
    std::uniform_int_distribution<int> pick_party(0, 2);
    const int party = pick_party(rng);
    const int setting = 1 + (party == 2 ? 0 : static_cast<int>(rng() % 2));
    BellExpression flipped(e.settings());
    for (const auto& [term, c] : e.terms()) flipped.add(term, term[party] == setting ? -c : c);
    CHECK(local_bound(flipped) == local_bound(e));
  }
}

TEST_CASE("bell_operator examples") {
  const ComplexMatrix chsh = bell_operator(builtin_expression("CHSH"), tsirelson_settings());
  CHECK_THAT(hermitian_eigen(chsh).eigenvalues(3), WithinAbs(2 * std::sqrt(2.0), 1e-12));
  BellExpression constant({1, 1, 1});
  constant.add({0, 0, 0}, 1.5);
  MeasurementSet m{{Observable()}, {Observable()}, {Observable()}};
  CHECK((bell_operator(constant, m) - 1.5 * ComplexMatrix::Identity(8, 8)).norm() < 1e-15);

  const ComplexMatrix bi = bell_operator(builtin_expression("BI"),
                                         bi_settings(0.0, 0.320997, 1.442524, 2.707329, -3.108820));
  CHECK((bi - bi_operator_oracle(0.0, 0.320997, 1.442524, 2.707329, -3.108820)).norm() < 1e-13);
  CHECK_THROWS_AS(bell_operator(builtin_expression("BI"), m), SettingsMismatch);
}

TEST_CASE("quantum values at the reference settings") {
  const DensityMatrix rho = reference_state();
  const auto m = bi_settings(0.0, 0.320997, 1.442524, 2.707329, -3.108820);
  const double q = quantum_value(rho, builtin_expression("BI"), m);
  CHECK_THAT(q, WithinAbs(3.017583, 5e-6));
  const double oracle_q =
      (rho.matrix * bi_operator_oracle(0.0, 0.320997, 1.442524, 2.707329, -3.108820)).trace().real();
  CHECK_THAT(q, WithinAbs(oracle_q, 1e-12));
  CHECK_THAT(quantum_value(rho, builtin_expression("Mermin"), mermin_settings(3.500760, 1.605042)),
             WithinAbs(2.086929, 5e-6));
}

TEST_CASE("tensor and trace routes agree") {
  std::mt19937_64 rng(6);
  for (const char* name : {"BI", "Mermin", "Sliwa4"}) {
    const auto e = builtin_expression(name);
    for (int trial = 0; trial < 20; ++trial) {
      const DensityMatrix rho = random_density_matrix(3, 3, rng);
      const auto m = random_settings(e.settings(), rng);
      CHECK_THAT(quantum_value(correlation_tensor(rho), e, m),
                 WithinAbs(quantum_value(rho, e, m), 1e-12));
    }
  }
}

TEST_CASE("white noise gives zero for expressions without a constant") {
  std::mt19937_64 rng(9);
  for (const char* name : {"BI", "Mermin", "Sliwa4"}) {
    const auto e = builtin_expression(name);
    CHECK_THAT(quantum_value(maximally_mixed(3), e, random_settings(e.settings(), rng)),
               WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("Tsirelson ceiling on random states and settings", "[property]") {
  std::mt19937_64 rng(1000);
  const auto chsh = builtin_expression("CHSH");
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const DensityMatrix rho = random_density_matrix(2, 1 + trial % 4, rng);
    worst = std::max(worst, quantum_value(rho, chsh, random_settings({2, 2}, rng)));
  }
  CHECK(worst <= 2 * std::sqrt(2.0) + 1e-9);
}

TEST_CASE("conditional decomposition at the reference settings") {
  const auto m = bi_settings(0.0, 0.320997, 1.442524, 2.707329, -3.108820);
  const auto d = conditional_decomposition(reference_state(), builtin_expression("BI"), m);
  CHECK_THAT(d.p_plus, WithinAbs(0.759101, 5e-6));
  CHECK_THAT(d.q_plus, WithinAbs(2.898134, 5e-6));
  CHECK_THAT(d.q_minus, WithinAbs(3.393981, 5e-6));
  CHECK_THAT(d.recombined(), WithinAbs(quantum_value(reference_state(), builtin_expression("BI"), m), 1e-9));
  CHECK_THAT(trace(d.rho_plus.matrix).real(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(trace(d.rho_minus.matrix).real(), WithinAbs(1.0, 1e-12));
  // Conditioned on A1 = +1 the state is |psi0> itself.
  const auto psi0 = projector(family_psi0(reference_parameters().alpha));
  CHECK((d.rho_plus.matrix - psi0).norm() < 1e-12);
}

TEST_CASE("Sliwa4 plus branch is the constant 2") {
  std::mt19937_64 rng(12);
  const auto s4 = builtin_expression("Sliwa4");
  for (int trial = 0; trial < 10; ++trial) {
    auto m = random_settings(s4.settings(), rng);
    m[0][0] = Observable::equatorial(0.0);
    const auto d = conditional_decomposition(reference_state(), s4, m);
    CHECK_THAT(d.q_plus, WithinAbs(2.0, 1e-12));
  }
}

TEST_CASE("deterministic outcome gives p_plus = 1") {
  std::mt19937_64 rng(14);
  const DensityMatrix rho = with_alice_zero(random_density_matrix(2, 2, rng));
  const auto bi = builtin_expression("BI");
  const auto m = random_settings(bi.settings(), rng);
  MeasurementSet mz = m;
  mz[0][0] = Observable::equatorial(0.0);
  const auto d = conditional_decomposition(rho, bi, mz);
  CHECK_THAT(d.p_plus, WithinAbs(1.0, 1e-14));
  CHECK_THAT(d.recombined(), WithinAbs(d.q_plus, 1e-14));
  CHECK_THAT(quantum_value(rho, bi, mz), WithinAbs(d.q_plus, 1e-12));
  CHECK_THROWS_AS(conditional_decomposition(rho, builtin_expression("Mermin"),
                                            random_settings({2, 2, 2}, rng)),
                  SettingNotUnique);
}

TEST_CASE("recombination identity on random states", "[property]") {
  std::mt19937_64 rng(31);
  for (const char* name : {"BI", "Sliwa4"}) {
    const auto e = builtin_expression(name);
    for (int trial = 0; trial < 100; ++trial) {
      const DensityMatrix rho = random_density_matrix(3, 1 + trial % 4, rng);
      auto m = random_settings(e.settings(), rng);
      m[0][0] = Observable::equatorial(0.0);
      const auto d = conditional_decomposition(rho, e, m);
      CHECK_THAT(d.recombined(), WithinAbs(quantum_value(rho, e, m), 1e-9));
    }
  }
}

TEST_CASE("Horodecki formula") {
  CHECK_THAT(horodecki_chsh(psi_plus()).value, WithinAbs(2 * std::sqrt(2.0), 1e-12));
  std::mt19937_64 rng(41);
  const auto chsh = builtin_expression("CHSH");
  for (int trial = 0; trial < 200; ++trial) {
    const DensityMatrix rho = random_density_matrix(2, 1 + trial % 4, rng);
    const auto h = horodecki_chsh(rho);
    // The constructed settings attain the value, and no sampled setting beats it.
    CHECK_THAT(quantum_value(rho, chsh, h.settings), WithinAbs(h.value, 1e-9));
    for (int k = 0; k < 5; ++k) CHECK(quantum_value(rho, chsh, random_settings({2, 2}, rng)) <= h.value + 1e-12);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = oracle::random_mixture(2, 2, rng), b = oracle::random_mixture(2, 2, rng);
    CHECK(horodecki_chsh(DensityMatrix(kron(a, b), {2, 2})).value <= 2.0 + 1e-12);
  }
  CHECK_THROWS_AS(horodecki_chsh(maximally_mixed(3)), DimensionMismatch);
}

TEST_CASE("Sliwa4 at the reference state") {
  const auto r = sliwa4_quantum_value(reference_state());
  CHECK_THAT(r.chsh_max, WithinAbs(2.693620, 5e-6));
  CHECK_THAT(r.q_minus, WithinAbs(3.387240, 5e-6));
  CHECK_THAT(r.evaluation.quantum, WithinAbs(2.334184, 5e-6));
  CHECK_THAT(r.evaluation.ratio, WithinAbs(1.167092, 5e-6));
  CHECK(r.evaluation.local == 2.0);
  CHECK(r.evaluation.violated);
  // The constructed settings reproduce the value through the generic route.
  CHECK_THAT(quantum_value(reference_state(), builtin_expression("Sliwa4"), r.settings),
             WithinAbs(r.evaluation.quantum, 1e-9));

  const auto flat = sliwa4_quantum_value(with_alice_zero(maximally_mixed(2)));
  CHECK_THAT(flat.evaluation.quantum, WithinAbs(2.0, 1e-12));
  CHECK_FALSE(flat.evaluation.violated);
}

TEST_CASE("evaluation results") {
  const auto v = make_evaluation(3.1, 3.0);
  CHECK(v.violated);
  CHECK_THAT(v.ratio, WithinAbs(3.1 / 3.0, 1e-15));
  CHECK_FALSE(make_evaluation(3.0 + 5e-10, 3.0).violated);
}

TEST_CASE("expression JSON round trip") {
  for (const char* name : {"BI", "Mermin", "Sliwa4", "CHSH"}) {
    const auto e = builtin_expression(name);
    CHECK(expression_from_json(to_json(e), e.settings()) == e);
  }
  CHECK_THROWS_AS(expression_from_json("[1]"), ParseError);
  CHECK_THROWS_AS(expression_from_json("{\"1,a\": 1}"), ParseError);
}

TEST_CASE("embedded CHSH acts on the listed parties") {
  const auto e = embed_expression(builtin_expression("CHSH"), 3, {1, 2});
  const auto m = MeasurementSet{{}, tsirelson_settings()[0], tsirelson_settings()[1]};
  CHECK_THAT(quantum_value(with_alice_zero(psi_plus()), e, m),
             WithinAbs(quantum_value(psi_plus(), builtin_expression("CHSH"), tsirelson_settings()), 1e-12));
}
