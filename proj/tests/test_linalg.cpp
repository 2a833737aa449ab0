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


#include <catch2/catch_amalgamated.hpp>

#include "margcert/errors.hpp"
#include "margcert/linalg.hpp"
#include "margcert/states.hpp"
#include "oracles.hpp"

using namespace margcert;
using Catch::Matchers::WithinAbs;

namespace {

double max_abs(const ComplexMatrix& a) { return a.cwiseAbs().maxCoeff(); }

ComplexMatrix ket_bra(int dim, int r, int c) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(r, c) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("pauli matrices follow the fixed convention") {
  for (int i = 0; i < 4; ++i) CHECK(max_abs(pauli(i) - oracle::pauli(i)) == 0.0);
  CHECK(max_abs(pauli_string({1, 2, 3}) - oracle::pauli3(1, 2, 3)) == 0.0);
  CHECK_THROWS_AS(pauli(4), DimensionMismatch);
}

TEST_CASE("kron examples") {
  CHECK(max_abs(kron(pauli(0), pauli(0)) - ComplexMatrix::Identity(4, 4)) == 0.0);
  ComplexMatrix zz = ComplexMatrix::Zero(4, 4);
  zz.diagonal() << 1, -1, -1, 1;
  CHECK(max_abs(kron(pauli(3), pauli(3)) - zz) == 0.0);
  ComplexVector k00 = ComplexVector::Zero(4), k11 = ComplexVector::Zero(4);
  k00(0) = 1.0;
  k11(3) = 1.0;
  CHECK((kron(pauli(1), pauli(1)) * k00 - k11).norm() == 0.0);
}

TEST_CASE("kron matches the index formula and is associative") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = oracle::random_hermitian(2, rng), b = oracle::random_hermitian(4, rng),
                        c = oracle::random_hermitian(2, rng);
    CHECK(max_abs(kron(a, b) - oracle::kron(a, b)) == 0.0);
    CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-15);
    CHECK_THAT(trace(kron(a, b)).real(), WithinAbs((trace(a) * trace(b)).real(), 1e-12));
  }
}

TEST_CASE("dagger examples") {
  CHECK(max_abs(dagger(pauli(2)) - pauli(2)) == 0.0);
  std::mt19937_64 rng(3);
  ComplexMatrix a = ComplexMatrix::Random(3, 5);
  CHECK(max_abs(dagger(dagger(a)) - a) == 0.0);
  CHECK(max_abs(dagger(ket_bra(2, 0, 1)) - ket_bra(2, 1, 0)) == 0.0);
}

TEST_CASE("hermitian_eigen examples") {
  auto z = hermitian_eigen(pauli(3));
  CHECK_THAT(z.eigenvalues(0), WithinAbs(-1.0, 1e-14));
  CHECK_THAT(z.eigenvalues(1), WithinAbs(1.0, 1e-14));

  ComplexVector psi = ComplexVector::Zero(4);
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  auto e = hermitian_eigen(projector(psi));
  for (int i = 0; i < 3; ++i) CHECK_THAT(e.eigenvalues(i), WithinAbs(0.0, 1e-14));
  CHECK_THAT(e.eigenvalues(3), WithinAbs(1.0, 1e-14));

  const ComplexMatrix bc = partial_trace(reference_state().matrix, {2, 2, 2}, {1, 2});
  CHECK(hermitian_eigen(bc).eigenvalues.minCoeff() >= -1e-12);
}

TEST_CASE("hermitian_eigen rejects non-Hermitian input") {
  ComplexMatrix a = pauli(1);
  a(0, 1) += 1e-6;
  CHECK_THROWS_AS(hermitian_eigen(a), NotHermitian);
  CHECK_THROWS_AS(hermitian_eigen(ComplexMatrix::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("hermitian_eigen property: reconstruction, orthonormality, Eigen oracle",
          "[property]") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    std::mt19937_64 rng(seed);
    const int d = 2 + static_cast<int>(seed % 15);  // 2..16
    const ComplexMatrix a = oracle::random_hermitian(d, rng);
    const auto e = hermitian_eigen(a);
    const ComplexMatrix& v = e.eigenvectors;
    const ComplexMatrix recon = v * e.eigenvalues.asDiagonal() * v.adjoint();
    INFO("seed " << seed << " dim " << d);
    CHECK(max_abs(recon - a) <= 1e-10);
    CHECK(max_abs(v.adjoint() * v - ComplexMatrix::Identity(d, d)) <= 1e-10);
    for (int i = 1; i < d; ++i) CHECK(e.eigenvalues(i - 1) <= e.eigenvalues(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(a);
    CHECK((e.eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("partial_trace examples") {
  std::mt19937_64 rng(11);
  const ComplexMatrix ra = oracle::random_mixture(2, 2, rng);
  const ComplexMatrix rbc = oracle::random_mixture(4, 3, rng);
  CHECK(max_abs(partial_trace(kron(ra, rbc), {2, 2, 2}, {1, 2}) - rbc) < 1e-15);

  const ComplexMatrix ghz = ghz_state().matrix;
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect(0, 0) = expect(3, 3) = 0.5;
  CHECK(max_abs(partial_trace(ghz, {2, 2, 2}, {1, 2}) - expect) < 1e-15);

  const FamilyParameters p = reference_parameters();
  const ComplexMatrix mix = p.p0 * projector(family_psi0(p.alpha)) +
                            p.p1 * projector(family_psi1(p.beta, p.gamma)) +
                            p.p2 * projector(family_psi2(p.delta));
  CHECK(max_abs(partial_trace(reference_state().matrix, {2, 2, 2}, {1, 2}) - mix) < 1e-12);
}

TEST_CASE("partial_trace agrees with the bit-arithmetic oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix rho = oracle::random_mixture(8, 3, rng);
    for (auto [p, q] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
      const ComplexMatrix got = partial_trace(rho, {2, 2, 2}, {p, q});
      CHECK(max_abs(got - oracle::keep_two(rho, p, q)) < 1e-15);
      CHECK(max_asymmetry(got) <= 1e-12);
      CHECK_THAT(trace(got).real(), WithinAbs(1.0, 1e-12));
    }
  }
  CHECK_THROWS_AS(partial_trace(ComplexMatrix::Identity(8, 8), {2, 2}, {0}), DimensionMismatch);
}

TEST_CASE("partial_transpose examples") {
  std::mt19937_64 rng(13);
  const ComplexMatrix rb = oracle::random_mixture(2, 2, rng), rc = oracle::random_mixture(2, 2, rng);
  CHECK(max_abs(partial_transpose(kron(rb, rc), {2, 2}, 0) - kron(rb.transpose(), rc)) < 1e-15);

  ComplexVector psi = ComplexVector::Zero(4);
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  const auto e = hermitian_eigen(partial_transpose(projector(psi), {2, 2}, 1));
  CHECK_THAT(e.eigenvalues(0), WithinAbs(-0.5, 1e-14));
  for (int i = 1; i < 4; ++i) CHECK_THAT(e.eigenvalues(i), WithinAbs(0.5, 1e-14));

  const ComplexMatrix rho = oracle::random_mixture(8, 4, rng);
  for (int s = 0; s < 3; ++s) {
    const ComplexMatrix once = partial_transpose(rho, {2, 2, 2}, s);
    CHECK(max_abs(partial_transpose(once, {2, 2, 2}, s) - rho) == 0.0);
    CHECK(max_asymmetry(once) <= 1e-12);
  }
  const ComplexMatrix two = oracle::random_mixture(4, 2, rng);
  CHECK(max_abs(partial_transpose(two, {2, 2}, 1) - oracle::transpose_second(two)) == 0.0);
  CHECK_THROWS_AS(partial_transpose(two, {2, 2}, 2), DimensionMismatch);
}

TEST_CASE("embed_operator places the factor on the listed qubits") {
  std::mt19937_64 rng(17);
  const ComplexMatrix a = oracle::random_hermitian(2, rng), b = oracle::random_hermitian(2, rng);
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK(max_abs(embed_operator(kron(a, b), {2, 2, 2}, {0, 2}) - kron(kron(a, i2), b)) < 1e-15);
  CHECK(max_abs(embed_operator(kron(a, b), {2, 2, 2}, {2, 1}) - kron(kron(i2, b), a)) < 1e-15);
  CHECK_THROWS_AS(embed_operator(a, {2, 2}, {0, 0}), DimensionMismatch);
}
