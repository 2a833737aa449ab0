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

#pragma once

#include <array>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "margcert/config.hpp"
#include "margcert/linalg.hpp"

namespace margcert {

/**
 * Parameters of the three-qubit family
 *
 *   rho = p0 |0><0| (x) |psi0><psi0|
 *       + |1><1| (x) (p1 |psi1><psi1| + p2 |psi2><psi2|)
 *
 * with
 *   |psi0> = cos(alpha)|00> + sin(alpha)|11>
 *   |psi1> = (cos(beta)|0> + sin(beta)|1>) (x) (cos(gamma)|0> + sin(gamma)|1>)
 *   |psi2> = (sin(delta)|00> + cos(delta)|01> + cos(delta)|10> - sin(delta)|11>) / sqrt(2)
 *
 * Alice holds the first qubit. Angles are in radians.
 */
struct FamilyParameters {
  double p0 = 1.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

/// The six-decimal constants as published.
FamilyParameters published_parameters();

/**
 * Parameters of the reference state rho*. Identical to
 * published_parameters() except that 2.5e-8 of weight moves from p2 to p1.
 * With the rounded constants the B-C marginal has a partial-transpose
 * eigenvalue of -1.55e-8; the shift, below the printed precision, puts the
 * marginal back on the separable side.
 */
FamilyParameters reference_parameters();

/// Operator on n_qubits qubits plus its subsystem dimensions.
struct DensityMatrix {
  ComplexMatrix matrix;
  std::vector<int> dims;

  DensityMatrix() = default;
  DensityMatrix(ComplexMatrix m, std::vector<int> subsystem_dims);
  /// All-qubit subsystem list deduced from the matrix size.
  explicit DensityMatrix(ComplexMatrix m);

  int dimension() const { return static_cast<int>(matrix.rows()); }
  int parties() const { return static_cast<int>(dims.size()); }
};

/// Throws InvalidState unless rho is Hermitian, unit trace and PSD.
void validate(const DensityMatrix& rho,
              const Tolerances& tol = kDefaultTolerances);
bool is_valid_state(const DensityMatrix& rho,
                    const Tolerances& tol = kDefaultTolerances);

DensityMatrix build_family_state(const FamilyParameters& params);
DensityMatrix reference_state();

/// Published-constant instance, kept for comparison with reference_state().
DensityMatrix published_state();

/// Two-qubit components of the family, on B (x) C.
ComplexVector family_psi0(double alpha);
ComplexVector family_psi1(double beta, double gamma);
ComplexVector family_psi2(double delta);

DensityMatrix pure_state(const ComplexVector& psi, std::vector<int> dims);
/// (|000> + |111>) / sqrt(2), or with a relative minus sign.
DensityMatrix ghz_state(bool minus = false);
/// Computational basis product state from a bit string such as "010".
DensityMatrix product_state(const std::string& bits);
DensityMatrix maximally_mixed(int qubits);
/// Embeds a two-qubit state as |0><0| (x) rho on A, B, C.
DensityMatrix with_alice_zero(const DensityMatrix& rho_bc);

DensityMatrix reduce(const DensityMatrix& rho, const std::vector<int>& keep);

/// Random state: mixture of `components` Haar-random pure states with
/// random weights.
DensityMatrix random_density_matrix(int qubits, int components,
                                    std::mt19937_64& rng);

/// T_{i1 i2 i3} = Tr(rho sigma_i1 (x) sigma_i2 (x) sigma_i3).
class CorrelationTensor {
 public:
  CorrelationTensor() { values_.fill(0.0); }

  double& operator()(int i1, int i2, int i3) { return values_[index(i1, i2, i3)]; }
  double operator()(int i1, int i2, int i3) const {
    return values_[index(i1, i2, i3)];
  }
  const std::array<double, 64>& values() const { return values_; }

 private:
  static int index(int i1, int i2, int i3) { return 16 * i1 + 4 * i2 + i3; }
  std::array<double, 64> values_;
};

enum class Pair { AB, AC, BC };
const char* pair_name(Pair pair);
Pair pair_from_name(const std::string& name);
inline constexpr std::array<Pair, 3> kAllPairs{Pair::AB, Pair::AC, Pair::BC};

/// Two-party correlation table M_{jk}; M_{00} = 1 for a normalized state.
using MarginalTensor = std::array<std::array<double, 4>, 4>;

struct Marginals {
  MarginalTensor ab{}, ac{}, bc{};
  const MarginalTensor& get(Pair pair) const;
  MarginalTensor& get(Pair pair);
};

CorrelationTensor correlation_tensor(const DensityMatrix& rho);

/// rho = (1/8) sum T_{i1 i2 i3} sigma (x) sigma (x) sigma. Positivity is not
/// checked.
DensityMatrix state_from_tensor(const CorrelationTensor& t);

MarginalTensor marginal_tensor(const CorrelationTensor& t, Pair pair);
Marginals all_marginals(const CorrelationTensor& t);

/// Correlation table of a two-qubit state.
MarginalTensor two_qubit_tensor(const DensityMatrix& rho);

// Fixture files: one line "i1 i2 i3 value" per nonzero component, sorted
// lexicographically, 15 significant digits.
void write_tensor_fixture(std::ostream& out, const CorrelationTensor& t,
                          double zero_threshold = 1e-15);
CorrelationTensor read_tensor_fixture(std::istream& in);

// Marginal fixture: one line "PAIR j k value" per nonzero entry with PAIR in
// {AB, AC, BC}.
void write_marginal_fixture(std::ostream& out, const Marginals& m,
                            double zero_threshold = 1e-15);
Marginals read_marginal_fixture(std::istream& in);

/// Plain text, 64 lines of "re im" in row-major order of the 8x8 matrix.
/// Validates the result.
DensityMatrix read_state_file(std::istream& in,
                              const Tolerances& tol = kDefaultTolerances);
void write_state_file(std::ostream& out, const DensityMatrix& rho);

}  // namespace margcert
