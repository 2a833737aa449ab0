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

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "margcert/config.hpp"

namespace margcert {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Eigenvalues ascending; eigenvectors are the matching columns.
struct HermitianEigenResult {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

/**
 * Pauli matrix by index: 0 = identity, 1 = sigma_x, 2 = sigma_y, 3 = sigma_z.
 * Basis order is |0>, |1>.
 */
const ComplexMatrix& pauli(int index);

/// sigma_{i1} (x) sigma_{i2} (x) ... in party order, first index is the
/// leftmost tensor factor.
ComplexMatrix pauli_string(const std::vector<int>& indices);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix dagger(const ComplexMatrix& a);

double max_asymmetry(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a,
                  double tol = kDefaultTolerances.hermiticity);
bool all_finite(const ComplexMatrix& a);
Complex trace(const ComplexMatrix& a);

/// Re Tr(a b) without forming the product.
double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

/**
 * Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
 * rotations. Throws NotHermitian when the input asymmetry exceeds tol
 * (scaled by max(1, largest entry magnitude)).
 */
HermitianEigenResult hermitian_eigen(
    const ComplexMatrix& a, double tol = kDefaultTolerances.hermiticity);

double min_eigenvalue(const ComplexMatrix& a);

/**
 * Partial trace over every subsystem not listed in keep. dims lists the
 * subsystem dimensions in tensor order; keep holds subsystem indices, and
 * the kept factors stay in their original relative order.
 */
ComplexMatrix partial_trace(const ComplexMatrix& a, const std::vector<int>& dims,
                            const std::vector<int>& keep);

/// Transpose on the tensor factor with index subsystem.
ComplexMatrix partial_transpose(const ComplexMatrix& a,
                                const std::vector<int>& dims, int subsystem);

/**
 * Lifts op, acting on the listed subsystems (in that order), to the full
 * register with identity on every other subsystem.
 */
ComplexMatrix embed_operator(const ComplexMatrix& op, const std::vector<int>& dims,
                             const std::vector<int>& targets);

/// Projector |v><v|.
ComplexMatrix projector(const ComplexVector& v);

}  // namespace margcert
