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
#include <string>

#include "margcert/config.hpp"
#include "margcert/states.hpp"

namespace margcert {

/// PPT verdict for one two-qubit reduction. For two qubits PPT is equivalent
/// to separability.
struct SeparabilityReport {
  std::string pair;
  double min_eigenvalue = 0.0;  ///< of the partial transpose
  double determinant = 0.0;     ///< of the partial transpose
  bool separable = false;
};

/// Smallest eigenvalue of rho^{T_subsystem} for a two-qubit rho.
double ppt_min_eigenvalue(const DensityMatrix& rho, int subsystem = 1);

/// det(rho^{T_B}) as the product of its eigenvalues. A two-qubit partial
/// transpose has at most one negative eigenvalue, so det >= 0 iff PPT.
double det_partial_transpose(const DensityMatrix& rho);

SeparabilityReport separability_report(const DensityMatrix& rho_two_qubit,
                                       const std::string& label,
                                       const Tolerances& tol = kDefaultTolerances);

/// Reports for the AB, AC and BC reductions of a three-qubit state, in that
/// order.
std::array<SeparabilityReport, 3> certify_all_marginals(
    const DensityMatrix& rho, const Tolerances& tol = kDefaultTolerances);

/// {"determinant":..., "min_eigenvalue":..., "pair":..., "separable":...}
std::string to_json(const SeparabilityReport& report);

}  // namespace margcert
