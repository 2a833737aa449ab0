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

namespace margcert {

/**
 * Numerical tolerances used across the library. Every check that compares a
 * floating point quantity against a threshold reads it from here.
 */
struct Tolerances {
  double hermiticity = 1e-12;      ///< elementwise |A - A^dagger|
  double eigen_reconstruction = 1e-10;
  double trace = 1e-10;            ///< |Tr rho - 1|
  double psd = 1e-10;              ///< min eigenvalue >= -psd
  double probability_sum = 1e-9;   ///< |p0 + p1 + p2 - 1|
  double bloch_norm = 1e-10;       ///< | |n| - 1 |
  double separability = 1e-10;     ///< PPT min eigenvalue >= -separability
  double violation = 1e-9;         ///< Q > L + violation
  double tensor_magnitude = 1e-9;  ///< |T_ijk| <= 1 + tensor_magnitude
  double sdp_gap = 1e-8;           ///< relative to max(1, |primal objective|)
  double sdp_residual = 1e-8;
  double uniqueness = 1e-6;        ///< max (T^U - T^L)
  double monotonicity = 1e-9;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace margcert
