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

#include "margcert/separability.hpp"

#include <json.hpp>

#include "margcert/errors.hpp"

namespace margcert {

namespace {

void check_two_qubits(const DensityMatrix& rho) {
  if (rho.dimension() != 4) throw DimensionMismatch("expected a two-qubit state");
}

RealVector pt_spectrum(const DensityMatrix& rho, int subsystem) {
  check_two_qubits(rho);
  if (subsystem < 0 || subsystem > 1) throw DimensionMismatch("subsystem must be 0 or 1");
  return hermitian_eigen(partial_transpose(rho.matrix, {2, 2}, subsystem)).eigenvalues;
}

}  // namespace

double ppt_min_eigenvalue(const DensityMatrix& rho, int subsystem) {
  return pt_spectrum(rho, subsystem)(0);
}

double det_partial_transpose(const DensityMatrix& rho) {
  return pt_spectrum(rho, 1).prod();
}

SeparabilityReport separability_report(const DensityMatrix& rho,
                                       const std::string& label,
                                       const Tolerances& tol) {
  const RealVector spectrum = pt_spectrum(rho, 1);
  SeparabilityReport r;
  r.pair = label;
  r.min_eigenvalue = spectrum(0);
  r.determinant = spectrum.prod();
  r.separable = r.min_eigenvalue >= -tol.separability;
  return r;
}

std::array<SeparabilityReport, 3> certify_all_marginals(const DensityMatrix& rho,
                                                        const Tolerances& tol) {
  if (rho.dimension() != 8) throw DimensionMismatch("expected a three-qubit state");
  return {separability_report(reduce(rho, {0, 1}), "AB", tol),
          separability_report(reduce(rho, {0, 2}), "AC", tol),
          separability_report(reduce(rho, {1, 2}), "BC", tol)};
}

std::string to_json(const SeparabilityReport& report) {
  nlohmann::json j;
  j["pair"] = report.pair;
  j["min_eigenvalue"] = report.min_eigenvalue;
  j["determinant"] = report.determinant;
  j["separable"] = report.separable;
  return j.dump();
}

}  // namespace margcert
