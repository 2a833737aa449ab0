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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "margcert/linalg.hpp"
#include "margcert/states.hpp"

namespace margcert {

/// Dichotomic qubit observable n . sigma with |n| = 1.
class Observable {
 public:
  Observable() = default;
  /// Throws InvalidObservable unless |n| = 1 within tolerance.
  static Observable from_bloch(const std::array<double, 3>& n);
  /// cos(theta) sigma_z + sin(theta) sigma_x.
  static Observable equatorial(double theta);
  /// (sin t cos p, sin t sin p, cos t) . sigma.
  static Observable spherical(double theta, double phi);

  const std::array<double, 3>& bloch() const { return bloch_; }
  ComplexMatrix matrix() const;
  Observable negated() const;

 private:
  explicit Observable(const std::array<double, 3>& n) : bloch_(n) {}
  std::array<double, 3> bloch_{0.0, 0.0, 1.0};
};

Observable equatorial_observable(double theta);

/// Per-party lists of observables; entry [party][s - 1] realizes setting s.
using MeasurementSet = std::vector<std::vector<Observable>>;

/**
 * Real linear combination of products of per-party settings. A term is keyed
 * by one index per party: 0 means the party is absent (identity), s >= 1
 * selects that party's setting s. The all-zero key is the constant offset.
 */
class BellExpression {
 public:
  using Term = std::vector<int>;

  explicit BellExpression(std::vector<int> settings_per_party);

  /// Adds coeff to the coefficient of term.
  BellExpression& add(const Term& term, double coeff);
  double coefficient(const Term& term) const;

  const std::map<Term, double>& terms() const { return terms_; }
  const std::vector<int>& settings() const { return settings_; }
  int parties() const { return static_cast<int>(settings_.size()); }

  bool operator==(const BellExpression& other) const = default;

 private:
  std::vector<int> settings_;
  std::map<Term, double> terms_;
};

/// "BI", "Mermin", "Sliwa4" (three parties) or "CHSH" (two parties).
BellExpression builtin_expression(std::string_view name);

/// Places a k-party expression on the given positions of a larger scenario.
BellExpression embed_expression(const BellExpression& expr, int total_parties,
                                const std::vector<int>& positions);

/// Fixes one party's setting to the outcome value and removes the party.
BellExpression substitute_outcome(const BellExpression& expr, int party,
                                  int setting, double value);

/// Maximum over deterministic +-1 assignments, by enumeration.
double local_bound(const BellExpression& expr);

void check_settings(const BellExpression& expr, const MeasurementSet& m);

ComplexMatrix bell_operator(const BellExpression& expr, const MeasurementSet& m);

/// Tr(rho B).
double quantum_value(const DensityMatrix& rho, const BellExpression& expr,
                     const MeasurementSet& m);

/// Same value from the correlation tensor of a three-qubit state.
double quantum_value(const CorrelationTensor& t, const BellExpression& expr,
                     const MeasurementSet& m);

struct EvaluationResult {
  double quantum = 0.0;
  double local = 0.0;
  double ratio = 0.0;  ///< quantum / local, or 0 when local <= 0
  bool violated = false;
};

EvaluationResult make_evaluation(double quantum, double local,
                                 double tol = kDefaultTolerances.violation);
EvaluationResult evaluate(const DensityMatrix& rho, const BellExpression& expr,
                          const MeasurementSet& m);

/// Outcome-conditioned split of a Bell value on one party's single setting.
struct ConditionalDecomposition {
  double p_plus = 0.0;
  DensityMatrix rho_plus, rho_minus;
  BellExpression expr_plus{std::vector<int>{}}, expr_minus{std::vector<int>{}};
  double q_plus = 0.0, q_minus = 0.0;

  double recombined() const { return p_plus * q_plus + (1.0 - p_plus) * q_minus; }
};

/**
 * Measures the party's observable for the given setting, conditions the
 * remaining parties on each outcome, and evaluates the outcome-substituted
 * expressions on the conditional states. Throws SettingNotUnique when the
 * expression also uses another setting of that party. A zero-probability
 * branch gets the maximally mixed conditional state.
 */
ConditionalDecomposition conditional_decomposition(const DensityMatrix& rho,
                                                   const BellExpression& expr,
                                                   const MeasurementSet& m,
                                                   int party = 0, int setting = 1);

struct HorodeckiResult {
  double value = 0.0;     ///< 2 sqrt(u1 + u2)
  double u1 = 0.0, u2 = 0.0;
  MeasurementSet settings;  ///< two settings for each of the two parties
};

/// Closed-form CHSH maximum of a two-qubit state with optimal observables.
HorodeckiResult horodecki_chsh(const DensityMatrix& rho);

struct Sliwa4Result {
  EvaluationResult evaluation;
  double p_plus = 0.0;
  double chsh_max = 0.0;
  double q_plus = 0.0, q_minus = 0.0;
  MeasurementSet settings;
};

/// Quantum value of (1 - A1) CHSH_BC + 2 A1 with Alice measuring `alice` and
/// Bob/Charlie optimal for the -1 branch.
Sliwa4Result sliwa4_quantum_value(const DensityMatrix& rho,
                                  const Observable& alice = Observable::equatorial(0.0));

/// {"x,y,z": coefficient, ...}
std::string to_json(const BellExpression& expr);
/// Settings per party are the largest index seen per slot unless given.
BellExpression expression_from_json(const std::string& text,
                                    std::vector<int> settings = {});

/// Mermin settings A1 = A2 = sigma_z, B1 = sigma_z,
/// B2 = sigma_y and C1, C2 parameterized by two angles.
MeasurementSet mermin_settings(double theta1, double theta2);

/// Equatorial settings for BI: A1 at theta_a, (B1, B2), (C1, C2).
MeasurementSet bi_settings(double theta_a, double theta_b1, double theta_c1,
                           double theta_b2, double theta_c2);

}  // namespace margcert
