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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "margcert/bell.hpp"
#include "margcert/config.hpp"
#include "margcert/sdp.hpp"
#include "margcert/states.hpp"

namespace margcert {

struct NelderMeadConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_step = 0.1;
  /// 0 means 200 * n.
  int max_iterations = 0;
  /// Stop once max - min over the simplex values falls below this.
  double tolerance = 1e-10;
  int restarts = 20;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument outside the usual coefficient ranges.
  void check() const;
};

struct NelderMeadResult {
  std::vector<double> point;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
};

using Objective = std::function<double(const std::vector<double>&)>;

/**
 * Maximizes f from x0. The simplex is rebuilt around the incumbent after each
 * convergence until a rebuild stops improving, which guards against
 * premature collapse. Throws NonFiniteObjective on a NaN or infinite value.
 * restarts and seed are not used here.
 */
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadConfig& config = {});

struct MeasurementSearchResult {
  MeasurementSet settings;
  double value = 0.0;
};

/// (theta, phi) per setting, party by party, setting by setting.
std::vector<double> measurement_angles(const MeasurementSet& m);
MeasurementSet measurements_from_angles(const std::vector<double>& angles,
                                        const std::vector<int>& settings_per_party);

/**
 * Nelder-Mead over the spherical angles of every setting. Runs once from
 * initial (if given) and config.restarts times from seeded uniform angles;
 * returns the best.
 */
MeasurementSearchResult optimize_measurements(const DensityMatrix& rho,
                                              const BellExpression& expr,
                                              const NelderMeadConfig& config = {},
                                              const std::optional<MeasurementSet>& initial = {});

// Seesaw.

/**
 * Replaces every setting of party by the best +-1 observable given the rest:
 * the sign of the traceless part of M_s = Tr_{others}[(1 (x) R_s) rho]. When
 * that part vanishes the objective does not depend on the setting and the
 * current observable is kept.
 */
MeasurementSet seesaw_measurement_step(const DensityMatrix& rho, const BellExpression& expr,
                                       const MeasurementSet& current, int party);

struct StateStepResult {
  DensityMatrix state;
  double value = 0.0;
  SdpSolution solution;
};

/**
 * max Tr(rho B) over states whose two-qubit marginals all have PSD partial
 * transpose. The optimizer is nudged toward 1/d until every such partial
 * transpose has min eigenvalue >= 0. Throws SdpFailure when the solver
 * does not return a usable point.
 */
StateStepResult seesaw_state_step(const BellExpression& expr, const MeasurementSet& m,
                                  const SdpOptions& options = {});

struct SeesawConfig {
  int restarts = 20;
  int max_rounds = 500;
  double relative_tolerance = 1e-9;
  int patience = 3;
  std::uint64_t seed = 1;
  /// 0 picks the hardware concurrency.
  int threads = 0;
  SdpOptions sdp;
};

struct TraceRecord {
  int restart = 0;
  int iteration = 0;
  double value = 0.0;
};

struct SeesawRun {
  DensityMatrix state;
  MeasurementSet settings;
  double value = 0.0;
  /// Objective after every state step and every measurement step.
  std::vector<double> trace;
  int rounds = 0;
};

struct SeesawResult {
  DensityMatrix best_state;
  MeasurementSet best_measurements;
  double best_value = 0.0;
  std::vector<double> trace;  ///< of the best restart
  int best_restart = 0;
  std::vector<TraceRecord> log;  ///< all restarts, in restart order
  /// Largest decrease between consecutive trace entries over all restarts.
  double max_decrease = 0.0;
};

/// One seesaw run from the given measurements.
SeesawRun seesaw_run(const BellExpression& expr, MeasurementSet initial,
                     const SeesawConfig& config = {});

/// Random measurements of unit Bloch norm for each setting.
MeasurementSet random_measurements(const std::vector<int>& settings_per_party,
                                   std::mt19937_64& rng);

/// config.restarts runs from random measurements; restart r uses seed + r.
SeesawResult seesaw(const BellExpression& expr, const SeesawConfig& config = {});

/// One JSON object per line: {"iteration":..,"restart":..,"value":..}.
void write_trace_ndjson(std::ostream& out, const std::vector<TraceRecord>& log);

// Family search.

struct FamilySearchConfig {
  NelderMeadConfig nelder_mead;
  /// delta == 0, so psi2 is the Bell state (|01> + |10>)/sqrt2.
  bool freeze_psi_plus = false;
  bool force_p1_zero = false;
  bool penalty = true;
  /// Penalty weight on max(0, -det)^2. det is a product of four eigenvalues
  /// and so tiny near the boundary; 1e6 lets the search leave for an
  /// infeasible region it never returns from.
  double kappa = 1e10;
  /// Starting point; random starts are added per nelder_mead.restarts.
  std::optional<FamilyParameters> initial;
  std::optional<std::array<double, 4>> initial_angles;  ///< theta_b1, theta_c1, theta_b2, theta_c2
};

struct FamilySearchResult {
  FamilyParameters parameters;
  std::array<double, 4> angles{};  ///< theta_b1, theta_c1, theta_b2, theta_c2 (A1 = sigma_z)
  MeasurementSet settings;
  double value = 0.0;        ///< BI value, without penalty
  double determinant = 0.0;  ///< det of the partial transpose of the B-C marginal
  double final_kappa = 0.0;
};

/**
 * Maximizes BI over the family with equatorial settings and A1 = sigma_z.
 * Weights are p0 = cos^2 u, p1 = sin^2 u cos^2 v, p2 = sin^2 u sin^2 v. With
 * the penalty on, kappa is raised by 10x and the search resumed until the
 * returned determinant is >= -1e-9.
 */
FamilySearchResult optimize_family(const FamilySearchConfig& config = {});

}  // namespace margcert
