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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "margcert/config.hpp"
#include "margcert/linalg.hpp"
#include "margcert/states.hpp"

namespace margcert {

// A d x d Hermitian block is stored as d^2 real coordinates: for each row a,
// the diagonal entry X_aa, then for each b > a the pair (Re X_ab, Im X_ab).
// Objective and constraint vectors are coefficient vectors over the
// concatenated block coordinates.

enum class SdpSense { kMinimize, kMaximize };

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kMaxIterations, kNumericalFailure };

const char* status_name(SdpStatus status);

struct LinearConstraint {
  std::vector<double> coefficients;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> block_dims;
  SdpSense sense = SdpSense::kMinimize;
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;

  /// Empty objective over the given blocks.
  static SdpProblem with_blocks(std::vector<int> dims, SdpSense sense);

  int dimension() const;
  int block_offset(int block) const;
  /// Throws DimensionMismatch when vector lengths or block dims are invalid.
  void check() const;

  /// Coefficient vector of X -> Re Tr(h X_block).
  std::vector<double> functional(int block, const ComplexMatrix& h) const;
  void add_to_objective(int block, const ComplexMatrix& h);
};

std::vector<double> hermitian_coordinates(const ComplexMatrix& x);
ComplexMatrix coordinates_to_hermitian(std::span<const double> coords, int d);
/// c such that c . coordinates(X) = Re Tr(h X).
std::vector<double> functional_coordinates(const ComplexMatrix& h);
/// Inverse of functional_coordinates.
ComplexMatrix functional_matrix(std::span<const double> c, int d);

/// Coordinates of a list of blocks, concatenated.
std::vector<double> block_coordinates(const SdpProblem& problem,
                                      const std::vector<ComplexMatrix>& blocks);

/// max_i |a_i . x - b_i|.
double constraint_residual(const SdpProblem& problem,
                           const std::vector<ComplexMatrix>& blocks);
double objective_value(const SdpProblem& problem, const std::vector<ComplexMatrix>& blocks);

struct SdpOptions {
  int max_iterations = 150;
  /// Target for relative primal/dual infeasibility and relative gap.
  double target_tolerance = 1e-13;
  /// Optional primal starting point, blended toward the interior.
  std::optional<std::vector<ComplexMatrix>> warm_start;
  Tolerances tolerances = kDefaultTolerances;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  std::vector<ComplexMatrix> blocks;      ///< primal X
  std::vector<ComplexMatrix> dual_slack;  ///< Z = C - sum y_i A_i
  std::vector<double> dual;               ///< y, in the problem's constraint order
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;       ///< |primal - dual|
  double primal_residual = 0.0;   ///< max constraint violation
  double min_eigenvalue = 0.0;    ///< over all primal blocks
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SdpStatus::kOptimal; }
};

/**
 * Primal-dual interior point method with the HKM search direction and a
 * Mehrotra predictor-corrector. Linearly dependent constraints are removed up
 * front; if the removed rows are inconsistent with the rest the problem is
 * reported infeasible without iterating. Otherwise infeasibility is detected
 * heuristically, by the dual (or primal) objective diverging past 1e8 while
 * the corresponding residual stays large.
 *
 * status is kOptimal only when the duality gap is at most
 * sdp_gap * max(1, |primal|), the constraint residual is at most
 * sdp_residual and every primal block is PSD within psd tolerance.
 */
SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

// Marginal compatibility.

enum class Direction { kMax, kMin };

/// One facial-reduction step: W is PSD on the previous face and vanishes on the new one.
struct FaceStep {
  std::string kind;         ///< "marginal-support" or "exposing-operator"
  ComplexMatrix exposing;   ///< W as an 8x8 operator, a combination of constraint Paulis
  double margin = 0.0;      ///< smallest eigenvalue of W on the discarded directions
  int dimension_after = 8;
};

/**
 * Subspace that contains the support of every state compatible with the
 * marginals. basis has orthonormal columns.
 */
struct Face {
  ComplexMatrix basis = ComplexMatrix::Identity(8, 8);
  std::vector<FaceStep> steps;
  int dimension() const { return static_cast<int>(basis.cols()); }
};

/// The constraint Paulis: every (j1, j2, j3) with at least one zero index, 37 of them.
std::vector<std::array<int, 3>> constraint_indices();
double marginal_value(const Marginals& marginals, int j1, int j2, int j3);

/**
 * Any compatible state lives on the support of each of its pair marginals,
 * tensored with the remaining qubit. Eigenvalues below threshold (relative to
 * the largest) count as kernel.
 */
Face marginal_support_face(const Marginals& marginals, double threshold = 1e-9);

/**
 * Second reduction from a known compatible state rho0 that is rank deficient
 * on the face. Solves an auxiliary SDP for a constraint combination W that is
 * PSD on the face, vanishes on range(rho0) and is positive definite on the rest;
 * then Tr(W rho) = Tr(W rho0) = 0 for every compatible rho, so the face shrinks
 * to range(rho0). The face is returned unchanged when the best margin is not
 * above min_margin.
 */
Face refine_face(const Marginals& marginals, const Face& face, const ComplexMatrix& rho0,
                 const SdpOptions& options = {}, double rank_threshold = 1e-9,
                 double min_margin = 1e-6);

struct ComponentBound {
  double value = 0.0;
  SdpSolution solution;
  ComplexMatrix state;  ///< optimizer mapped back to 8x8
  int face_dimension = 8;
};

/**
 * Fixes every correlation component with at least one zero index to the
 * given marginals and optimizes T_{i1 i2 i3} (all indices in 1..3) over
 * states supported on the face (the full space by default; the single block
 * is then face.dimension() wide).
 */
SdpProblem component_problem(const Marginals& marginals, const std::array<int, 3>& target,
                             Direction direction, const Face& face = Face{});
ComponentBound component_extremum(const Marginals& marginals,
                                  const std::array<int, 3>& target, Direction direction,
                                  const Face& face = Face{}, const SdpOptions& options = {});

struct UniquenessEntry {
  std::array<int, 3> index{};
  double lower = 0.0, upper = 0.0, gap = 0.0;
  double source = 0.0;  ///< component of the input state
  SdpSolution lower_solution, upper_solution;
};

struct UniquenessReport {
  std::vector<UniquenessEntry> entries;  ///< 27 entries, lexicographic
  double max_gap = 0.0;
  bool unique = false;
  bool all_optimal = false;
  /// Largest constraint residual of the input state itself over all 54 problems.
  double source_residual = 0.0;
  Face face;
  const UniquenessEntry& at(int i1, int i2, int i3) const;
};

enum class FaceReduction { kNone, kMarginalSupport, kFull };

/**
 * Bounds all 27 full-correlation components over states sharing rho's
 * two-party marginals. kFull also uses rho itself as the known compatible
 * point for refine_face.
 */
UniquenessReport uniqueness_test(const DensityMatrix& rho,
                                 double tolerance = kDefaultTolerances.uniqueness,
                                 const SdpOptions& options = {},
                                 FaceReduction reduction = FaceReduction::kFull);

/// Columns i1,i2,i3,T_lower,T_upper,gap.
void write_uniqueness_csv(std::ostream& out, const UniquenessReport& report);
/// {"max_gap":..., "unique":...}
std::string uniqueness_summary_json(const UniquenessReport& report);

}  // namespace margcert
