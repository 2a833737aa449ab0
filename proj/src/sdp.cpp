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

#include "margcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "margcert/errors.hpp"

namespace margcert {

const char* status_name(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kUnbounded: return "unbounded";
    case SdpStatus::kMaxIterations: return "max-iterations";
    case SdpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

std::vector<double> hermitian_coordinates(const ComplexMatrix& x) {
  const int d = static_cast<int>(x.rows());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a) {
    out.push_back(x(a, a).real());
    for (int b = a + 1; b < d; ++b) {
      out.push_back(x(a, b).real());
      out.push_back(x(a, b).imag());
    }
  }
  return out;
}

ComplexMatrix coordinates_to_hermitian(std::span<const double> c, int d) {
  if (static_cast<int>(c.size()) != d * d) throw DimensionMismatch("coordinate count");
  ComplexMatrix x(d, d);
  std::size_t k = 0;
  for (int a = 0; a < d; ++a) {
    x(a, a) = c[k++];
    for (int b = a + 1; b < d; ++b) {
      x(a, b) = Complex(c[k], c[k + 1]);
      x(b, a) = std::conj(x(a, b));
      k += 2;
    }
  }
  return x;
}

std::vector<double> functional_coordinates(const ComplexMatrix& h) {
  // Re Tr(h X) = sum_a h_aa X_aa + sum_{a<b} 2 (Re h_ab Re X_ab + Im h_ab Im X_ab)
  // for Hermitian h and X.
  const int d = static_cast<int>(h.rows());
  const ComplexMatrix herm = 0.5 * (h + h.adjoint());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a) {
    out.push_back(herm(a, a).real());
    for (int b = a + 1; b < d; ++b) {
      out.push_back(2.0 * herm(a, b).real());
      out.push_back(2.0 * herm(a, b).imag());
    }
  }
  return out;
}

ComplexMatrix functional_matrix(std::span<const double> c, int d) {
  if (static_cast<int>(c.size()) != d * d) throw DimensionMismatch("coordinate count");
  ComplexMatrix h(d, d);
  std::size_t k = 0;
  for (int a = 0; a < d; ++a) {
    h(a, a) = c[k++];
    for (int b = a + 1; b < d; ++b) {
      h(a, b) = 0.5 * Complex(c[k], c[k + 1]);
      h(b, a) = std::conj(h(a, b));
      k += 2;
    }
  }
  return h;
}

SdpProblem SdpProblem::with_blocks(std::vector<int> dims, SdpSense sense) {
  SdpProblem p;
  p.block_dims = std::move(dims);
  p.sense = sense;
  p.objective.assign(static_cast<std::size_t>(p.dimension()), 0.0);
  return p;
}

int SdpProblem::dimension() const {
  int n = 0;
  for (int d : block_dims) n += d * d;
  return n;
}

int SdpProblem::block_offset(int block) const {
  int off = 0;
  for (int b = 0; b < block; ++b) off += block_dims.at(b) * block_dims.at(b);
  return off;
}

void SdpProblem::check() const {
  if (block_dims.empty()) throw DimensionMismatch("SDP without blocks");
  for (int d : block_dims)
    if (d < 1) throw DimensionMismatch("SDP block dimension < 1");
  const std::size_t n = static_cast<std::size_t>(dimension());
  if (objective.size() != n) throw DimensionMismatch("objective length");
  for (const auto& c : constraints)
    if (c.coefficients.size() != n) throw DimensionMismatch("constraint length");
}

std::vector<double> SdpProblem::functional(int block, const ComplexMatrix& h) const {
  if (block < 0 || block >= static_cast<int>(block_dims.size()) ||
      h.rows() != block_dims[block] || h.cols() != block_dims[block])
    throw DimensionMismatch("functional does not match block");
  std::vector<double> out(static_cast<std::size_t>(dimension()), 0.0);
  const std::vector<double> local = functional_coordinates(h);
  std::copy(local.begin(), local.end(), out.begin() + block_offset(block));
  return out;
}

void SdpProblem::add_to_objective(int block, const ComplexMatrix& h) {
  const std::vector<double> f = functional(block, h);
  for (std::size_t k = 0; k < f.size(); ++k) objective[k] += f[k];
}

std::vector<double> block_coordinates(const SdpProblem& problem,
                                      const std::vector<ComplexMatrix>& blocks) {
  if (blocks.size() != problem.block_dims.size()) throw DimensionMismatch("block count");
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(problem.dimension()));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].rows() != problem.block_dims[b]) throw DimensionMismatch("block size");
    const auto c = hermitian_coordinates(blocks[b]);
    x.insert(x.end(), c.begin(), c.end());
  }
  return x;
}

double constraint_residual(const SdpProblem& problem,
                           const std::vector<ComplexMatrix>& blocks) {
  const std::vector<double> x = block_coordinates(problem, blocks);
  double worst = 0.0;
  for (const auto& c : problem.constraints) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) lhs += c.coefficients[k] * x[k];
    worst = std::max(worst, std::abs(lhs - c.rhs));
  }
  return worst;
}

double objective_value(const SdpProblem& problem, const std::vector<ComplexMatrix>& blocks) {
  const std::vector<double> x = block_coordinates(problem, blocks);
  double v = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) v += problem.objective[k] * x[k];
  return v;
}

namespace {

using BlockList = std::vector<ComplexMatrix>;

double inner(const ComplexMatrix& x, const ComplexMatrix& y) {
  return (x.array() * y.conjugate().array()).sum().real();
}

double inner(const BlockList& x, const BlockList& y) {
  double s = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b) s += inner(x[b], y[b]);
  return s;
}

double norm(const BlockList& x) { return std::sqrt(std::max(0.0, inner(x, x))); }

ComplexMatrix herm(const ComplexMatrix& x) { return 0.5 * (x + x.adjoint()); }

// Orthonormal real coordinates (diagonal, sqrt2 Re, sqrt2 Im) so that the
// Euclidean product equals Re Tr(X Y).
void append_orthonormal(const ComplexMatrix& x, std::vector<double>& out) {
  const int d = static_cast<int>(x.rows());
  const double r2 = std::sqrt(2.0);
  for (int a = 0; a < d; ++a) {
    out.push_back(x(a, a).real());
    for (int b = a + 1; b < d; ++b) {
      out.push_back(r2 * x(a, b).real());
      out.push_back(r2 * x(a, b).imag());
    }
  }
}

struct Prepared {
  std::vector<int> dims;
  BlockList c;
  std::vector<BlockList> a;
  std::vector<std::vector<char>> active;
  RealVector b;
  std::vector<int> source_row;
  std::vector<double> row_scale;
  bool inconsistent = false;
};

Prepared prepare(const SdpProblem& problem) {
  Prepared p;
  p.dims = problem.block_dims;
  const double sign = problem.sense == SdpSense::kMinimize ? 1.0 : -1.0;
  for (std::size_t blk = 0; blk < p.dims.size(); ++blk) {
    const int d = p.dims[blk];
    const int off = problem.block_offset(static_cast<int>(blk));
    p.c.push_back(sign * functional_matrix(
                             std::span<const double>(problem.objective).subspan(off, d * d), d));
  }

  const int m = static_cast<int>(problem.constraints.size());
  std::vector<BlockList> rows(m);
  std::vector<double> scale(m, 1.0);
  Eigen::MatrixXd v(problem.dimension(), m);
  for (int i = 0; i < m; ++i) {
    const auto& cons = problem.constraints[i].coefficients;
    std::vector<double> ortho;
    for (std::size_t blk = 0; blk < p.dims.size(); ++blk) {
      const int d = p.dims[blk];
      const int off = problem.block_offset(static_cast<int>(blk));
      rows[i].push_back(functional_matrix(std::span<const double>(cons).subspan(off, d * d), d));
      append_orthonormal(rows[i].back(), ortho);
    }
    const double nrm = norm(rows[i]);
    scale[i] = nrm > 0.0 ? nrm : 1.0;
    for (int k = 0; k < problem.dimension(); ++k) v(k, i) = ortho[k] / scale[i];
  }

  RealVector rhs(m);
  for (int i = 0; i < m; ++i) rhs(i) = problem.constraints[i].rhs / scale[i];

  std::vector<int> independent;
  if (m > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    for (int k = 0; k < rank; ++k) independent.push_back(qr.colsPermutation().indices()(k));
    std::sort(independent.begin(), independent.end());

    if (rank < m) {
      // Minimum-norm point satisfying the independent rows, tested on all rows.
      Eigen::MatrixXd vs(v.rows(), rank);
      RealVector bs(rank);
      for (int k = 0; k < rank; ++k) {
        vs.col(k) = v.col(independent[k]);
        bs(k) = rhs(independent[k]);
      }
      const RealVector w = (vs.transpose() * vs).ldlt().solve(bs);
      const RealVector x = vs * w;
      const RealVector res = v.transpose() * x - rhs;
      for (int i = 0; i < m; ++i)
        if (std::abs(res(i)) > 1e-9 * (1.0 + std::abs(rhs(i)))) p.inconsistent = true;
    }
  }

  for (int i : independent) {
    BlockList row = rows[i];
    std::vector<char> act;
    for (auto& blk : row) {
      blk /= scale[i];
      act.push_back(blk.cwiseAbs().maxCoeff() > 0.0 ? 1 : 0);
    }
    p.a.push_back(std::move(row));
    p.active.push_back(std::move(act));
    p.source_row.push_back(i);
    p.row_scale.push_back(scale[i]);
  }
  p.b = RealVector(static_cast<Eigen::Index>(p.source_row.size()));
  for (std::size_t k = 0; k < p.source_row.size(); ++k) p.b(k) = rhs(p.source_row[k]);
  return p;
}

RealVector apply_a(const Prepared& p, const BlockList& x) {
  RealVector out(static_cast<Eigen::Index>(p.a.size()));
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    double s = 0.0;
    for (std::size_t blk = 0; blk < x.size(); ++blk)
      if (p.active[i][blk]) s += inner(p.a[i][blk], x[blk]);
    out(static_cast<Eigen::Index>(i)) = s;
  }
  return out;
}

BlockList apply_adjoint(const Prepared& p, const RealVector& y) {
  BlockList out;
  for (int d : p.dims) out.push_back(ComplexMatrix::Zero(d, d));
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    const double yi = y(static_cast<Eigen::Index>(i));
    if (yi == 0.0) continue;
    for (std::size_t blk = 0; blk < out.size(); ++blk)
      if (p.active[i][blk]) out[blk] += yi * p.a[i][blk];
  }
  return out;
}

/// Largest alpha with x + alpha dx PSD, given the Cholesky factor of x.
double max_step(const Eigen::LLT<ComplexMatrix>& chol, const ComplexMatrix& dx) {
  const auto l = chol.matrixL();
  const ComplexMatrix tmp = l.solve(dx);
  const ComplexMatrix w = herm(l.solve(tmp.adjoint().eval()));
  const double lmin =
      Eigen::SelfAdjointEigenSolver<ComplexMatrix>(w, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double block_list_min_eigenvalue(const BlockList& x) {
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& blk : x)
    lmin = std::min(lmin, Eigen::SelfAdjointEigenSolver<ComplexMatrix>(herm(blk), Eigen::EigenvaluesOnly)
                              .eigenvalues()(0));
  return lmin;
}

struct Iterate {
  BlockList x, z;
  RealVector y;
};

void finalize(const SdpProblem& problem, const Prepared& p, const Iterate& it,
              SdpSolution& sol) {
  const double sign = problem.sense == SdpSense::kMinimize ? 1.0 : -1.0;
  sol.blocks.clear();
  for (const auto& blk : it.x) sol.blocks.push_back(herm(blk));
  sol.dual_slack = it.z;
  sol.dual.assign(problem.constraints.size(), 0.0);
  double dobj = 0.0;
  for (std::size_t k = 0; k < p.source_row.size(); ++k) {
    const double yk = it.y(static_cast<Eigen::Index>(k));
    sol.dual[p.source_row[k]] = sign * yk / p.row_scale[k];
    dobj += p.b(static_cast<Eigen::Index>(k)) * yk;
  }
  sol.primal_objective = objective_value(problem, sol.blocks);
  sol.dual_objective = sign * dobj;
  sol.duality_gap = std::abs(sol.primal_objective - sol.dual_objective);
  sol.primal_residual = constraint_residual(problem, sol.blocks);
  sol.min_eigenvalue = block_list_min_eigenvalue(sol.blocks);
}

bool meets_optimality(const SdpSolution& sol, const Tolerances& tol) {
  return sol.duality_gap <= tol.sdp_gap * std::max(1.0, std::abs(sol.primal_objective)) &&
         sol.primal_residual <= tol.sdp_residual && sol.min_eigenvalue >= -tol.psd;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
  problem.check();
  const Prepared p = prepare(problem);
  SdpSolution sol;
  const std::size_t nb = p.dims.size();
  const int m = static_cast<int>(p.a.size());

  if (p.inconsistent) {
    sol.status = SdpStatus::kInfeasible;
    sol.message = "linear constraints are inconsistent";
    for (int d : p.dims) sol.blocks.push_back(ComplexMatrix::Zero(d, d));
    sol.dual.assign(problem.constraints.size(), 0.0);
    return sol;
  }

  double n_total = 0.0;
  for (int d : p.dims) n_total += d;
  const double b_norm = p.b.norm();
  const double c_norm = norm(p.c);

  // Scaled identity start.
  Iterate it;
  it.y = RealVector::Zero(m);
  for (std::size_t blk = 0; blk < nb; ++blk) {
    const int d = p.dims[blk];
    double xi = std::max(10.0, std::sqrt(double(d)));
    double eta = std::max({10.0, std::sqrt(double(d)), p.c[blk].norm()});
    for (int i = 0; i < m; ++i) {
      const double ai = p.a[i][blk].norm();
      xi = std::max(xi, d * (1.0 + std::abs(p.b(i))) / (1.0 + ai));
      eta = std::max(eta, ai);
    }
    it.x.push_back(xi * ComplexMatrix::Identity(d, d));
    it.z.push_back(eta * ComplexMatrix::Identity(d, d));
  }
  if (options.warm_start) {
    const auto& ws = *options.warm_start;
    if (ws.size() != nb) throw DimensionMismatch("warm start block count");
    for (std::size_t blk = 0; blk < nb; ++blk) {
      const int d = p.dims[blk];
      // Pull the supplied point into the interior.
      it.x[blk] = herm(ws[blk]) + 1e-2 * ComplexMatrix::Identity(d, d);
      const double lmin = block_list_min_eigenvalue({it.x[blk]});
      if (lmin <= 1e-3) it.x[blk] += (1e-3 - lmin) * ComplexMatrix::Identity(d, d);
    }
  }

  Iterate last_good = it;
  double prev_alpha = 0.0;
  sol.status = SdpStatus::kMaxIterations;
  bool finished = false;

  for (int iter = 0; iter < options.max_iterations && !finished; ++iter) {
    sol.iterations = iter;
    const BlockList aty = apply_adjoint(p, it.y);
    BlockList rd(nb);
    for (std::size_t blk = 0; blk < nb; ++blk) rd[blk] = p.c[blk] - it.z[blk] - aty[blk];
    const RealVector rp = p.b - apply_a(p, it.x);
    const double pobj = inner(p.c, it.x);
    const double dobj = p.b.dot(it.y);
    const double mu = inner(it.x, it.z) / n_total;
    const double perr = rp.norm() / (1.0 + b_norm);
    const double derr = norm(rd) / (1.0 + c_norm);
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
      sol.status = SdpStatus::kNumericalFailure;
      sol.message = "non-finite iterate";
      break;
    }
    last_good = it;
    const double tol = options.target_tolerance;
    if (perr < tol && derr < tol && relgap < tol) {
      sol.status = SdpStatus::kOptimal;
      sol.message = "converged";
      break;
    }
    if (dobj > 1e8 * (1.0 + c_norm) && derr < 1e-6 && perr > 1e-6) {
      sol.status = SdpStatus::kInfeasible;
      sol.message = "dual objective diverges";
      break;
    }
    if (pobj < -1e8 * (1.0 + b_norm) && perr < 1e-6 && derr > 1e-6) {
      sol.status = SdpStatus::kUnbounded;
      sol.message = "primal objective diverges";
      break;
    }

    std::vector<Eigen::LLT<ComplexMatrix>> chol_x(nb), chol_z(nb);
    BlockList zinv(nb), x_rd_zinv(nb);
    bool factor_ok = true;
    for (std::size_t blk = 0; blk < nb && factor_ok; ++blk) {
      const int d = p.dims[blk];
      chol_x[blk].compute(it.x[blk]);
      chol_z[blk].compute(it.z[blk]);
      if (chol_x[blk].info() != Eigen::Success || chol_z[blk].info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      zinv[blk] = herm(chol_z[blk].solve(ComplexMatrix::Identity(d, d)));
      x_rd_zinv[blk] = it.x[blk] * rd[blk] * zinv[blk];
    }
    if (!factor_ok) {
      sol.status = SdpStatus::kNumericalFailure;
      sol.message = "iterate left the cone";
      break;
    }

    // Schur complement M_ij = Re Tr(A_i X A_j Z^-1).
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      for (std::size_t blk = 0; blk < nb; ++blk) {
        if (!p.active[j][blk]) continue;
        const ComplexMatrix g = it.x[blk] * p.a[j][blk] * zinv[blk];
        for (int i = j; i < m; ++i)
          if (p.active[i][blk]) schur(i, j) += inner(p.a[i][blk], g.adjoint());
      }
    }
    schur = schur.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Eigen::MatrixXd> schur_chol(schur);
    if (schur_chol.info() != Eigen::Success) {
      const double shift = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
      schur.diagonal().array() += shift;
      schur_chol.compute(schur);
      if (schur_chol.info() != Eigen::Success) {
        sol.status = SdpStatus::kNumericalFailure;
        sol.message = "Schur complement not positive definite";
        break;
      }
    }

    // Direction for a given Rc Z^-1 term (Rc = sigma mu I - XZ - corrector).
    auto direction = [&](const BlockList& rc_zinv, BlockList& dx, RealVector& dy, BlockList& dz) {
      BlockList t(nb);
      for (std::size_t blk = 0; blk < nb; ++blk) t[blk] = rc_zinv[blk] - x_rd_zinv[blk];
      const RealVector rhs = rp - apply_a(p, t);
      dy = schur_chol.solve(rhs);
      const RealVector refine = rhs - schur * dy;
      dy += schur_chol.solve(refine);
      const BlockList atdy = apply_adjoint(p, dy);
      dz.resize(nb);
      dx.resize(nb);
      for (std::size_t blk = 0; blk < nb; ++blk) {
        dz[blk] = herm(rd[blk] - atdy[blk]);
        dx[blk] = herm(rc_zinv[blk] - it.x[blk] * dz[blk] * zinv[blk]);
      }
    };
    auto steps = [&](const BlockList& dx, const BlockList& dz, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (std::size_t blk = 0; blk < nb; ++blk) {
        ap = std::min(ap, max_step(chol_x[blk], dx[blk]));
        ad = std::min(ad, max_step(chol_z[blk], dz[blk]));
      }
    };

    // Predictor.
    BlockList rc_zinv(nb);
    for (std::size_t blk = 0; blk < nb; ++blk) rc_zinv[blk] = -it.x[blk];
    BlockList dx_a, dz_a;
    RealVector dy_a;
    direction(rc_zinv, dx_a, dy_a, dz_a);
    double ap, ad;
    steps(dx_a, dz_a, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t blk = 0; blk < nb; ++blk)
      mu_aff += inner(it.x[blk] + ap * dx_a[blk], it.z[blk] + ad * dz_a[blk]);
    mu_aff /= n_total;
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, expon);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    for (std::size_t blk = 0; blk < nb; ++blk) {
      rc_zinv[blk] = sigma * mu * zinv[blk] - it.x[blk] - dx_a[blk] * dz_a[blk] * zinv[blk];
    }
    BlockList dx, dz;
    RealVector dy;
    direction(rc_zinv, dx, dy, dz);
    steps(dx, dz, ap, ad);
    const double gamma = std::clamp(0.9 + 0.09 * prev_alpha, 0.9, 0.99);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    prev_alpha = std::min(ap, ad);

    for (std::size_t blk = 0; blk < nb; ++blk) {
      it.x[blk] = herm(it.x[blk] + ap * dx[blk]);
      it.z[blk] = herm(it.z[blk] + ad * dz[blk]);
    }
    it.y += ad * dy;

    if (std::max(ap, ad) < 1e-10) {
      sol.message = "step length collapsed";
      finished = true;
    }
  }

  finalize(problem, p, last_good, sol);
  if (meets_optimality(sol, options.tolerances)) {
    sol.status = SdpStatus::kOptimal;
  } else if (sol.status == SdpStatus::kOptimal) {
    sol.status = SdpStatus::kNumericalFailure;
    sol.message = "converged in scaled problem but fails final checks";
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Marginal compatibility

std::vector<std::array<int, 3>> constraint_indices() {
  std::vector<std::array<int, 3>> out;
  for (int j1 = 0; j1 < 4; ++j1)
    for (int j2 = 0; j2 < 4; ++j2)
      for (int j3 = 0; j3 < 4; ++j3)
        if (j1 == 0 || j2 == 0 || j3 == 0) out.push_back({j1, j2, j3});
  return out;
}

double marginal_value(const Marginals& m, int j1, int j2, int j3) {
  if (j1 == 0) return m.bc[j2][j3];
  if (j2 == 0) return m.ac[j1][j3];
  return m.ab[j1][j2];
}

namespace {

const std::vector<int> kQubits3{2, 2, 2};

std::vector<int> pair_targets(Pair pair) {
  switch (pair) {
    case Pair::AB: return {0, 1};
    case Pair::AC: return {0, 2};
    case Pair::BC: return {1, 2};
  }
  return {};
}

ComplexMatrix pair_operator(const MarginalTensor& m) {
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) out += (m[j][k] / 4.0) * kron(pauli(j), pauli(k));
  return out;
}

// Columns of vecs whose eigenvalue is at most cut.
ComplexMatrix low_columns(const HermitianEigenResult& e, double cut, bool below) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i)
    if ((e.eigenvalues(i) <= cut) == below) keep.push_back(i);
  ComplexMatrix out(e.eigenvectors.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = e.eigenvectors.col(keep[c]);
  return out;
}

SdpSolution empty_face_solution() {
  SdpSolution s;
  s.status = SdpStatus::kInfeasible;
  s.message = "no state is compatible with the marginals";
  return s;
}

}  // namespace

Face marginal_support_face(const Marginals& marginals, double threshold) {
  ComplexMatrix w = ComplexMatrix::Zero(8, 8);
  for (Pair pair : kAllPairs) {
    const auto e = hermitian_eigen(pair_operator(marginals.get(pair)));
    const double top = std::max(std::abs(e.eigenvalues(3)), 1e-300);
    const ComplexMatrix ker = low_columns(e, threshold * top, true);
    if (ker.cols() == 0) continue;
    w += embed_operator(ker * ker.adjoint(), kQubits3, pair_targets(pair));
  }
  Face face;
  if (w.norm() == 0.0) return face;
  const auto e = hermitian_eigen(w);
  face.basis = low_columns(e, threshold, true);
  FaceStep step;
  step.kind = "marginal-support";
  step.exposing = w;
  step.margin = 0.0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i)
    if (e.eigenvalues(i) > threshold) {
      step.margin = e.eigenvalues(i);
      break;
    }
  step.dimension_after = face.dimension();
  face.steps.push_back(std::move(step));
  return face;
}

Face refine_face(const Marginals& marginals, const Face& face, const ComplexMatrix& rho0,
                 const SdpOptions& options, double rank_threshold, double min_margin) {
  (void)marginals;  // W is built from the constraint operators only
  const ComplexMatrix& v = face.basis;
  const int k = face.dimension();
  if (k == 0) return face;
  const auto e0 = hermitian_eigen(v.adjoint() * rho0 * v);
  const double top = std::max(e0.eigenvalues(k - 1), 1e-300);
  const ComplexMatrix r = low_columns(e0, rank_threshold * top, false);
  const ComplexMatrix kk = low_columns(e0, rank_threshold * top, true);
  if (r.cols() == 0 || kk.cols() == 0) return face;

  const auto indices = constraint_indices();
  const int n = static_cast<int>(indices.size());
  std::vector<ComplexMatrix> full_ops, face_ops;
  for (const auto& idx : indices) {
    full_ops.push_back(pauli_string({idx[0], idx[1], idx[2]}));
    face_ops.push_back(v.adjoint() * full_ops.back() * v);
  }

  // Null space of y -> W'(y) R'.
  const Eigen::Index rows = 2 * k * r.cols();
  RealMatrix lin(rows, n);
  for (int i = 0; i < n; ++i) {
    const ComplexMatrix wr = face_ops[i] * r;
    Eigen::Index row = 0;
    for (Eigen::Index a = 0; a < wr.rows(); ++a)
      for (Eigen::Index b = 0; b < wr.cols(); ++b) {
        lin(row++, i) = wr(a, b).real();
        lin(row++, i) = wr(a, b).imag();
      }
  }
  Eigen::JacobiSVD<RealMatrix> svd(lin, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::vector<int> null_cols;
  for (int i = 0; i < n; ++i)
    if (i >= sv.size() || sv(i) <= cut) null_cols.push_back(i);
  if (null_cols.empty()) return face;
  RealMatrix nullspace(n, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t c = 0; c < null_cols.size(); ++c)
    nullspace.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(null_cols[c]);

  const Eigen::Index nz = nullspace.cols();
  std::vector<ComplexMatrix> reduced(static_cast<std::size_t>(nz));
  RealVector g(nz);
  for (Eigen::Index c = 0; c < nz; ++c) {
    ComplexMatrix w = ComplexMatrix::Zero(k, k);
    for (int i = 0; i < n; ++i) w += nullspace(i, c) * face_ops[i];
    reduced[c] = kk.adjoint() * w * kk;
    g(c) = reduced[c].trace().real();
  }
  if (g.norm() < 1e-12) return face;  // nothing in the null space can be normalized

  // y = N (z0 + Q w) with g.z0 = 1 and Q spanning the complement of g.
  const RealVector z0 = g / g.squaredNorm();
  const RealMatrix g_col = g;
  Eigen::HouseholderQR<RealMatrix> qr(g_col);
  const RealMatrix q_full = qr.householderQ() * RealMatrix::Identity(nz, nz);
  const RealMatrix q = q_full.rightCols(nz - 1);

  const int kd = static_cast<int>(kk.cols());
  auto combine = [&](const RealVector& z) {
    ComplexMatrix out = ComplexMatrix::Zero(kd, kd);
    for (Eigen::Index c = 0; c < nz; ++c) out += z(c) * reduced[c];
    return out;
  };
  SdpProblem aux = SdpProblem::with_blocks({kd}, SdpSense::kMinimize);
  aux.add_to_objective(0, combine(z0));
  for (Eigen::Index l = 0; l < q.cols(); ++l)
    aux.constraints.push_back({aux.functional(0, -combine(q.col(l))), 0.0});
  aux.constraints.push_back({aux.functional(0, ComplexMatrix::Identity(kd, kd)), 1.0});
  const SdpSolution sol = solve(aux, options);
  if (sol.dual.size() != aux.constraints.size()) return face;

  RealVector wvec(q.cols());
  for (Eigen::Index l = 0; l < q.cols(); ++l) wvec(l) = sol.dual[l];
  const RealVector y = nullspace * (z0 + q * wvec);
  ComplexMatrix w_full = ComplexMatrix::Zero(8, 8);
  for (int i = 0; i < n; ++i) w_full += y(i) * full_ops[i];
  w_full = 0.5 * (w_full + w_full.adjoint());

  // Check the certificate directly rather than trusting solver status.
  const ComplexMatrix w_face = v.adjoint() * w_full * v;
  const double margin = min_eigenvalue(kk.adjoint() * w_face * kk);
  const double leak = (w_face * r).norm();
  if (!(margin > min_margin) || leak > 1e-9 * std::max(1.0, w_face.norm())) return face;

  Face out = face;
  out.basis = v * r;
  FaceStep step;
  step.kind = "exposing-operator";
  step.exposing = w_full;
  step.margin = margin;
  step.dimension_after = out.dimension();
  out.steps.push_back(std::move(step));
  return out;
}

SdpProblem component_problem(const Marginals& marginals, const std::array<int, 3>& target,
                             Direction direction, const Face& face) {
  for (int k : target)
    if (k < 1 || k > 3) throw DimensionMismatch("target indices must lie in 1..3");
  const ComplexMatrix& v = face.basis;
  if (v.rows() != 8 || v.cols() < 1) throw DimensionMismatch("face basis must be 8 x k, k >= 1");
  SdpProblem problem = SdpProblem::with_blocks(
      {face.dimension()}, direction == Direction::kMax ? SdpSense::kMaximize : SdpSense::kMinimize);
  problem.add_to_objective(0, v.adjoint() * pauli_string({target[0], target[1], target[2]}) * v);
  for (const auto& j : constraint_indices())
    problem.constraints.push_back(
        {problem.functional(0, v.adjoint() * pauli_string({j[0], j[1], j[2]}) * v),
         marginal_value(marginals, j[0], j[1], j[2])});
  return problem;
}

ComponentBound component_extremum(const Marginals& marginals,
                                  const std::array<int, 3>& target, Direction direction,
                                  const Face& face, const SdpOptions& options) {
  ComponentBound out;
  out.face_dimension = face.dimension();
  if (face.dimension() == 0) {
    out.solution = empty_face_solution();
    out.state = ComplexMatrix::Zero(8, 8);
    return out;
  }
  out.solution = solve(component_problem(marginals, target, direction, face), options);
  out.value = out.solution.primal_objective;
  out.state = face.basis * out.solution.blocks.front() * face.basis.adjoint();
  return out;
}

const UniquenessEntry& UniquenessReport::at(int i1, int i2, int i3) const {
  for (const auto& e : entries)
    if (e.index == std::array<int, 3>{i1, i2, i3}) return e;
  throw DimensionMismatch("no such component");
}

UniquenessReport uniqueness_test(const DensityMatrix& rho, double tolerance,
                                 const SdpOptions& options, FaceReduction reduction) {
  if (rho.dims != kQubits3) throw DimensionMismatch("uniqueness test needs a three-qubit state");
  const CorrelationTensor t = correlation_tensor(rho);
  const Marginals marginals = all_marginals(t);
  UniquenessReport report;
  if (reduction != FaceReduction::kNone) report.face = marginal_support_face(marginals);
  if (reduction == FaceReduction::kFull)
    report.face = refine_face(marginals, report.face, rho.matrix, options);

  const ComplexMatrix& v = report.face.basis;
  const ComplexMatrix inside = v.adjoint() * rho.matrix * v;
  // rho must itself be a point of the reduced problem.
  const double leakage = (rho.matrix - v * inside * v.adjoint()).cwiseAbs().maxCoeff();

  report.all_optimal = true;
  for (int i1 = 1; i1 <= 3; ++i1)
    for (int i2 = 1; i2 <= 3; ++i2)
      for (int i3 = 1; i3 <= 3; ++i3) {
        UniquenessEntry e;
        e.index = {i1, i2, i3};
        e.source = t(i1, i2, i3);
        for (Direction dir : {Direction::kMin, Direction::kMax}) {
          const SdpProblem problem = component_problem(marginals, e.index, dir, report.face);
          report.source_residual =
              std::max({report.source_residual, leakage, constraint_residual(problem, {inside})});
          SdpSolution s = solve(problem, options);
          report.all_optimal = report.all_optimal && s.optimal();
          if (dir == Direction::kMin) {
            e.lower = s.primal_objective;
            e.lower_solution = std::move(s);
          } else {
            e.upper = s.primal_objective;
            e.upper_solution = std::move(s);
          }
        }
        e.gap = e.upper - e.lower;
        report.max_gap = std::max(report.max_gap, e.gap);
        report.entries.push_back(std::move(e));
      }
  report.unique = report.all_optimal && report.max_gap <= tolerance;
  return report;
}

void write_uniqueness_csv(std::ostream& out, const UniquenessReport& report) {
  out << "i1,i2,i3,T_lower,T_upper,gap\n";
  char buf[128];
  for (const auto& e : report.entries) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.12g,%.12g,%.12g\n", e.index[0], e.index[1],
                  e.index[2], e.lower, e.upper, e.gap);
    out << buf;
  }
}

std::string uniqueness_summary_json(const UniquenessReport& report) {
  nlohmann::json j;
  j["max_gap"] = report.max_gap;
  j["unique"] = report.unique;
  return j.dump();
}

}  // namespace margcert
