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

#include "margcert/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "margcert/errors.hpp"

namespace margcert {

namespace {

std::array<ComplexMatrix, 4> make_paulis() {
  std::array<ComplexMatrix, 4> p;
  for (auto& m : p) m = ComplexMatrix::Zero(2, 2);
  p[0] << 1, 0, 0, 1;
  p[1] << 0, 1, 1, 0;
  p[2] << 0, -kI, kI, 0;
  p[3] << 1, 0, 0, -1;
  return p;
}

int checked_total(const std::vector<int>& dims, Eigen::Index rows,
                  Eigen::Index cols) {
  if (dims.empty()) throw DimensionMismatch("empty subsystem list");
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw DimensionMismatch("subsystem dimension < 1");
    total *= d;
  }
  if (rows != cols || total != rows) {
    throw DimensionMismatch("subsystem dimensions multiply to " +
                            std::to_string(total) + ", matrix is " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
  return static_cast<int>(total);
}

// Row-major digit decomposition of a flat index over dims.
void digits_of(int index, const std::vector<int>& dims, std::vector<int>& out) {
  out.resize(dims.size());
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
}

}  // namespace

const ComplexMatrix& pauli(int index) {
  static const std::array<ComplexMatrix, 4> table = make_paulis();
  if (index < 0 || index > 3) throw DimensionMismatch("Pauli index out of range");
  return table[index];
}

ComplexMatrix pauli_string(const std::vector<int>& indices) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int i : indices) out = kron(out, pauli(i));
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix dagger(const ComplexMatrix& a) { return a.adjoint(); }

double max_asymmetry(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
  return worst;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  return max_asymmetry(a) <= tol;
}

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (!std::isfinite(a.data()[k].real()) || !std::isfinite(a.data()[k].imag()))
      return false;
  return true;
}

Complex trace(const ComplexMatrix& a) { return a.trace(); }

double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw DimensionMismatch("trace product of incompatible shapes");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      acc += (a(i, k) * b(k, i)).real();
  return acc;
}

HermitianEigenResult hermitian_eigen(const ComplexMatrix& input, double tol) {
  if (input.rows() != input.cols() || input.rows() < 1)
    throw DimensionMismatch("hermitian_eigen needs a square matrix");
  const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
  if (max_asymmetry(input) > tol * scale)
    throw NotHermitian("asymmetry " + std::to_string(max_asymmetry(input)));

  const Eigen::Index n = input.rows();
  ComplexMatrix a = 0.5 * (input + input.adjoint());
  ComplexMatrix v = ComplexMatrix::Identity(n, n);
  const double norm = std::max(a.norm(), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(2.0 * off) <= 1e-17 * norm) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r <= 1e-300) continue;
        // Phase on column q makes a(p, q) real, then a real rotation kills it.
        const Complex phase = std::conj(a(p, q)) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U restricted to (p, q): [[c, s], [-s*phase, c*phase]].
        const Complex u_pp = c, u_pq = s, u_qp = -s * phase, u_qq = c * phase;
        // a <- a U
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * u_pp + akq * u_qp;
          a(k, q) = akp * u_pq + akq * u_qq;
        }
        // a <- U^dagger a
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
          a(q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * u_pp + vkq * u_qp;
          v(k, q) = vkp * u_pq + vkq * u_qq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x).real() < a(y, y).real();
  });
  HermitianEigenResult result{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    result.eigenvalues(k) = a(order[k], order[k]).real();
    result.eigenvectors.col(k) = v.col(order[k]);
  }
  return result;
}

double min_eigenvalue(const ComplexMatrix& a) {
  return hermitian_eigen(a).eigenvalues(0);
}

ComplexMatrix partial_trace(const ComplexMatrix& a, const std::vector<int>& dims,
                            const std::vector<int>& keep) {
  const int total = checked_total(dims, a.rows(), a.cols());
  const int parties = static_cast<int>(dims.size());
  if (keep.empty()) throw DimensionMismatch("keep set is empty");
  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) {
    if (k < 0 || k >= parties || kept[k])
      throw DimensionMismatch("invalid keep index " + std::to_string(k));
    kept[k] = true;
  }
  std::vector<int> kept_dims;
  for (int k = 0; k < parties; ++k)
    if (kept[k]) kept_dims.push_back(dims[k]);
  const int out_dim = std::accumulate(kept_dims.begin(), kept_dims.end(), 1,
                                      std::multiplies<int>());

  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  std::vector<int> ri, ci;
  for (int r = 0; r < total; ++r) {
    digits_of(r, dims, ri);
    for (int c = 0; c < total; ++c) {
      digits_of(c, dims, ci);
      bool diagonal_in_traced = true;
      for (int k = 0; k < parties && diagonal_in_traced; ++k)
        if (!kept[k] && ri[k] != ci[k]) diagonal_in_traced = false;
      if (!diagonal_in_traced) continue;
      int orow = 0, ocol = 0;
      for (int k = 0; k < parties; ++k) {
        if (!kept[k]) continue;
        orow = orow * dims[k] + ri[k];
        ocol = ocol * dims[k] + ci[k];
      }
      out(orow, ocol) += a(r, c);
    }
  }
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& a,
                                const std::vector<int>& dims, int subsystem) {
  const int total = checked_total(dims, a.rows(), a.cols());
  if (subsystem < 0 || subsystem >= static_cast<int>(dims.size()))
    throw DimensionMismatch("invalid subsystem " + std::to_string(subsystem));
  int stride = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k > subsystem; --k)
    stride *= dims[k];
  const int d = dims[subsystem];

  ComplexMatrix out(total, total);
  for (int r = 0; r < total; ++r) {
    const int rd = (r / stride) % d;
    for (int c = 0; c < total; ++c) {
      const int cd = (c / stride) % d;
      const int r2 = r + (cd - rd) * stride;
      const int c2 = c + (rd - cd) * stride;
      out(r, c) = a(r2, c2);
    }
  }
  return out;
}

ComplexMatrix embed_operator(const ComplexMatrix& op, const std::vector<int>& dims,
                             const std::vector<int>& targets) {
  long total = 1;
  for (int d : dims) total *= d;
  long sub = 1;
  std::vector<bool> is_target(dims.size(), false);
  for (int t : targets) {
    if (t < 0 || t >= static_cast<int>(dims.size()) || is_target[t])
      throw DimensionMismatch("invalid embedding target");
    is_target[t] = true;
    sub *= dims[t];
  }
  if (op.rows() != sub || op.cols() != sub)
    throw DimensionMismatch("operator size does not match target subsystems");

  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  std::vector<int> ri, ci;
  for (int r = 0; r < total; ++r) {
    digits_of(r, dims, ri);
    for (int c = 0; c < total; ++c) {
      digits_of(c, dims, ci);
      bool same_elsewhere = true;
      for (std::size_t k = 0; k < dims.size() && same_elsewhere; ++k)
        if (!is_target[k] && ri[k] != ci[k]) same_elsewhere = false;
      if (!same_elsewhere) continue;
      int orow = 0, ocol = 0;
      for (int t : targets) {
        orow = orow * dims[t] + ri[t];
        ocol = ocol * dims[t] + ci[t];
      }
      out(r, c) = op(orow, ocol);
    }
  }
  return out;
}

ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint(); }

}  // namespace margcert
