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

#include "margcert/states.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "margcert/errors.hpp"

namespace margcert {

namespace {

int qubit_count(Eigen::Index dim) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim) {
    d *= 2;
    ++n;
  }
  if (d != dim || dim < 2) throw DimensionMismatch("not a qubit register");
  return n;
}

void check_three_qubits(const DensityMatrix& rho) {
  if (rho.dimension() != 8) throw DimensionMismatch("expected a three-qubit state");
}

}  // namespace

FamilyParameters published_parameters() {
  return FamilyParameters{0.759101, 0.015596, 0.225303,
                          0.093586, 1.228106, 1.063034, 0.050725};
}

FamilyParameters reference_parameters() {
  FamilyParameters p = published_parameters();
  p.p1 = 0.015596025;
  p.p2 = 0.225302975;
  return p;
}

DensityMatrix::DensityMatrix(ComplexMatrix m, std::vector<int> subsystem_dims)
    : matrix(std::move(m)), dims(std::move(subsystem_dims)) {
  long total = 1;
  for (int d : dims) total *= d;
  if (matrix.rows() != matrix.cols() || total != matrix.rows())
    throw DimensionMismatch("subsystem dims do not match matrix size");
}

DensityMatrix::DensityMatrix(ComplexMatrix m)
    : DensityMatrix(m, std::vector<int>(qubit_count(m.rows()), 2)) {}

void validate(const DensityMatrix& rho, const Tolerances& tol) {
  if (!all_finite(rho.matrix)) throw InvalidState("non-finite entries");
  if (!is_hermitian(rho.matrix, tol.hermiticity))
    throw InvalidState("not Hermitian");
  const double tr_err = std::abs(trace(rho.matrix) - 1.0);
  if (tr_err > tol.trace)
    throw InvalidState("trace deviates from 1 by " + std::to_string(tr_err));
  const double lmin = min_eigenvalue(rho.matrix);
  if (lmin < -tol.psd)
    throw InvalidState("negative eigenvalue " + std::to_string(lmin));
}

bool is_valid_state(const DensityMatrix& rho, const Tolerances& tol) {
  try {
    validate(rho, tol);
    return true;
  } catch (const Error&) {
    return false;
  }
}

ComplexVector family_psi0(double alpha) {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = std::cos(alpha);
  v(3) = std::sin(alpha);
  return v;
}

ComplexVector family_psi1(double beta, double gamma) {
  ComplexVector v(4);
  const double b[2] = {std::cos(beta), std::sin(beta)};
  const double c[2] = {std::cos(gamma), std::sin(gamma)};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) v(2 * i + j) = b[i] * c[j];
  return v;
}

ComplexVector family_psi2(double delta) {
  ComplexVector v(4);
  const double s = std::sin(delta) / std::sqrt(2.0);
  const double c = std::cos(delta) / std::sqrt(2.0);
  v << s, c, c, -s;
  return v;
}

DensityMatrix build_family_state(const FamilyParameters& p) {
  const double ps[3] = {p.p0, p.p1, p.p2};
  for (double x : ps)
    if (!(x >= 0.0)) throw InvalidProbabilities("negative or NaN weight");
  if (std::abs(p.p0 + p.p1 + p.p2 - 1.0) > kDefaultTolerances.probability_sum)
    throw InvalidProbabilities("weights do not sum to 1");

  ComplexMatrix zero = ComplexMatrix::Zero(2, 2), one = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  one(1, 1) = 1.0;
  const ComplexMatrix bc0 = p.p0 * projector(family_psi0(p.alpha));
  const ComplexMatrix bc1 = p.p1 * projector(family_psi1(p.beta, p.gamma)) +
                            p.p2 * projector(family_psi2(p.delta));
  return DensityMatrix(kron(zero, bc0) + kron(one, bc1), {2, 2, 2});
}

DensityMatrix reference_state() { return build_family_state(reference_parameters()); }
DensityMatrix published_state() { return build_family_state(published_parameters()); }

DensityMatrix pure_state(const ComplexVector& psi, std::vector<int> dims) {
  const ComplexVector n = psi / psi.norm();
  return DensityMatrix(projector(n), std::move(dims));
}

DensityMatrix ghz_state(bool minus) {
  ComplexVector v = ComplexVector::Zero(8);
  v(0) = 1.0;
  v(7) = minus ? -1.0 : 1.0;
  return pure_state(v, {2, 2, 2});
}

DensityMatrix product_state(const std::string& bits) {
  if (bits.empty()) throw ParseError("empty bit string");
  int index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ParseError("bit string must contain 0/1: " + bits);
    index = 2 * index + (c - '0');
  }
  const int dim = 1 << bits.size();
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return pure_state(v, std::vector<int>(bits.size(), 2));
}

DensityMatrix maximally_mixed(int qubits) {
  const int dim = 1 << qubits;
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / double(dim),
                       std::vector<int>(qubits, 2));
}

DensityMatrix with_alice_zero(const DensityMatrix& rho_bc) {
  if (rho_bc.dimension() != 4) throw DimensionMismatch("expected two qubits");
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  return DensityMatrix(kron(zero, rho_bc.matrix), {2, 2, 2});
}

DensityMatrix reduce(const DensityMatrix& rho, const std::vector<int>& keep) {
  std::vector<int> dims;
  for (int k : keep) dims.push_back(rho.dims.at(k));
  return DensityMatrix(partial_trace(rho.matrix, rho.dims, keep), dims);
}

DensityMatrix random_density_matrix(int qubits, int components,
                                    std::mt19937_64& rng) {
  const int dim = 1 << qubits;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  double total = 0.0;
  for (int k = 0; k < components; ++k) {
    ComplexVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
    v /= v.norm();
    const double w = uniform(rng) + 1e-3;
    m += w * projector(v);
    total += w;
  }
  m /= total;
  m = 0.5 * (m + m.adjoint());
  return DensityMatrix(m, std::vector<int>(qubits, 2));
}

const char* pair_name(Pair pair) {
  switch (pair) {
    case Pair::AB: return "AB";
    case Pair::AC: return "AC";
    case Pair::BC: return "BC";
  }
  return "?";
}

Pair pair_from_name(const std::string& name) {
  if (name == "AB") return Pair::AB;
  if (name == "AC") return Pair::AC;
  if (name == "BC") return Pair::BC;
  throw ParseError("unknown pair " + name);
}

const MarginalTensor& Marginals::get(Pair pair) const {
  switch (pair) {
    case Pair::AB: return ab;
    case Pair::AC: return ac;
    case Pair::BC: break;
  }
  return bc;
}

MarginalTensor& Marginals::get(Pair pair) {
  return const_cast<MarginalTensor&>(std::as_const(*this).get(pair));
}

CorrelationTensor correlation_tensor(const DensityMatrix& rho) {
  check_three_qubits(rho);
  CorrelationTensor t;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        t(i, j, k) = real_trace_product(rho.matrix, pauli_string({i, j, k}));
  return t;
}

DensityMatrix state_from_tensor(const CorrelationTensor& t) {
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        if (t(i, j, k) != 0.0) m += t(i, j, k) * pauli_string({i, j, k});
  return DensityMatrix(m / 8.0, {2, 2, 2});
}

MarginalTensor marginal_tensor(const CorrelationTensor& t, Pair pair) {
  MarginalTensor m{};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      switch (pair) {
        case Pair::AB: m[j][k] = t(j, k, 0); break;
        case Pair::AC: m[j][k] = t(j, 0, k); break;
        case Pair::BC: m[j][k] = t(0, j, k); break;
      }
    }
  return m;
}

Marginals all_marginals(const CorrelationTensor& t) {
  return Marginals{marginal_tensor(t, Pair::AB), marginal_tensor(t, Pair::AC),
                   marginal_tensor(t, Pair::BC)};
}

MarginalTensor two_qubit_tensor(const DensityMatrix& rho) {
  if (rho.dimension() != 4) throw DimensionMismatch("expected a two-qubit state");
  MarginalTensor m{};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      m[j][k] = real_trace_product(rho.matrix, pauli_string({j, k}));
  return m;
}

void write_tensor_fixture(std::ostream& out, const CorrelationTensor& t,
                          double zero_threshold) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(15);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        if (std::abs(t(i, j, k)) > zero_threshold)
          out << i << ' ' << j << ' ' << k << ' ' << t(i, j, k) << '\n';
  out.flags(flags);
  out.precision(precision);
}

CorrelationTensor read_tensor_fixture(std::istream& in) {
  CorrelationTensor t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    int i, j, k;
    double v;
    if (!(row >> i >> j >> k >> v) || i < 0 || i > 3 || j < 0 || j > 3 || k < 0 ||
        k > 3)
      throw ParseError("tensor fixture line " + std::to_string(lineno));
    t(i, j, k) = v;
  }
  return t;
}

void write_marginal_fixture(std::ostream& out, const Marginals& m,
                            double zero_threshold) {
  const auto precision = out.precision();
  out << std::setprecision(15);
  for (Pair pair : kAllPairs) {
    const MarginalTensor& table = m.get(pair);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        if (std::abs(table[j][k]) > zero_threshold)
          out << pair_name(pair) << ' ' << j << ' ' << k << ' ' << table[j][k] << '\n';
  }
  out.precision(precision);
}

Marginals read_marginal_fixture(std::istream& in) {
  Marginals m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string name;
    int j, k;
    double v;
    if (!(row >> name >> j >> k >> v) || j < 0 || j > 3 || k < 0 || k > 3)
      throw ParseError("marginal fixture line " + std::to_string(lineno));
    m.get(pair_from_name(name))[j][k] = v;
  }
  return m;
}

DensityMatrix read_state_file(std::istream& in, const Tolerances& tol) {
  ComplexMatrix m(8, 8);
  for (int k = 0; k < 64; ++k) {
    double re, im;
    if (!(in >> re >> im))
      throw ParseError("state file needs 64 lines of 're im', failed at entry " +
                       std::to_string(k + 1));
    m(k / 8, k % 8) = Complex(re, im);
  }
  double extra;
  if (in >> extra) throw ParseError("state file has more than 64 entries");
  DensityMatrix rho(m, {2, 2, 2});
  validate(rho, tol);
  return rho;
}

void write_state_file(std::ostream& out, const DensityMatrix& rho) {
  check_three_qubits(rho);
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      out << rho.matrix(r, c).real() << ' ' << rho.matrix(r, c).imag() << '\n';
  out.precision(precision);
}

}  // namespace margcert
