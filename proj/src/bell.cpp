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

#include "margcert/bell.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "margcert/errors.hpp"

namespace margcert {

namespace {

std::array<double, 3> normalized(std::array<double, 3> v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  for (double& x : v) x /= n;
  return v;
}

std::array<double, 3> real_unit_column(const ComplexMatrix& vectors, int col) {
  // Eigenvectors of a real symmetric matrix are real up to a global phase.
  Eigen::Index pivot = 0;
  vectors.col(col).cwiseAbs().maxCoeff(&pivot);
  const Complex phase = std::conj(vectors(pivot, col)) / std::abs(vectors(pivot, col));
  std::array<double, 3> v{};
  for (int k = 0; k < 3; ++k) v[k] = (phase * vectors(k, col)).real();
  return normalized(v);
}

std::array<double, 3> any_orthogonal(const std::array<double, 3>& v) {
  std::array<double, 3> axis{1.0, 0.0, 0.0};
  if (std::abs(v[0]) > 0.9) axis = {0.0, 1.0, 0.0};
  std::array<double, 3> c{v[1] * axis[2] - v[2] * axis[1],
                          v[2] * axis[0] - v[0] * axis[2],
                          v[0] * axis[1] - v[1] * axis[0]};
  return normalized(c);
}

struct OutcomeSplit {
  double p_plus;
  DensityMatrix rho_plus, rho_minus;
};

OutcomeSplit condition_on_outcome(const DensityMatrix& rho, int party,
                                  const Observable& obs) {
  if (party < 0 || party >= rho.parties() || rho.dims[party] != 2)
    throw DimensionMismatch("conditioning party must be a qubit of the state");
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  std::vector<int> keep;
  for (int k = 0; k < rho.parties(); ++k)
    if (k != party) keep.push_back(k);

  OutcomeSplit split;
  double probability[2];
  DensityMatrix conditional[2];
  for (int outcome = 0; outcome < 2; ++outcome) {
    const double sign = outcome == 0 ? 1.0 : -1.0;
    const ComplexMatrix local = 0.5 * (id2 + sign * obs.matrix());
    ComplexMatrix full = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < rho.parties(); ++k)
      full = kron(full, k == party ? local : ComplexMatrix::Identity(rho.dims[k], rho.dims[k]));
    const ComplexMatrix projected = full * rho.matrix * full;
    probability[outcome] = trace(projected).real();
    ComplexMatrix reduced = partial_trace(projected, rho.dims, keep);
    std::vector<int> dims;
    for (int k : keep) dims.push_back(rho.dims[k]);
    if (probability[outcome] > 1e-15) {
      reduced /= probability[outcome];
    } else {
      reduced = ComplexMatrix::Identity(reduced.rows(), reduced.cols()) /
                double(reduced.rows());
    }
    conditional[outcome] = DensityMatrix(0.5 * (reduced + reduced.adjoint()), dims);
  }
  split.p_plus = probability[0] / (probability[0] + probability[1]);
  split.rho_plus = conditional[0];
  split.rho_minus = conditional[1];
  return split;
}

}  // namespace

Observable Observable::from_bloch(const std::array<double, 3>& n) {
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kDefaultTolerances.bloch_norm)
    throw InvalidObservable("Bloch vector norm " + std::to_string(norm));
  return Observable(n);
}

Observable Observable::equatorial(double theta) {
  return Observable({std::sin(theta), 0.0, std::cos(theta)});
}

Observable Observable::spherical(double theta, double phi) {
  return Observable({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                     std::cos(theta)});
}

ComplexMatrix Observable::matrix() const {
  return bloch_[0] * pauli(1) + bloch_[1] * pauli(2) + bloch_[2] * pauli(3);
}

Observable Observable::negated() const {
  return Observable({-bloch_[0], -bloch_[1], -bloch_[2]});
}

Observable equatorial_observable(double theta) { return Observable::equatorial(theta); }

BellExpression::BellExpression(std::vector<int> settings_per_party)
    : settings_(std::move(settings_per_party)) {
  for (int s : settings_)
    if (s < 0) throw SettingsMismatch("negative settings count");
}

BellExpression& BellExpression::add(const Term& term, double coeff) {
  if (term.size() != settings_.size())
    throw SettingsMismatch("term has wrong number of parties");
  for (std::size_t k = 0; k < term.size(); ++k)
    if (term[k] < 0 || term[k] > settings_[k])
      throw SettingsMismatch("term setting index out of range");
  double& c = terms_[term];
  c += coeff;
  if (c == 0.0) terms_.erase(term);
  return *this;
}

double BellExpression::coefficient(const Term& term) const {
  const auto it = terms_.find(term);
  return it == terms_.end() ? 0.0 : it->second;
}

BellExpression builtin_expression(std::string_view name) {
  if (name == "CHSH") {
    BellExpression e({2, 2});
    e.add({1, 1}, 1).add({1, 2}, 1).add({2, 1}, 1).add({2, 2}, -1);
    return e;
  }
  if (name == "BI") {
    // -A1 + (B1 - B2 - C2)(1 + A1) + CHSH_BC
    BellExpression e({1, 2, 2});
    e.add({1, 0, 0}, -1);
    for (int a : {0, 1}) {
      e.add({a, 1, 0}, 1);
      e.add({a, 2, 0}, -1);
      e.add({a, 0, 2}, -1);
    }
    e.add({0, 1, 1}, 1).add({0, 1, 2}, 1).add({0, 2, 1}, 1).add({0, 2, 2}, -1);
    return e;
  }
  if (name == "Mermin") {
    BellExpression e({2, 2, 2});
    e.add({1, 1, 1}, -1).add({1, 2, 2}, 1).add({2, 1, 2}, 1).add({2, 2, 1}, 1);
    return e;
  }
  if (name == "Sliwa4") {
    // (1 - A1) CHSH_BC + 2 A1
    BellExpression e({1, 2, 2});
    const std::array<std::array<int, 3>, 4> chsh{{{1, 1, 1}, {1, 2, 1}, {2, 1, 1}, {2, 2, -1}}};
    for (const auto& [b, c, s] : chsh) {
      e.add({0, b, c}, s);
      e.add({1, b, c}, -s);
    }
    e.add({1, 0, 0}, 2);
    return e;
  }
  throw UnknownName(std::string(name));
}

BellExpression embed_expression(const BellExpression& expr, int total_parties,
                                const std::vector<int>& positions) {
  if (static_cast<int>(positions.size()) != expr.parties())
    throw SettingsMismatch("one position per party required");
  std::vector<int> settings(total_parties, 0);
  for (int k = 0; k < expr.parties(); ++k) {
    if (positions[k] < 0 || positions[k] >= total_parties)
      throw SettingsMismatch("embedding position out of range");
    settings[positions[k]] = expr.settings()[k];
  }
  BellExpression out(settings);
  for (const auto& [term, coeff] : expr.terms()) {
    std::vector<int> t(total_parties, 0);
    for (int k = 0; k < expr.parties(); ++k) t[positions[k]] = term[k];
    out.add(t, coeff);
  }
  return out;
}

BellExpression substitute_outcome(const BellExpression& expr, int party,
                                  int setting, double value) {
  if (party < 0 || party >= expr.parties()) throw SettingsMismatch("bad party");
  std::vector<int> settings = expr.settings();
  settings.erase(settings.begin() + party);
  BellExpression out(settings);
  for (const auto& [term, coeff] : expr.terms()) {
    if (term[party] != 0 && term[party] != setting)
      throw SettingNotUnique("party uses another setting");
    std::vector<int> t = term;
    t.erase(t.begin() + party);
    out.add(t, term[party] == setting ? coeff * value : coeff);
  }
  return out;
}

double local_bound(const BellExpression& expr) {
  const auto& settings = expr.settings();
  int total = 0;
  for (int s : settings) total += s;
  if (total > 30) throw SettingsMismatch("too many settings to enumerate");
  std::vector<int> offset(settings.size(), 0);
  for (std::size_t k = 1; k < settings.size(); ++k)
    offset[k] = offset[k - 1] + settings[k - 1];

  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << total); ++mask) {
    double value = 0.0;
    for (const auto& [term, coeff] : expr.terms()) {
      double product = coeff;
      for (std::size_t k = 0; k < term.size(); ++k)
        if (term[k] != 0 && ((mask >> (offset[k] + term[k] - 1)) & 1U)) product = -product;
      value += product;
    }
    best = std::max(best, value);
  }
  return best;
}

void check_settings(const BellExpression& expr, const MeasurementSet& m) {
  if (static_cast<int>(m.size()) != expr.parties())
    throw SettingsMismatch("measurement set has " + std::to_string(m.size()) +
                           " parties, expression has " + std::to_string(expr.parties()));
  for (int k = 0; k < expr.parties(); ++k)
    if (static_cast<int>(m[k].size()) != expr.settings()[k])
      throw SettingsMismatch("party " + std::to_string(k) + " has " +
                             std::to_string(m[k].size()) + " observables, expected " +
                             std::to_string(expr.settings()[k]));
}

ComplexMatrix bell_operator(const BellExpression& expr, const MeasurementSet& m) {
  check_settings(expr, m);
  const int dim = 1 << expr.parties();
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  std::vector<std::vector<ComplexMatrix>> matrices(m.size());
  for (std::size_t k = 0; k < m.size(); ++k)
    for (const Observable& o : m[k]) matrices[k].push_back(o.matrix());

  ComplexMatrix op = ComplexMatrix::Zero(dim, dim);
  for (const auto& [term, coeff] : expr.terms()) {
    ComplexMatrix product = ComplexMatrix::Identity(1, 1);
    for (std::size_t k = 0; k < term.size(); ++k)
      product = kron(product, term[k] == 0 ? id2 : matrices[k][term[k] - 1]);
    op += coeff * product;
  }
  return op;
}

double quantum_value(const DensityMatrix& rho, const BellExpression& expr,
                     const MeasurementSet& m) {
  if (rho.dimension() != (1 << expr.parties()))
    throw DimensionMismatch("state and expression act on different party counts");
  return real_trace_product(rho.matrix, bell_operator(expr, m));
}

double quantum_value(const CorrelationTensor& t, const BellExpression& expr,
                     const MeasurementSet& m) {
  check_settings(expr, m);
  if (expr.parties() != 3) throw DimensionMismatch("tensor route needs three parties");
  double total = 0.0;
  std::array<std::array<double, 4>, 3> v{};
  for (const auto& [term, coeff] : expr.terms()) {
    for (int k = 0; k < 3; ++k) {
      if (term[k] == 0) {
        v[k] = {1.0, 0.0, 0.0, 0.0};
      } else {
        const auto& n = m[k][term[k] - 1].bloch();
        v[k] = {0.0, n[0], n[1], n[2]};
      }
    }
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (v[0][i] == 0.0) continue;
      for (int j = 0; j < 4; ++j) {
        if (v[1][j] == 0.0) continue;
        for (int l = 0; l < 4; ++l) acc += v[0][i] * v[1][j] * v[2][l] * t(i, j, l);
      }
    }
    total += coeff * acc;
  }
  return total;
}

EvaluationResult make_evaluation(double quantum, double local, double tol) {
  EvaluationResult r;
  r.quantum = quantum;
  r.local = local;
  r.ratio = local > 0.0 ? quantum / local : 0.0;
  r.violated = quantum > local + tol;
  return r;
}

EvaluationResult evaluate(const DensityMatrix& rho, const BellExpression& expr,
                          const MeasurementSet& m) {
  return make_evaluation(quantum_value(rho, expr, m), local_bound(expr));
}

ConditionalDecomposition conditional_decomposition(const DensityMatrix& rho,
                                                   const BellExpression& expr,
                                                   const MeasurementSet& m, int party,
                                                   int setting) {
  check_settings(expr, m);
  if (party < 0 || party >= expr.parties() || setting < 1 ||
      setting > expr.settings()[party])
    throw SettingsMismatch("conditioning setting does not exist");
  for (const auto& [term, coeff] : expr.terms())
    if (term[party] != 0 && term[party] != setting)
      throw SettingNotUnique("party " + std::to_string(party) + " uses setting " +
                             std::to_string(term[party]));

  const OutcomeSplit split = condition_on_outcome(rho, party, m[party][setting - 1]);
  MeasurementSet rest = m;
  rest.erase(rest.begin() + party);

  ConditionalDecomposition d;
  d.p_plus = split.p_plus;
  d.rho_plus = split.rho_plus;
  d.rho_minus = split.rho_minus;
  d.expr_plus = substitute_outcome(expr, party, setting, +1.0);
  d.expr_minus = substitute_outcome(expr, party, setting, -1.0);
  d.q_plus = quantum_value(d.rho_plus, d.expr_plus, rest);
  d.q_minus = quantum_value(d.rho_minus, d.expr_minus, rest);
  return d;
}

HorodeckiResult horodecki_chsh(const DensityMatrix& rho) {
  const MarginalTensor full = two_qubit_tensor(rho);
  Eigen::Matrix3d t;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) t(j, k) = full[j + 1][k + 1];
  const Eigen::Matrix3d gram = t.transpose() * t;
  const HermitianEigenResult eig = hermitian_eigen(gram.cast<Complex>());

  HorodeckiResult r;
  r.u1 = std::max(0.0, eig.eigenvalues(2));
  r.u2 = std::max(0.0, eig.eigenvalues(1));
  r.value = 2.0 * std::sqrt(r.u1 + r.u2);

  const std::array<double, 3> v1 = real_unit_column(eig.eigenvectors, 2);
  const std::array<double, 3> v2 = real_unit_column(eig.eigenvectors, 1);
  const double s[2] = {std::sqrt(r.u1), std::sqrt(r.u2)};
  const std::array<double, 3>* v[2] = {&v1, &v2};

  std::array<double, 3> b[2];
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector3d image =
        t * Eigen::Vector3d((*v[i])[0], (*v[i])[1], (*v[i])[2]);
    if (image.norm() > 1e-12) {
      b[i] = normalized({image(0), image(1), image(2)});
    } else {
      b[i] = i == 0 ? std::array<double, 3>{0.0, 0.0, 1.0} : any_orthogonal(b[0]);
    }
  }
  const double phi = std::atan2(s[1], s[0]);
  std::array<double, 3> c1{}, c2{};
  for (int k = 0; k < 3; ++k) {
    c1[k] = std::cos(phi) * v1[k] + std::sin(phi) * v2[k];
    c2[k] = std::cos(phi) * v1[k] - std::sin(phi) * v2[k];
  }
  r.settings = {{Observable::from_bloch(b[0]), Observable::from_bloch(b[1])},
                {Observable::from_bloch(normalized(c1)), Observable::from_bloch(normalized(c2))}};
  return r;
}

Sliwa4Result sliwa4_quantum_value(const DensityMatrix& rho, const Observable& alice) {
  if (rho.dimension() != 8) throw DimensionMismatch("expected a three-qubit state");
  const OutcomeSplit split = condition_on_outcome(rho, 0, alice);
  const HorodeckiResult h = horodecki_chsh(split.rho_minus);

  Sliwa4Result r;
  r.p_plus = split.p_plus;
  r.chsh_max = h.value;
  r.q_plus = 2.0;
  r.q_minus = 2.0 * h.value - 2.0;
  r.settings = {{alice}, h.settings[0], h.settings[1]};
  const double q = r.p_plus * r.q_plus + (1.0 - r.p_plus) * r.q_minus;
  r.evaluation = make_evaluation(q, local_bound(builtin_expression("Sliwa4")));
  return r;
}

std::string to_json(const BellExpression& expr) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [term, coeff] : expr.terms()) {
    std::string key;
    for (std::size_t k = 0; k < term.size(); ++k) {
      if (k) key += ',';
      key += std::to_string(term[k]);
    }
    j[key] = coeff;
  }
  return j.dump();
}

BellExpression expression_from_json(const std::string& text, std::vector<int> settings) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("expression JSON must be an object");
  std::vector<std::pair<std::vector<int>, double>> parsed;
  std::size_t parties = 0;
  for (const auto& [key, value] : j.items()) {
    std::vector<int> term;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        term.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw ParseError("bad term key " + key);
      }
    }
    if (!value.is_number()) throw ParseError("coefficient must be a number");
    if (parties == 0) parties = term.size();
    if (term.size() != parties || parties == 0) throw ParseError("inconsistent term arity");
    parsed.emplace_back(term, value.get<double>());
  }
  if (settings.empty()) {
    settings.assign(parties, 0);
    for (const auto& [term, coeff] : parsed)
      for (std::size_t k = 0; k < parties; ++k) settings[k] = std::max(settings[k], term[k]);
  }
  BellExpression e(settings);
  for (const auto& [term, coeff] : parsed) e.add(term, coeff);
  return e;
}

MeasurementSet mermin_settings(double theta1, double theta2) {
  const Observable z = Observable::equatorial(0.0);
  const Observable y = Observable::from_bloch({0.0, 1.0, 0.0});
  const double st = std::sin(theta1), ct = std::cos(theta1);
  const Observable c1 =
      Observable::from_bloch({st * std::cos(theta2), st * std::sin(theta2), ct});
  const Observable c2 =
      Observable::from_bloch({-st * std::cos(theta2), st * std::sin(theta2), -ct});
  return {{z, z}, {z, y}, {c1, c2}};
}

MeasurementSet bi_settings(double theta_a, double theta_b1, double theta_c1,
                           double theta_b2, double theta_c2) {
  return {{Observable::equatorial(theta_a)},
          {Observable::equatorial(theta_b1), Observable::equatorial(theta_b2)},
          {Observable::equatorial(theta_c1), Observable::equatorial(theta_c2)}};
}

}  // namespace margcert
