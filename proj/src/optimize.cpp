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


#include "margcert/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "margcert/errors.hpp"
#include "margcert/separability.hpp"

namespace margcert {

void NelderMeadConfig::check() const {
  if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0 && contraction < 1.0) ||
      !(shrink > 0.0 && shrink < 1.0) || !(tolerance > 0.0) || !(initial_step > 0.0) ||
      max_iterations < 0 || restarts < 0)
    throw std::invalid_argument("Nelder-Mead coefficients out of range");
}

namespace {

struct Vertex {
  std::vector<double> x;
  double f = 0.0;
};

class Evaluator {
 public:
  explicit Evaluator(const Objective& f) : f_(f) {}
  double operator()(const std::vector<double>& x) {
    ++count;
    const double v = f_(x);
    if (!std::isfinite(v)) throw NonFiniteObjective("objective returned a non-finite value");
    return v;
  }
  int count = 0;

 private:
  const Objective& f_;
};

// One simplex collapse from x0; returns the best vertex.
Vertex simplex_pass(Evaluator& eval, const std::vector<double>& x0, double f0,
                    const NelderMeadConfig& c, int max_iterations, int& iterations) {
  const std::size_t n = x0.size();
  std::vector<Vertex> s(n + 1);
  s[0] = {x0, f0};
  for (std::size_t i = 0; i < n; ++i) {
    s[i + 1].x = x0;
    s[i + 1].x[i] += c.initial_step;
    s[i + 1].f = eval(s[i + 1].x);
  }
  auto along = [&](const std::vector<double>& from, const std::vector<double>& to, double t) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = from[i] + t * (to[i] - from[i]);
    return out;
  };

  for (int it = 0; it < max_iterations; ++it) {
    std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f > b.f; });
    if (s.front().f - s.back().f < c.tolerance) break;
    ++iterations;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s[v].x[i] / double(n);
    Vertex& worst = s.back();

    Vertex r{along(centroid, worst.x, -c.reflection), 0.0};
    r.f = eval(r.x);
    if (r.f > s.front().f) {
      Vertex e{along(centroid, r.x, c.expansion), 0.0};
      e.f = eval(e.x);
      worst = e.f > r.f ? std::move(e) : std::move(r);
      continue;
    }
    if (r.f > s[n - 1].f) {
      worst = std::move(r);
      continue;
    }
    Vertex k;
    if (r.f > worst.f) {
      k.x = along(centroid, r.x, c.contraction);
      k.f = eval(k.x);
      if (k.f >= r.f) {
        worst = std::move(k);
        continue;
      }
    } else {
      k.x = along(centroid, worst.x, c.contraction);
      k.f = eval(k.x);
      if (k.f > worst.f) {
        worst = std::move(k);
        continue;
      }
    }
    for (std::size_t v = 1; v <= n; ++v) {
      s[v].x = along(s[0].x, s[v].x, c.shrink);
      s[v].f = eval(s[v].x);
    }
  }
  return *std::max_element(s.begin(), s.end(),
                           [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadConfig& config) {
  config.check();
  if (x0.empty()) throw DimensionMismatch("Nelder-Mead needs at least one variable");
  const int max_it = config.max_iterations > 0 ? config.max_iterations
                                               : 200 * static_cast<int>(x0.size());
  Evaluator eval(f);
  NelderMeadResult out;
  Vertex best{x0, eval(x0)};
  for (int pass = 0; pass < 6; ++pass) {
    Vertex v = simplex_pass(eval, best.x, best.f, config, max_it, out.iterations);
    const bool improved = v.f > best.f + config.tolerance;
    if (v.f > best.f) best = std::move(v);
    if (!improved) break;
  }
  out.point = std::move(best.x);
  out.value = best.f;
  out.evaluations = eval.count;
  return out;
}

std::vector<double> measurement_angles(const MeasurementSet& m) {
  std::vector<double> out;
  for (const auto& party : m)
    for (const auto& o : party) {
      const auto& n = o.bloch();
      out.push_back(std::acos(std::clamp(n[2], -1.0, 1.0)));
      out.push_back(std::atan2(n[1], n[0]));
    }
  return out;
}

MeasurementSet measurements_from_angles(const std::vector<double>& angles,
                                        const std::vector<int>& settings_per_party) {
  const int total = std::accumulate(settings_per_party.begin(), settings_per_party.end(), 0);
  if (static_cast<int>(angles.size()) != 2 * total)
    throw DimensionMismatch("need two angles per setting");
  MeasurementSet m;
  std::size_t k = 0;
  for (int count : settings_per_party) {
    m.emplace_back();
    for (int s = 0; s < count; ++s, k += 2)
      m.back().push_back(Observable::spherical(angles[k], angles[k + 1]));
  }
  return m;
}

namespace {

// Tensor route for three qubits, trace route otherwise.
std::function<double(const MeasurementSet&)> value_function(const DensityMatrix& rho,
                                                          const BellExpression& expr) {
  if (rho.dims.size() == 3 && expr.parties() == 3) {
    CorrelationTensor t = correlation_tensor(rho);
    return [t, &expr](const MeasurementSet& m) { return quantum_value(t, expr, m); };
  }
  return [&rho, &expr](const MeasurementSet& m) { return quantum_value(rho, expr, m); };
}

std::vector<double> random_angles(int settings, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  for (int s = 0; s < settings; ++s) {
    out.push_back(std::acos(1.0 - 2.0 * u(rng)));
    out.push_back(2.0 * std::numbers::pi * u(rng));
  }
  return out;
}

}  // namespace

MeasurementSearchResult optimize_measurements(const DensityMatrix& rho,
                                              const BellExpression& expr,
                                              const NelderMeadConfig& config,
                                              const std::optional<MeasurementSet>& initial) {
  const auto& settings = expr.settings();
  const int total = std::accumulate(settings.begin(), settings.end(), 0);
  const auto value = value_function(rho, expr);
  const Objective f = [&](const std::vector<double>& a) {
    return value(measurements_from_angles(a, settings));
  };
  std::mt19937_64 rng(config.seed);
  MeasurementSearchResult best;
  bool have = false;
  auto consider = [&](std::vector<double> start) {
    const NelderMeadResult r = nelder_mead(f, std::move(start), config);
    if (!have || r.value > best.value) {
      best.value = r.value;
      best.settings = measurements_from_angles(r.point, settings);
      have = true;
    }
  };
  if (initial) {
    check_settings(expr, *initial);
    consider(measurement_angles(*initial));
  }
  for (int r = 0; r < config.restarts; ++r) consider(random_angles(total, rng));
  if (!have) throw DimensionMismatch("no starting point: zero restarts and no initial settings");
  return best;
}

// ---------------------------------------------------------------------------
// Seesaw

namespace {

std::vector<int> qubit_dims(int parties) { return std::vector<int>(parties, 2); }

void check_qubit_state(const DensityMatrix& rho, const BellExpression& expr) {
  if (rho.dims != qubit_dims(expr.parties()))
    throw DimensionMismatch("seesaw needs one qubit per party");
}

}  // namespace

MeasurementSet seesaw_measurement_step(const DensityMatrix& rho, const BellExpression& expr,
                                       const MeasurementSet& current, int party) {
  check_settings(expr, current);
  check_qubit_state(rho, expr);
  const int n = expr.parties();
  if (party < 0 || party >= n) throw DimensionMismatch("party index out of range");
  MeasurementSet out = current;
  const auto dims = qubit_dims(n);
  double scale = 1.0;
  for (const auto& [term, coeff] : expr.terms()) scale = std::max(scale, std::abs(coeff));

  for (int s = 1; s <= expr.settings()[party]; ++s) {
    ComplexMatrix r = ComplexMatrix::Zero(rho.dimension(), rho.dimension());
    for (const auto& [term, coeff] : expr.terms()) {
      if (term[party] != s) continue;
      ComplexMatrix op = ComplexMatrix::Identity(1, 1);
      for (int q = 0; q < n; ++q) {
        const bool identity = q == party || term[q] == 0;
        op = kron(op, identity ? ComplexMatrix(ComplexMatrix::Identity(2, 2))
                               : current[q][term[q] - 1].matrix());
      }
      r += coeff * op;
    }
    const ComplexMatrix m = partial_trace(r * rho.matrix, dims, {party});
    std::array<double, 3> b{};
    for (int i = 0; i < 3; ++i) b[i] = (pauli(i + 1) * m).trace().real();
    const double norm = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    if (norm <= 1e-14 * scale) continue;  // setting does not matter; keep it
    out[party][s - 1] = Observable::from_bloch({b[0] / norm, b[1] / norm, b[2] / norm});
  }
  return out;
}

namespace {

std::vector<std::pair<int, int>> qubit_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) out.emplace_back(p, q);
  return out;
}

double min_ppt_over_pairs(const ComplexMatrix& rho, int n) {
  double out = std::numeric_limits<double>::infinity();
  const auto dims = qubit_dims(n);
  for (auto [p, q] : qubit_pairs(n))
    out = std::min(out, min_eigenvalue(partial_transpose(partial_trace(rho, dims, {p, q}), {2, 2}, 1)));
  return out;
}

// Smallest eps with (1-eps) lambda + eps * floor_value >= margin.
double mixing_for(double lambda, double floor_value, double margin) {
  if (lambda >= margin) return 0.0;
  return (margin - lambda) / (floor_value - lambda);
}

}  // namespace

StateStepResult seesaw_state_step(const BellExpression& expr, const MeasurementSet& m,
                                  const SdpOptions& options) {
  const int n = expr.parties();
  if (n < 3) throw DimensionMismatch("state step needs at least three parties");
  const ComplexMatrix bell = bell_operator(expr, m);
  const int d = static_cast<int>(bell.rows());
  const auto dims = qubit_dims(n);
  const auto pairs = qubit_pairs(n);

  std::vector<int> blocks{d};
  for (std::size_t k = 0; k < pairs.size(); ++k) blocks.push_back(4);
  SdpProblem problem = SdpProblem::with_blocks(blocks, SdpSense::kMaximize);
  problem.add_to_objective(0, bell);
  problem.constraints.push_back({problem.functional(0, ComplexMatrix::Identity(d, d)), 1.0});
  // Block k+1 equals the partial transpose of marginal k, coordinate by coordinate.
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const int offset = problem.block_offset(static_cast<int>(k + 1));
    for (int c = 0; c < 16; ++c) {
      std::vector<double> e(16, 0.0);
      e[c] = 1.0;
      const ComplexMatrix f = partial_transpose(functional_matrix(e, 4), {2, 2}, 1);
      std::vector<double> row =
          problem.functional(0, embed_operator(f, dims, {pairs[k].first, pairs[k].second}));
      for (double& v : row) v = -v;
      row[offset + c] += 1.0;
      problem.constraints.push_back({std::move(row), 0.0});
    }
  }

  StateStepResult out;
  out.solution = solve(problem, options);
  const SdpStatus st = out.solution.status;
  if (st == SdpStatus::kInfeasible || st == SdpStatus::kUnbounded || out.solution.blocks.empty() ||
      out.solution.primal_residual > 1e-6)
    throw SdpFailure(std::string("state step failed: ") + status_name(st) + " " +
                     out.solution.message);

  ComplexMatrix rho = out.solution.blocks.front();
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  const double margin = 1e-13;
  const double eps = std::max(mixing_for(min_eigenvalue(rho), 1.0 / d, margin),
                              mixing_for(min_ppt_over_pairs(rho, n), 0.25, margin));
  if (eps > 0.0)
    rho = (1.0 - eps) * rho + (eps / d) * ComplexMatrix::Identity(d, d);
  out.state = DensityMatrix(rho, dims);
  out.value = real_trace_product(bell, rho);
  return out;
}

MeasurementSet random_measurements(const std::vector<int>& settings_per_party,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MeasurementSet m;
  for (int count : settings_per_party) {
    m.emplace_back();
    for (int s = 0; s < count; ++s) {
      std::array<double, 3> v{};
      double norm = 0.0;
      while (norm < 1e-6) {
        for (double& x : v) x = g(rng);
        norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      }
      m.back().push_back(Observable::from_bloch({v[0] / norm, v[1] / norm, v[2] / norm}));
    }
  }
  return m;
}

SeesawRun seesaw_run(const BellExpression& expr, MeasurementSet initial,
                     const SeesawConfig& config) {
  check_settings(expr, initial);
  SeesawRun run;
  run.settings = std::move(initial);
  bool have_state = false;
  double round_start = -std::numeric_limits<double>::infinity();
  int quiet = 0;
  for (int round = 0; round < config.max_rounds; ++round) {
    StateStepResult step = seesaw_state_step(expr, run.settings, config.sdp);
    // The old state stays feasible, so never accept a worse one.
    if (!have_state || step.value >= run.value) {
      run.state = std::move(step.state);
      run.value = step.value;
      have_state = true;
    }
    run.trace.push_back(run.value);
    for (int p = 0; p < expr.parties(); ++p) {
      run.settings = seesaw_measurement_step(run.state, expr, run.settings, p);
      run.value = quantum_value(run.state, expr, run.settings);
      run.trace.push_back(run.value);
    }
    run.rounds = round + 1;
    const double gain = (run.value - round_start) / std::max(1.0, std::abs(round_start));
    quiet = gain < config.relative_tolerance ? quiet + 1 : 0;
    round_start = run.value;
    if (quiet >= config.patience) break;
  }
  return run;
}

SeesawResult seesaw(const BellExpression& expr, const SeesawConfig& config) {
  if (config.restarts < 1) throw DimensionMismatch("seesaw needs at least one restart");
  std::vector<SeesawRun> runs(static_cast<std::size_t>(config.restarts));
  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < config.restarts; r = next++) {
      try {
        std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(r));
        runs[r] = seesaw_run(expr, random_measurements(expr.settings(), rng), config);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, config.restarts);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SeesawResult out;
  for (int r = 0; r < config.restarts; ++r) {
    const SeesawRun& run = runs[r];
    for (std::size_t i = 0; i < run.trace.size(); ++i) {
      out.log.push_back({r, static_cast<int>(i), run.trace[i]});
      if (i > 0) out.max_decrease = std::max(out.max_decrease, run.trace[i - 1] - run.trace[i]);
    }
    if (r == 0 || run.value > out.best_value) {
      out.best_value = run.value;
      out.best_restart = r;
    }
  }
  const SeesawRun& best = runs[out.best_restart];
  out.best_state = best.state;
  out.best_measurements = best.settings;
  out.trace = best.trace;
  return out;
}

void write_trace_ndjson(std::ostream& out, const std::vector<TraceRecord>& log) {
  for (const auto& rec : log) {
    nlohmann::ordered_json j;
    j["iteration"] = rec.iteration;
    j["restart"] = rec.restart;
    j["value"] = rec.value;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Family search

namespace {

// Free-variable layout: u, v, alpha, beta, gamma, delta, four angles; frozen
// entries are dropped.
struct FamilyLayout {
  bool freeze_delta = false;
  bool force_p1_zero = false;

  std::vector<double> pack(const std::array<double, 10>& full) const {
    std::vector<double> x;
    for (int i = 0; i < 10; ++i) {
      if (i == 1 && force_p1_zero) continue;
      if (i == 5 && freeze_delta) continue;
      x.push_back(full[i]);
    }
    return x;
  }
  std::array<double, 10> unpack(const std::vector<double>& x) const {
    std::array<double, 10> full{};
    std::size_t k = 0;
    for (int i = 0; i < 10; ++i) {
      if (i == 1 && force_p1_zero) full[i] = std::numbers::pi / 2;
      else if (i == 5 && freeze_delta) full[i] = 0.0;
      else full[i] = x[k++];
    }
    return full;
  }
};

FamilyParameters to_parameters(const std::array<double, 10>& full) {
  const double cu = std::cos(full[0]), su = std::sin(full[0]);
  const double cv = std::cos(full[1]), sv = std::sin(full[1]);
  FamilyParameters p;
  p.p0 = cu * cu;
  p.p1 = su * su * cv * cv;
  p.p2 = su * su * sv * sv;
  p.alpha = full[2];
  p.beta = full[3];
  p.gamma = full[4];
  p.delta = full[5];
  return p;
}

std::array<double, 10> from_parameters(const FamilyParameters& p, const std::array<double, 4>& a) {
  return {std::acos(std::sqrt(std::clamp(p.p0, 0.0, 1.0))),
          std::atan2(std::sqrt(std::max(0.0, p.p2)), std::sqrt(std::max(0.0, p.p1))),
          p.alpha, p.beta, p.gamma, p.delta, a[0], a[1], a[2], a[3]};
}

struct FamilyPoint {
  double value = 0.0;
  double det = 0.0;
};

FamilyPoint evaluate_family(const std::array<double, 10>& full, const BellExpression& bi) {
  const DensityMatrix rho = build_family_state(to_parameters(full));
  FamilyPoint out;
  out.value = quantum_value(rho, bi, bi_settings(0.0, full[6], full[7], full[8], full[9]));
  out.det = det_partial_transpose(reduce(rho, {1, 2}));
  return out;
}

}  // namespace

FamilySearchResult optimize_family(const FamilySearchConfig& config) {
  const BellExpression bi = builtin_expression("BI");
  const FamilyLayout layout{config.freeze_psi_plus, config.force_p1_zero};
  double kappa = config.kappa;
  const Objective f = [&](const std::vector<double>& x) {
    const FamilyPoint pt = evaluate_family(layout.unpack(x), bi);
    const double violation = std::max(0.0, -pt.det);
    return config.penalty ? pt.value - kappa * violation * violation : pt.value;
  };

  std::vector<std::vector<double>> starts;
  if (config.initial)
    starts.push_back(layout.pack(from_parameters(
        *config.initial, config.initial_angles.value_or(std::array<double, 4>{}))));
  std::mt19937_64 rng(config.nelder_mead.seed);
  std::uniform_real_distribution<double> quarter(0.0, std::numbers::pi / 2);
  std::uniform_real_distribution<double> circle(-std::numbers::pi, std::numbers::pi);
  for (int r = 0; r < config.nelder_mead.restarts; ++r) {
    std::array<double, 10> full{};
    for (int i = 0; i < 6; ++i) full[i] = quarter(rng);
    for (int i = 6; i < 10; ++i) full[i] = circle(rng);
    starts.push_back(layout.pack(full));
  }
  if (starts.empty()) throw DimensionMismatch("no starting point: zero restarts and no initial point");

  NelderMeadResult best;
  bool have = false;
  for (auto& s : starts) {
    NelderMeadResult r = nelder_mead(f, std::move(s), config.nelder_mead);
    if (!have || r.value > best.value) {
      best = std::move(r);
      have = true;
    }
  }
  FamilyPoint pt = evaluate_family(layout.unpack(best.point), bi);
  while (config.penalty && pt.det < -1e-9 && kappa < 1e18) {
    kappa *= 10.0;
    best = nelder_mead(f, best.point, config.nelder_mead);
    pt = evaluate_family(layout.unpack(best.point), bi);
  }

  const auto full = layout.unpack(best.point);
  FamilySearchResult out;
  out.parameters = to_parameters(full);
  out.angles = {full[6], full[7], full[8], full[9]};
  out.settings = bi_settings(0.0, full[6], full[7], full[8], full[9]);
  out.value = pt.value;
  out.determinant = pt.det;
  out.final_kappa = kappa;
  return out;
}

}  // namespace margcert
