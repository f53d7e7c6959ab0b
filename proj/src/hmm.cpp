#include "seqhmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "seqhmm/error.hpp"

namespace seqhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_distribution(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidModel(what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance)
    throw InvalidModel(what + " sums to " + std::to_string(sum));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_obs(const DiscreteHmm& model, std::span<const int> obs) {
  if (obs.empty()) throw std::invalid_argument("observation sequence is empty");
  for (int o : obs)
    if (o < 0 || static_cast<std::size_t>(o) >= model.n_symbols())
      throw std::invalid_argument("observation index " + std::to_string(o) + " out of range");
}

// Normalizes in place; returns the pre-normalization sum.
double normalize(std::span<double> v) {
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum > 0.0)
    for (double& x : v) x /= sum;
  return sum;
}

void fill_uniform(std::span<double> v) {
  std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
}

std::vector<double> to_vector(const nlohmann::json& j) { return j.get<std::vector<double>>(); }

Matrix matrix_from_rows(const nlohmann::json& rows, std::size_t n_rows, std::size_t n_cols) {
  if (rows.size() != n_rows) throw InvalidModel("matrix row count mismatch");
  Matrix m(n_rows, n_cols);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (rows[r].size() != n_cols) throw InvalidModel("matrix column count mismatch");
    for (std::size_t c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

nlohmann::json matrix_rows(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

}  // namespace

DiscreteHmm::DiscreteHmm(std::vector<double> pi, Matrix trans, Matrix emit,
                         std::vector<std::string> state_labels,
                         std::vector<std::string> symbol_labels)
    : pi_(std::move(pi)),
      trans_(std::move(trans)),
      emit_(std::move(emit)),
      state_labels_(std::move(state_labels)),
      symbol_labels_(std::move(symbol_labels)) {
  const auto n = pi_.size();
  if (n == 0) throw InvalidModel("model needs at least one state");
  if (trans_.rows() != n || trans_.cols() != n) throw InvalidModel("transition matrix must be N x N");
  if (emit_.rows() != n || emit_.cols() == 0) throw InvalidModel("emission matrix must be N x M, M >= 1");
  if (!state_labels_.empty() && state_labels_.size() != n) throw InvalidModel("state label count");
  if (!symbol_labels_.empty() && symbol_labels_.size() != emit_.cols())
    throw InvalidModel("symbol label count");
  check_distribution(pi_, "pi");
  for (std::size_t i = 0; i < n; ++i) {
    check_distribution(trans_.row(i), "trans row " + std::to_string(i));
    check_distribution(emit_.row(i), "emit row " + std::to_string(i));
  }
}

nlohmann::json to_json(const DiscreteHmm& model) {
  nlohmann::json j{{"n_states", model.n_states()},
                   {"n_symbols", model.n_symbols()},
                   {"pi", std::vector<double>(model.pi().begin(), model.pi().end())},
                   {"trans", matrix_rows(model.trans())},
                   {"emit", matrix_rows(model.emit())}};
  if (!model.state_labels().empty()) j["state_labels"] = model.state_labels();
  if (!model.symbol_labels().empty()) j["symbol_labels"] = model.symbol_labels();
  return j;
}

DiscreteHmm hmm_from_json(const nlohmann::json& j) {
  const auto n = j.at("n_states").get<std::size_t>();
  const auto m = j.at("n_symbols").get<std::size_t>();
  std::vector<std::string> sl, ol;
  if (j.contains("state_labels")) sl = j["state_labels"].get<std::vector<std::string>>();
  if (j.contains("symbol_labels")) ol = j["symbol_labels"].get<std::vector<std::string>>();
  return DiscreteHmm(to_vector(j.at("pi")), matrix_from_rows(j.at("trans"), n, n),
                     matrix_from_rows(j.at("emit"), n, m), std::move(sl), std::move(ol));
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_discrete(std::span<const double> weights, std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = unit_uniform(rng) * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last_positive = i;
    if (u < cum) return i;
  }
  return last_positive;
}

SampledData sample(const DiscreteHmm& model, std::size_t length, std::size_t n_sequences,
                   std::uint64_t seed) {
  if (length < 1 || n_sequences < 1) throw std::invalid_argument("length and count must be >= 1");
  std::mt19937_64 rng(seed);
  SampledData out;
  out.hidden.reserve(n_sequences);
  out.observed.reserve(n_sequences);
  for (std::size_t s = 0; s < n_sequences; ++s) {
    std::vector<int> q(length);
    Observations o(length);
    std::size_t state = sample_discrete(model.pi(), rng);
    for (std::size_t t = 0; t < length; ++t) {
      if (t > 0) state = sample_discrete(model.trans().row(state), rng);
      q[t] = static_cast<int>(state);
      o[t] = static_cast<int>(sample_discrete(model.emit().row(state), rng));
    }
    out.hidden.push_back(std::move(q));
    out.observed.push_back(std::move(o));
  }
  return out;
}

PosteriorTable forward(const DiscreteHmm& model, std::span<const int> obs, Scaling scaling) {
  check_obs(model, obs);
  const auto n = model.n_states();
  const auto T = obs.size();
  const auto& A = model.trans();
  const auto& B = model.emit();

  PosteriorTable table;
  table.scaling = scaling;
  table.alpha = Matrix(T, n);
  table.scale.assign(T, 1.0);

  for (std::size_t t = 0; t < T; ++t) {
    auto row = table.alpha.row(t);
    const auto o = static_cast<std::size_t>(obs[t]);
    for (std::size_t j = 0; j < n; ++j) {
      double m = 0.0;
      if (t == 0) {
        m = model.pi()[j];
      } else {
        for (std::size_t i = 0; i < n; ++i) m += table.alpha(t - 1, i) * A(i, j);
      }
      row[j] = m * B(j, o);
    }
    double mass = std::accumulate(row.begin(), row.end(), 0.0);
    if (mass == 0.0) {
      table.zero_at = t;
      table.loglik = kNegInf;
      return table;
    }
    if (scaling == Scaling::Scaled) table.scale[t] = normalize(row);
  }

  if (scaling == Scaling::Scaled) {
    double ll = 0.0;
    for (double c : table.scale) ll += std::log(c);
    table.loglik = ll;
  } else {
    auto last = table.alpha.row(T - 1);
    table.loglik = std::log(std::accumulate(last.begin(), last.end(), 0.0));
  }
  return table;
}

Matrix backward(const DiscreteHmm& model, std::span<const int> obs, std::span<const double> scale) {
  check_obs(model, obs);
  const auto n = model.n_states();
  const auto T = obs.size();
  if (!scale.empty() && scale.size() != T) throw std::invalid_argument("scale length must equal T");
  const auto& A = model.trans();
  const auto& B = model.emit();

  Matrix beta(T, n);
  for (std::size_t i = 0; i < n; ++i) beta(T - 1, i) = 1.0;
  std::vector<double> b(n);
  for (std::size_t t = T - 1; t-- > 0;) {
    const auto o = static_cast<std::size_t>(obs[t + 1]);
    for (std::size_t j = 0; j < n; ++j) b[j] = B(j, o) * beta(t + 1, j);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += A(i, j) * b[j];
      beta(t, i) = scale.empty() ? s : s / scale[t + 1];
    }
  }
  return beta;
}

PosteriorTable posterior(const DiscreteHmm& model, std::span<const int> obs) {
  auto table = forward(model, obs, Scaling::Scaled);
  if (table.zero_at) throw ZeroProbabilityObservation(*table.zero_at);
  table.beta = backward(model, obs, table.scale);
  const auto T = obs.size();
  const auto n = model.n_states();
  table.gamma = Matrix(T, n);
  for (std::size_t t = 0; t < T; ++t) {
    auto g = table.gamma.row(t);
    for (std::size_t i = 0; i < n; ++i) g[i] = table.alpha(t, i) * table.beta(t, i);
    normalize(g);
  }
  return table;
}

std::vector<int> decode_posterior(const DiscreteHmm& model, std::span<const int> obs) {
  const auto table = posterior(model, obs);
  std::vector<int> path(obs.size());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    auto g = table.gamma.row(t);
    path[t] = static_cast<int>(std::max_element(g.begin(), g.end()) - g.begin());
  }
  return path;
}

ViterbiResult viterbi(const DiscreteHmm& model, std::span<const int> obs) {
  check_obs(model, obs);
  const auto n = model.n_states();
  const auto T = obs.size();
  const auto logA = [&](std::size_t i, std::size_t j) { return safe_log(model.trans()(i, j)); };
  const auto logB = [&](std::size_t j, std::size_t t) {
    return safe_log(model.emit()(j, static_cast<std::size_t>(obs[t])));
  };

  ViterbiResult result;
  Matrix delta(T, n, kNegInf);
  result.backpointers = Matrix(T, n);
  for (std::size_t i = 0; i < n; ++i) delta(0, i) = safe_log(model.pi()[i]) + logB(i, 0);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double v = delta(t - 1, i) + logA(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta(t, j) = best + logB(j, t);
      result.backpointers(t, j) = static_cast<double>(arg);
    }
  }
  auto last = delta.row(T - 1);
  result.log_prob = *std::max_element(last.begin(), last.end());
  if (result.log_prob == kNegInf) throw AllPathsZero();

  // Best completion score from each (t, i); used to walk forward and pick the
  // lexicographically smallest co-optimal path.
  Matrix completion(T, n, 0.0);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = kNegInf;
      for (std::size_t j = 0; j < n; ++j)
        best = std::max(best, logA(i, j) + logB(j, t + 1) + completion(t + 1, j));
      completion(t, i) = best;
    }
  }

  const double target = result.log_prob - 1e-12 * std::max(1.0, std::abs(result.log_prob));
  result.path.resize(T);
  double prefix = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t chosen = n;
    std::size_t fallback = 0;
    double fallback_score = kNegInf;
    double chosen_step = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double step = t == 0 ? safe_log(model.pi()[j]) + logB(j, 0)
                           : logA(static_cast<std::size_t>(result.path[t - 1]), j) + logB(j, t);
      double score = prefix + step + completion(t, j);
      if (score >= target) {
        chosen = j;
        chosen_step = step;
        break;
      }
      if (score > fallback_score) {
        fallback_score = score;
        fallback = j;
        chosen_step = step;
      }
    }
    if (chosen == n) chosen = fallback;
    result.path[t] = static_cast<int>(chosen);
    prefix += chosen_step;
  }
  return result;
}

double path_log_prob(const DiscreteHmm& model, std::span<const int> path, std::span<const int> obs) {
  if (path.size() != obs.size()) throw std::invalid_argument("path and observation lengths differ");
  double lp = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    const auto q = static_cast<std::size_t>(path[t]);
    lp += t == 0 ? safe_log(model.pi()[q])
                 : safe_log(model.trans()(static_cast<std::size_t>(path[t - 1]), q));
    lp += safe_log(model.emit()(q, static_cast<std::size_t>(obs[t])));
  }
  return lp;
}

double brute_force_prob(const DiscreteHmm& model, std::span<const int> obs) {
  check_obs(model, obs);
  const auto n = model.n_states();
  const auto T = obs.size();
  double paths = std::pow(static_cast<double>(n), static_cast<double>(T));
  if (paths > 1e7) throw InstanceTooLarge("brute force needs " + std::to_string(paths) + " paths");

  std::vector<std::size_t> q(T, 0);
  double total = 0.0;
  while (true) {
    double p = model.pi()[q[0]] * model.emit()(q[0], static_cast<std::size_t>(obs[0]));
    for (std::size_t t = 1; t < T && p > 0.0; ++t)
      p *= model.trans()(q[t - 1], q[t]) * model.emit()(q[t], static_cast<std::size_t>(obs[t]));
    total += p;
    std::size_t t = T;
    while (t > 0 && ++q[t - 1] == n) q[--t] = 0;
    if (t == 0) break;
  }
  return total;
}

EmReport baum_welch(const DiscreteHmm& init, const std::vector<Observations>& data,
                    const EmOptions& options) {
  if (data.empty()) throw EmptyTrainingSet();
  if (options.pseudocount < 0.0) throw std::invalid_argument("pseudocount must be >= 0");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  const auto n = init.n_states();
  const auto m = init.n_symbols();

  EmReport report{{}, 0, false, init, {}};
  std::set<std::string> seen_warnings;
  double previous = kNegInf;

  while (report.iterations < options.max_iter && !report.converged) {
    const auto& model = report.final_model;
    std::vector<double> visits1(n, 0.0);
    Matrix trans_counts(n, n, 0.0);
    Matrix emit_counts(n, m, options.pseudocount);
    std::vector<double> visit_mass(n, 0.0);
    double loglik = 0.0;

    // E-step: accumulate in fixed sequence order.
    for (const auto& obs : data) {
      const auto table = posterior(model, obs);
      loglik += table.loglik;
      const auto T = obs.size();
      for (std::size_t i = 0; i < n; ++i) visits1[i] += table.gamma(0, i);
      for (std::size_t t = 0; t < T; ++t) {
        const auto o = static_cast<std::size_t>(obs[t]);
        for (std::size_t i = 0; i < n; ++i) {
          emit_counts(i, o) += table.gamma(t, i);
          visit_mass[i] += table.gamma(t, i);
        }
      }
      for (std::size_t t = 0; t + 1 < T; ++t) {
        const auto o = static_cast<std::size_t>(obs[t + 1]);
        const double inv_c = 1.0 / table.scale[t + 1];
        for (std::size_t i = 0; i < n; ++i) {
          const double a = table.alpha(t, i) * inv_c;
          if (a == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j)
            trans_counts(i, j) += a * model.trans()(i, j) * model.emit()(j, o) * table.beta(t + 1, j);
        }
      }
    }

    // M-step.
    normalize(visits1);
    for (std::size_t i = 0; i < n; ++i) {
      if (visit_mass[i] == 0.0) {
        std::string w = "state " + std::to_string(i) + " has zero expected visits; rows reset to uniform";
        if (seen_warnings.insert(w).second) report.warnings.push_back(w);
      }
      if (normalize(trans_counts.row(i)) == 0.0) fill_uniform(trans_counts.row(i));
      if (normalize(emit_counts.row(i)) == 0.0) fill_uniform(emit_counts.row(i));
    }
    report.final_model = DiscreteHmm(std::move(visits1), std::move(trans_counts),
                                     std::move(emit_counts), model.state_labels(),
                                     model.symbol_labels());

    ++report.iterations;
    report.loglik_trace.push_back(loglik);
    if (report.iterations > 1)
      report.converged = std::abs(loglik - previous) / (1.0 + std::abs(loglik)) < options.thresh;
    previous = loglik;
  }
  return report;
}

nlohmann::json to_json(const EmReport& report) {
  return {{"loglik_trace", report.loglik_trace},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"warnings", report.warnings},
          {"final_model", to_json(report.final_model)}};
}

DiscreteHmm init_model(std::size_t n_states, std::size_t n_symbols, InitScheme scheme,
                       std::uint64_t seed, double dominance) {
  if (n_states < 1 || n_symbols < 1) throw std::invalid_argument("N and M must be >= 1");
  if (scheme == InitScheme::Diagonal && !(dominance > 0.0 && dominance < 1.0))
    throw std::invalid_argument("dominance must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  auto random_row = [&](std::span<double> row) {
    for (double& v : row) v = 1.0 - unit_uniform(rng);  // (0, 1]
    normalize(row);
  };

  std::vector<double> pi(n_states);
  random_row(pi);
  Matrix trans(n_states, n_states);
  if (scheme == InitScheme::Random) {
    for (std::size_t i = 0; i < n_states; ++i) random_row(trans.row(i));
  } else if (n_states == 1) {
    trans(0, 0) = 1.0;
  } else {
    const double off = (1.0 - dominance) / static_cast<double>(n_states - 1);
    for (std::size_t i = 0; i < n_states; ++i)
      for (std::size_t j = 0; j < n_states; ++j) trans(i, j) = i == j ? dominance : off;
  }
  Matrix emit(n_states, n_symbols);
  for (std::size_t i = 0; i < n_states; ++i) random_row(emit.row(i));
  return DiscreteHmm(std::move(pi), std::move(trans), std::move(emit));
}

}  // namespace seqhmm
