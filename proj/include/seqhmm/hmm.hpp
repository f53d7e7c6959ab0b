#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqhmm/matrix.hpp"

namespace seqhmm {

using Observations = std::vector<int>;

inline constexpr double kStochasticTolerance = 1e-9;

// Discrete-observation HMM (pi, trans, emit). Immutable once built; the
// constructor enforces non-negativity and row-stochasticity to 1e-9.
class DiscreteHmm {
 public:
  DiscreteHmm(std::vector<double> pi, Matrix trans, Matrix emit,
              std::vector<std::string> state_labels = {},
              std::vector<std::string> symbol_labels = {});

  std::size_t n_states() const { return pi_.size(); }
  std::size_t n_symbols() const { return emit_.cols(); }
  std::span<const double> pi() const { return pi_; }
  const Matrix& trans() const { return trans_; }
  const Matrix& emit() const { return emit_; }
  const std::vector<std::string>& state_labels() const { return state_labels_; }
  const std::vector<std::string>& symbol_labels() const { return symbol_labels_; }

  friend bool operator==(const DiscreteHmm&, const DiscreteHmm&) = default;

 private:
  std::vector<double> pi_;
  Matrix trans_;
  Matrix emit_;
  std::vector<std::string> state_labels_;
  std::vector<std::string> symbol_labels_;
};

nlohmann::json to_json(const DiscreteHmm& model);
DiscreteHmm hmm_from_json(const nlohmann::json& j);

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng);
// Draws an index from an unnormalized non-negative weight vector.
std::size_t sample_discrete(std::span<const double> weights, std::mt19937_64& rng);

struct SampledData {
  std::vector<std::vector<int>> hidden;
  std::vector<Observations> observed;
};

SampledData sample(const DiscreteHmm& model, std::size_t length, std::size_t n_sequences,
                   std::uint64_t seed);

enum class Scaling { Scaled, Unscaled };

struct PosteriorTable {
  Matrix alpha;                // T x N
  Matrix beta;                 // T x N, empty until backward runs
  std::vector<double> scale;   // c_t = P(O_t | O_1..O_{t-1}); all 1 when unscaled
  Matrix gamma;                // T x N, empty until posterior runs
  double loglik = 0.0;         // -inf when some prefix has zero probability
  std::optional<std::size_t> zero_at;  // first t with zero forward mass
  Scaling scaling = Scaling::Scaled;
};

// Forward pass. Never throws on zero-probability data: it sets loglik to
// -inf and zero_at to the offending time step, leaving later rows zero.
PosteriorTable forward(const DiscreteHmm& model, std::span<const int> obs,
                       Scaling scaling = Scaling::Scaled);

// Backward pass. Unscaled when `scale` is empty; otherwise beta_t is divided
// by prod_{s>t} scale[s] so that sum_i alpha_hat_t(i) beta_hat_t(i) == 1.
Matrix backward(const DiscreteHmm& model, std::span<const int> obs,
                std::span<const double> scale = {});

// Scaled forward-backward with gamma filled. Throws ZeroProbabilityObservation.
PosteriorTable posterior(const DiscreteHmm& model, std::span<const int> obs);

// Per-position argmax of gamma, lowest index on ties.
std::vector<int> decode_posterior(const DiscreteHmm& model, std::span<const int> obs);

struct ViterbiResult {
  std::vector<int> path;
  double log_prob = 0.0;
  Matrix backpointers;  // T x N, row 0 unused
};

// Most probable hidden path in log space. Among co-optimal paths (scores equal
// to within 1e-12 relative) the lexicographically smallest one is returned.
// Throws AllPathsZero.
ViterbiResult viterbi(const DiscreteHmm& model, std::span<const int> obs);

// log P(Q, O) for a given path; -inf for impossible paths.
double path_log_prob(const DiscreteHmm& model, std::span<const int> path, std::span<const int> obs);

// Exact P(O) by summing over all N^T paths. Throws InstanceTooLarge above 1e7 paths.
double brute_force_prob(const DiscreteHmm& model, std::span<const int> obs);

struct EmOptions {
  int max_iter = 15;
  double thresh = 1e-4;
  double pseudocount = 0.0;  // added to every expected emission count
};

struct EmReport {
  std::vector<double> loglik_trace;  // log-likelihood of the model entering each E-step
  int iterations = 0;
  bool converged = false;
  DiscreteHmm final_model;
  std::vector<std::string> warnings;
};

// Baum-Welch. Stops after max_iter E-steps or once
// |LL_k - LL_{k-1}| / (1 + |LL_k|) < thresh. States with zero expected visit
// mass get uniform rows and a warning.
EmReport baum_welch(const DiscreteHmm& init, const std::vector<Observations>& data,
                    const EmOptions& options = {});

nlohmann::json to_json(const EmReport& report);

enum class InitScheme { Random, Diagonal };

// Random: every row uniform draws then normalized. Diagonal: trans has
// `dominance` on the diagonal, remainder split evenly; pi and emit random.
DiscreteHmm init_model(std::size_t n_states, std::size_t n_symbols, InitScheme scheme,
                       std::uint64_t seed, double dominance = 0.67);

}  // namespace seqhmm
