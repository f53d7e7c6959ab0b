#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqhmm/matrix.hpp"

namespace seqhmm {

// Profile HMM with L match columns.
//
// Topology: column 0 holds the silent begin state (stored in the Match slot)
// and insert state I_0; columns 1..L hold M_j, I_j, D_j. Every state X_j has
// an outgoing bundle over three targets:
//   kToMatch  -> M_{j+1}   (the end state when j == L)
//   kToInsert -> I_j
//   kToDelete -> D_{j+1}   (absent when j == L)
// D_0 does not exist; its bundle is all zero.
enum ProfileState : std::size_t { kMatch = 0, kInsert = 1, kDelete = 2 };
enum ProfileTarget : std::size_t { kToMatch = 0, kToInsert = 1, kToDelete = 2 };

using TransitionBundle = std::array<double, 3>;
using ColumnTransitions = std::array<TransitionBundle, 3>;  // indexed by ProfileState

class ProfileHmm {
 public:
  // match_emit: L x K (row j-1 is M_j); insert_emit: (L+1) x K (row j is I_j);
  // transitions: L+1 columns. Validates stochasticity to 1e-9.
  ProfileHmm(Matrix match_emit, Matrix insert_emit, std::vector<ColumnTransitions> transitions);

  std::size_t length() const { return match_emit_.rows(); }
  std::size_t alphabet_size() const { return match_emit_.cols(); }
  const Matrix& match_emit() const { return match_emit_; }
  const Matrix& insert_emit() const { return insert_emit_; }
  const std::vector<ColumnTransitions>& transitions() const { return transitions_; }

  double trans(std::size_t column, ProfileState from, ProfileTarget to) const {
    return transitions_[column][from][to];
  }
  // column in 1..L
  double match_emission(std::size_t column, int symbol) const {
    return match_emit_(column - 1, static_cast<std::size_t>(symbol));
  }
  // column in 0..L
  double insert_emission(std::size_t column, int symbol) const {
    return insert_emit_(column, static_cast<std::size_t>(symbol));
  }

  static bool state_exists(std::size_t column, ProfileState s) {
    return !(column == 0 && s == kDelete);
  }
  bool target_allowed(std::size_t column, ProfileTarget t) const {
    return !(column == length() && t == kToDelete);
  }

  friend bool operator==(const ProfileHmm&, const ProfileHmm&) = default;

 private:
  Matrix match_emit_;
  Matrix insert_emit_;
  std::vector<ColumnTransitions> transitions_;
};

nlohmann::json to_json(const ProfileHmm& profile, const std::string& alphabet_name = "");
ProfileHmm profile_from_json(const nlohmann::json& j);

// Random profile: emission rows uniform draws then normalized; transition
// bundles favour the match target by `match_bias` before normalization.
ProfileHmm random_profile(std::size_t length, std::size_t alphabet_size, std::uint64_t seed,
                          double match_bias = 2.0);

enum class DpDomain { Probability, Log };

// Tables are (m+1) x (L+1), row = symbols consumed, column = profile column.
// In the Log domain every entry holds a natural log.
struct ProfileDp {
  DpDomain domain = DpDomain::Probability;
  Matrix fM, fI, fD;
  Matrix bM, bI, bD;
  double total = 0.0;  // P(X), or log P(X) in the Log domain
};

ProfileDp profile_forward(const ProfileHmm& profile, std::span<const int> x,
                          DpDomain domain = DpDomain::Probability);
ProfileDp profile_backward(const ProfileHmm& profile, std::span<const int> x,
                           DpDomain domain = DpDomain::Probability);
// Both halves in one table.
ProfileDp profile_forward_backward(const ProfileHmm& profile, std::span<const int> x,
                                   DpDomain domain = DpDomain::Probability);

// Sum over emitting states at row i of f * b (begin state at i = 0). Every
// path emits x_i from exactly one state, so this equals P(X) for every i.
// Probability-domain tables only.
double profile_reconstruction(const ProfileDp& dp, std::size_t i);

double profile_log_prob(const ProfileHmm& profile, std::span<const int> x);

struct ExpectedCounts {
  Matrix match_emit;    // L x K
  Matrix insert_emit;   // (L+1) x K
  std::vector<ColumnTransitions> trans;  // same layout as ProfileHmm transitions
};

// Posterior expected counts for one sequence. Throws ZeroSequenceProbability.
ExpectedCounts profile_expected_counts(const ProfileHmm& profile, std::span<const int> x,
                                       DpDomain domain = DpDomain::Probability);

struct ProfileEmOptions {
  int max_iter = 15;
  double thresh = 1e-4;
  double pseudocount = 0.0;
  DpDomain domain = DpDomain::Log;
};

struct ProfileEmReport {
  ProfileHmm model;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Baum-Welch over a set of sequences; convergence test as in baum_welch.
// Bundles or emission rows with zero mass are reset to uniform with a warning.
ProfileEmReport profile_baum_welch(const ProfileHmm& init,
                                   const std::vector<std::vector<int>>& sequences,
                                   const ProfileEmOptions& options = {});

}  // namespace seqhmm
