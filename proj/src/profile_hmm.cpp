#include "seqhmm/profile_hmm.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "seqhmm/error.hpp"
#include "seqhmm/hmm.hpp"

namespace seqhmm {

namespace {

constexpr std::array<ProfileState, 3> kStates{kMatch, kInsert, kDelete};
constexpr std::array<ProfileTarget, 3> kTargets{kToMatch, kToInsert, kToDelete};

struct ProbSpace {
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double lift(double p) { return p; }
  static double mul(double a, double b) { return a * b; }
  static double add(double a, double b) { return a + b; }
  // value / total as a plain probability.
  static double ratio(double value, double total) { return value / total; }
};

struct LogSpace {
  static double zero() { return -std::numeric_limits<double>::infinity(); }
  static double one() { return 0.0; }
  static double lift(double p) { return p > 0.0 ? std::log(p) : zero(); }
  static double mul(double a, double b) { return a + b; }
  static double add(double a, double b) {
    if (a == zero()) return b;
    if (b == zero()) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
  }
  static double ratio(double value, double total) { return std::exp(value - total); }
};

void check_sequence(const ProfileHmm& p, std::span<const int> x) {
  for (int s : x)
    if (s < 0 || static_cast<std::size_t>(s) >= p.alphabet_size())
      throw std::invalid_argument("symbol index " + std::to_string(s) + " outside the alphabet");
}

Matrix& table(ProfileDp& dp, bool fwd, ProfileState s) {
  if (fwd) return s == kMatch ? dp.fM : s == kInsert ? dp.fI : dp.fD;
  return s == kMatch ? dp.bM : s == kInsert ? dp.bI : dp.bD;
}

const Matrix& table(const ProfileDp& dp, bool fwd, ProfileState s) {
  return table(const_cast<ProfileDp&>(dp), fwd, s);
}

template <class S>
void run_forward(const ProfileHmm& p, std::span<const int> x, ProfileDp& dp) {
  const auto L = p.length();
  const auto m = x.size();
  dp.fM = Matrix(m + 1, L + 1, S::zero());
  dp.fI = Matrix(m + 1, L + 1, S::zero());
  dp.fD = Matrix(m + 1, L + 1, S::zero());
  dp.fM(0, 0) = S::one();

  auto incoming = [&](std::size_t i, std::size_t from_col, ProfileTarget to) {
    double sum = S::zero();
    for (auto s : kStates)
      sum = S::add(sum, S::mul(table(dp, true, s)(i, from_col), S::lift(p.trans(from_col, s, to))));
    return sum;
  };

  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= L; ++j) {
      if (i >= 1 && j >= 1)
        dp.fM(i, j) = S::mul(S::lift(p.match_emission(j, x[i - 1])), incoming(i - 1, j - 1, kToMatch));
      if (i >= 1)
        dp.fI(i, j) = S::mul(S::lift(p.insert_emission(j, x[i - 1])), incoming(i - 1, j, kToInsert));
      if (j >= 1) dp.fD(i, j) = incoming(i, j - 1, kToDelete);
    }
  }
  dp.total = incoming(m, L, kToMatch);
}

template <class S>
void run_backward(const ProfileHmm& p, std::span<const int> x, ProfileDp& dp) {
  const auto L = p.length();
  const auto m = x.size();
  dp.bM = Matrix(m + 1, L + 1, S::zero());
  dp.bI = Matrix(m + 1, L + 1, S::zero());
  dp.bD = Matrix(m + 1, L + 1, S::zero());

  for (std::size_t i = m + 1; i-- > 0;) {
    for (std::size_t j = L + 1; j-- > 0;) {
      for (auto s : kStates) {
        double v = S::zero();
        if (i < m && j < L)
          v = S::add(v, S::mul(dp.bM(i + 1, j + 1),
                               S::mul(S::lift(p.trans(j, s, kToMatch)),
                                      S::lift(p.match_emission(j + 1, x[i])))));
        if (i < m)
          v = S::add(v, S::mul(dp.bI(i + 1, j), S::mul(S::lift(p.trans(j, s, kToInsert)),
                                                      S::lift(p.insert_emission(j, x[i])))));
        if (j < L) v = S::add(v, S::mul(dp.bD(i, j + 1), S::lift(p.trans(j, s, kToDelete))));
        if (i == m && j == L) v = S::add(v, S::lift(p.trans(L, s, kToMatch)));
        table(dp, false, s)(i, j) = v;
      }
    }
  }
  dp.total = dp.bM(0, 0);
}

template <class S>
ExpectedCounts counts_impl(const ProfileHmm& p, std::span<const int> x, const ProfileDp& dp) {
  const auto L = p.length();
  const auto m = x.size();
  const auto K = p.alphabet_size();
  const double total = dp.total;

  ExpectedCounts c;
  c.match_emit = Matrix(L, K, 0.0);
  c.insert_emit = Matrix(L + 1, K, 0.0);
  c.trans.assign(L + 1, ColumnTransitions{});

  for (std::size_t i = 1; i <= m; ++i) {
    const auto a = static_cast<std::size_t>(x[i - 1]);
    for (std::size_t k = 1; k <= L; ++k)
      c.match_emit(k - 1, a) += S::ratio(S::mul(dp.fM(i, k), dp.bM(i, k)), total);
    for (std::size_t k = 0; k <= L; ++k)
      c.insert_emit(k, a) += S::ratio(S::mul(dp.fI(i, k), dp.bI(i, k)), total);
  }

  for (std::size_t k = 0; k <= L; ++k) {
    for (auto s : kStates) {
      if (!ProfileHmm::state_exists(k, s)) continue;
      const auto& f = table(dp, true, s);
      auto& out = c.trans[k][s];
      for (std::size_t i = 0; i <= m; ++i) {
        if (i < m && k < L)
          out[kToMatch] += S::ratio(
              S::mul(S::mul(f(i, k), S::lift(p.trans(k, s, kToMatch))),
                     S::mul(S::lift(p.match_emission(k + 1, x[i])), dp.bM(i + 1, k + 1))),
              total);
        if (i < m)
          out[kToInsert] += S::ratio(
              S::mul(S::mul(f(i, k), S::lift(p.trans(k, s, kToInsert))),
                     S::mul(S::lift(p.insert_emission(k, x[i])), dp.bI(i + 1, k))),
              total);
        if (k < L)
          out[kToDelete] +=
              S::ratio(S::mul(S::mul(f(i, k), S::lift(p.trans(k, s, kToDelete))), dp.bD(i, k + 1)),
                       total);
      }
      if (k == L) out[kToMatch] += S::ratio(S::mul(f(m, L), S::lift(p.trans(L, s, kToMatch))), total);
    }
  }
  return c;
}

bool is_zero_total(const ProfileDp& dp) {
  return dp.domain == DpDomain::Log ? std::isinf(dp.total) && dp.total < 0 : dp.total <= 0.0;
}

nlohmann::json rows_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix rows_from_json(const nlohmann::json& rows) {
  const auto n = rows.size();
  const auto k = n ? rows[0].size() : 0;
  Matrix m(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != k) throw InvalidModel("ragged emission matrix");
    for (std::size_t c = 0; c < k; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

// Normalizes `row`; returns false and fills uniform when the mass is zero.
template <class Range>
bool normalize_or_uniform(Range& row, const std::vector<bool>& allowed) {
  double sum = 0.0;
  std::size_t n_allowed = 0;
  for (std::size_t k = 0; k < row.size(); ++k)
    if (allowed[k]) {
      sum += row[k];
      ++n_allowed;
    }
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!allowed[k])
      row[k] = 0.0;
    else
      row[k] = sum > 0.0 ? row[k] / sum : 1.0 / static_cast<double>(n_allowed);
  }
  return sum > 0.0;
}

}  // namespace

ProfileHmm::ProfileHmm(Matrix match_emit, Matrix insert_emit,
                       std::vector<ColumnTransitions> transitions)
    : match_emit_(std::move(match_emit)),
      insert_emit_(std::move(insert_emit)),
      transitions_(std::move(transitions)) {
  const auto L = match_emit_.rows();
  const auto K = match_emit_.cols();
  if (L < 1 || K < 1) throw InvalidModel("profile needs L >= 1 and a non-empty alphabet");
  if (insert_emit_.rows() != L + 1 || insert_emit_.cols() != K)
    throw InvalidModel("insert emissions must be (L+1) x K");
  if (transitions_.size() != L + 1) throw InvalidModel("transitions must cover columns 0..L");

  auto check_row = [](std::span<const double> row, const std::string& what) {
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidModel(what + " has an invalid entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance)
      throw InvalidModel(what + " sums to " + std::to_string(sum));
  };
  for (std::size_t r = 0; r < L; ++r) check_row(match_emit_.row(r), "match emission " + std::to_string(r + 1));
  for (std::size_t r = 0; r <= L; ++r) check_row(insert_emit_.row(r), "insert emission " + std::to_string(r));
  for (std::size_t j = 0; j <= L; ++j) {
    for (auto s : kStates) {
      const auto& bundle = transitions_[j][s];
      const std::string what = "column " + std::to_string(j) + " state " + "MID"[s] + " transitions";
      if (!state_exists(j, s)) {
        for (double v : bundle)
          if (v != 0.0) throw InvalidModel(what + " must be zero (state absent)");
        continue;
      }
      if (!target_allowed(j, kToDelete) && bundle[kToDelete] != 0.0)
        throw InvalidModel(what + ": last column cannot enter a delete state");
      check_row(bundle, what);
    }
  }
}

nlohmann::json to_json(const ProfileHmm& profile, const std::string& alphabet_name) {
  const auto L = profile.length();
  auto cols = nlohmann::json::array();
  for (const auto& col : profile.transitions())
    cols.push_back({{"M", col[kMatch]}, {"I", col[kInsert]}, {"D", col[kDelete]}});
  return {{"length", L},
          {"alphabet", alphabet_name},
          {"alphabet_size", profile.alphabet_size()},
          {"match_emit", rows_json(profile.match_emit())},
          {"insert_emit", rows_json(profile.insert_emit())},
          {"transitions", cols},
          {"begin", profile.transitions()[0][kMatch]},
          {"end",
           {profile.trans(L, kMatch, kToMatch), profile.trans(L, kInsert, kToMatch),
            profile.trans(L, kDelete, kToMatch)}}};
}

ProfileHmm profile_from_json(const nlohmann::json& j) {
  std::vector<ColumnTransitions> cols;
  for (const auto& c : j.at("transitions")) {
    ColumnTransitions ct{};
    ct[kMatch] = c.at("M").get<TransitionBundle>();
    ct[kInsert] = c.at("I").get<TransitionBundle>();
    ct[kDelete] = c.at("D").get<TransitionBundle>();
    cols.push_back(ct);
  }
  ProfileHmm p(rows_from_json(j.at("match_emit")), rows_from_json(j.at("insert_emit")), std::move(cols));
  if (j.contains("length") && j["length"].get<std::size_t>() != p.length())
    throw InvalidModel("profile length field disagrees with match emissions");
  return p;
}

ProfileHmm random_profile(std::size_t length, std::size_t alphabet_size, std::uint64_t seed,
                          double match_bias) {
  if (length < 1 || alphabet_size < 1) throw std::invalid_argument("L and K must be >= 1");
  std::mt19937_64 rng(seed);
  auto draw = [&] { return 1.0 - unit_uniform(rng); };
  Matrix me(length, alphabet_size), ie(length + 1, alphabet_size);
  auto fill = [&](Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double s = 0.0;
      for (auto& v : m.row(r)) s += (v = draw());
      for (auto& v : m.row(r)) v /= s;
    }
  };
  fill(me);
  fill(ie);
  std::vector<ColumnTransitions> cols(length + 1, ColumnTransitions{});
  for (std::size_t j = 0; j <= length; ++j) {
    for (auto s : kStates) {
      if (!ProfileHmm::state_exists(j, s)) continue;
      auto& b = cols[j][s];
      double sum = 0.0;
      for (auto t : kTargets) {
        if (j == length && t == kToDelete) continue;
        b[t] = draw() * (t == kToMatch ? match_bias : 1.0);
        sum += b[t];
      }
      for (auto& v : b) v /= sum;
    }
  }
  return ProfileHmm(std::move(me), std::move(ie), std::move(cols));
}

ProfileDp profile_forward(const ProfileHmm& profile, std::span<const int> x, DpDomain domain) {
  check_sequence(profile, x);
  ProfileDp dp;
  dp.domain = domain;
  if (domain == DpDomain::Log)
    run_forward<LogSpace>(profile, x, dp);
  else
    run_forward<ProbSpace>(profile, x, dp);
  return dp;
}

ProfileDp profile_backward(const ProfileHmm& profile, std::span<const int> x, DpDomain domain) {
  check_sequence(profile, x);
  ProfileDp dp;
  dp.domain = domain;
  if (domain == DpDomain::Log)
    run_backward<LogSpace>(profile, x, dp);
  else
    run_backward<ProbSpace>(profile, x, dp);
  return dp;
}

ProfileDp profile_forward_backward(const ProfileHmm& profile, std::span<const int> x,
                                   DpDomain domain) {
  auto dp = profile_forward(profile, x, domain);
  auto back = profile_backward(profile, x, domain);
  dp.bM = std::move(back.bM);
  dp.bI = std::move(back.bI);
  dp.bD = std::move(back.bD);
  return dp;
}

double profile_reconstruction(const ProfileDp& dp, std::size_t i) {
  if (dp.domain != DpDomain::Probability)
    throw std::invalid_argument("reconstruction needs probability-domain tables");
  if (i == 0) return dp.fM(0, 0) * dp.bM(0, 0);
  double sum = 0.0;
  for (std::size_t j = 0; j < dp.fM.cols(); ++j) sum += dp.fM(i, j) * dp.bM(i, j) + dp.fI(i, j) * dp.bI(i, j);
  return sum;
}

double profile_log_prob(const ProfileHmm& profile, std::span<const int> x) {
  return profile_forward(profile, x, DpDomain::Log).total;
}

ExpectedCounts profile_expected_counts(const ProfileHmm& profile, std::span<const int> x,
                                       DpDomain domain) {
  const auto dp = profile_forward_backward(profile, x, domain);
  if (is_zero_total(dp)) throw ZeroSequenceProbability();
  return domain == DpDomain::Log ? counts_impl<LogSpace>(profile, x, dp)
                                 : counts_impl<ProbSpace>(profile, x, dp);
}

ProfileEmReport profile_baum_welch(const ProfileHmm& init,
                                   const std::vector<std::vector<int>>& sequences,
                                   const ProfileEmOptions& options) {
  if (sequences.empty()) throw EmptyTrainingSet();
  if (options.pseudocount < 0.0) throw std::invalid_argument("pseudocount must be >= 0");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  const auto L = init.length();
  const auto K = init.alphabet_size();

  ProfileEmReport report{init, {}, 0, false, {}};
  std::set<std::string> seen;
  auto warn = [&](std::string w) {
    if (seen.insert(w).second) report.warnings.push_back(std::move(w));
  };
  double previous = 0.0;

  while (report.iterations < options.max_iter && !report.converged) {
    const auto& model = report.model;
    Matrix me(L, K, 0.0), ie(L + 1, K, 0.0);
    std::vector<ColumnTransitions> tr(L + 1, ColumnTransitions{});
    double loglik = 0.0;

    for (const auto& x : sequences) {
      const auto dp = profile_forward_backward(model, x, options.domain);
      if (is_zero_total(dp)) throw ZeroSequenceProbability();
      loglik += options.domain == DpDomain::Log ? dp.total : std::log(dp.total);
      const auto c = options.domain == DpDomain::Log ? counts_impl<LogSpace>(model, x, dp)
                                                     : counts_impl<ProbSpace>(model, x, dp);
      for (std::size_t r = 0; r < L; ++r)
        for (std::size_t a = 0; a < K; ++a) me(r, a) += c.match_emit(r, a);
      for (std::size_t r = 0; r <= L; ++r)
        for (std::size_t a = 0; a < K; ++a) ie(r, a) += c.insert_emit(r, a);
      for (std::size_t k = 0; k <= L; ++k)
        for (auto s : kStates)
          for (auto t : kTargets) tr[k][s][t] += c.trans[k][s][t];
    }

    const std::vector<bool> all_symbols(K, true);
    auto finish_rows = [&](Matrix& m, const char* kind, std::size_t first_column) {
      for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (auto& v : row) v += options.pseudocount;
        if (!normalize_or_uniform(row, all_symbols))
          warn(std::string(kind) + " emissions of column " + std::to_string(r + first_column) +
               " have zero mass; reset to uniform");
      }
    };
    finish_rows(me, "match", 1);
    finish_rows(ie, "insert", 0);
    for (std::size_t k = 0; k <= L; ++k) {
      for (auto s : kStates) {
        auto& bundle = tr[k][s];
        if (!ProfileHmm::state_exists(k, s)) {
          bundle = {0.0, 0.0, 0.0};
          continue;
        }
        const std::vector<bool> allowed{true, true, model.target_allowed(k, kToDelete)};
        for (auto t : kTargets)
          if (allowed[t]) bundle[t] += options.pseudocount;
        if (!normalize_or_uniform(bundle, allowed))
          warn("column " + std::to_string(k) + " state " + std::string(1, "MID"[s]) +
               " has zero transition mass; reset to uniform");
      }
    }
    report.model = ProfileHmm(std::move(me), std::move(ie), std::move(tr));

    ++report.iterations;
    report.loglik_trace.push_back(loglik);
    if (report.iterations > 1)
      report.converged = std::abs(loglik - previous) / (1.0 + std::abs(loglik)) < options.thresh;
    previous = loglik;
  }
  return report;
}

}  // namespace seqhmm
