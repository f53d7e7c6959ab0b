#include "seqhmm/seqstruct.hpp"

#include <numeric>
#include <stdexcept>

#include "seqhmm/error.hpp"

namespace seqhmm {

std::string_view direction_name(Direction d) {
  return d == Direction::StructureHidden ? "model1" : "model2";
}

Direction direction_from_string(std::string_view s) {
  if (s == "model1") return Direction::StructureHidden;
  if (s == "model2") return Direction::SequenceHidden;
  throw ConfigError("unknown direction '" + std::string(s) + "' (expected model1|model2)");
}

const Alphabet& hidden_alphabet(Direction d) {
  return d == Direction::StructureHidden ? structure_alphabet() : residue_alphabet();
}

const Alphabet& observed_alphabet(Direction d) {
  return d == Direction::StructureHidden ? residue_alphabet() : structure_alphabet();
}

const std::string& hidden_string(const LabeledPair& p, Direction d) {
  return d == Direction::StructureHidden ? p.str : p.seq;
}

const std::string& observed_string(const LabeledPair& p, Direction d) {
  return d == Direction::StructureHidden ? p.seq : p.str;
}

std::int64_t CountTable::row_total(std::size_t r) const {
  return std::accumulate(cells.begin() + static_cast<std::ptrdiff_t>(r * cols),
                         cells.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols),
                         std::int64_t{0});
}

namespace {

// (count + pseudo) / (total + width * pseudo), or uniform for an empty row.
void smoothed_row(std::span<double> out, const std::int64_t* counts, double pseudo) {
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) total += static_cast<double>(counts[k]) + pseudo;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = total > 0.0 ? (static_cast<double>(counts[k]) + pseudo) / total
                         : 1.0 / static_cast<double>(out.size());
}

std::vector<std::string> labels_of(const Alphabet& a) {
  std::vector<std::string> out;
  for (char c : a.symbols()) out.emplace_back(1, c);
  return out;
}

}  // namespace

CountingEstimate estimate_by_counting(const std::vector<LabeledPair>& pairs, Direction direction,
                                      double pseudocount) {
  if (pairs.empty()) throw EmptyTrainingSet();
  if (pseudocount < 0.0) throw std::invalid_argument("pseudocount must be >= 0");
  const auto& ha = hidden_alphabet(direction);
  const auto& oa = observed_alphabet(direction);
  const auto n = ha.size();
  const auto m = oa.size();

  std::vector<std::int64_t> first(n, 0);
  CountTable trans(n, n), emit(n, m);
  for (const auto& p : pairs) {
    const auto hidden = sequence_to_index_vector(hidden_string(p, direction), ha);
    const auto observed = sequence_to_index_vector(observed_string(p, direction), oa);
    if (hidden.size() != observed.size() || hidden.empty())
      throw std::invalid_argument("pair " + std::to_string(p.id) + " is not aligned");
    ++first[static_cast<std::size_t>(hidden.front())];
    for (std::size_t t = 0; t < hidden.size(); ++t) {
      ++emit.at(static_cast<std::size_t>(hidden[t]), static_cast<std::size_t>(observed[t]));
      if (t + 1 < hidden.size())
        ++trans.at(static_cast<std::size_t>(hidden[t]), static_cast<std::size_t>(hidden[t + 1]));
    }
  }

  std::vector<double> pi(n);
  smoothed_row(pi, first.data(), pseudocount);
  Matrix a(n, n), b(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    smoothed_row(a.row(i), &trans.cells[i * n], pseudocount);
    smoothed_row(b.row(i), &emit.cells[i * m], pseudocount);
  }

  return CountingEstimate{
      .model = DiscreteHmm(std::move(pi), std::move(a), std::move(b), labels_of(ha), labels_of(oa)),
      .first_counts = std::move(first),
      .first_total = static_cast<std::int64_t>(pairs.size()),
      .trans_counts = std::move(trans),
      .emit_counts = std::move(emit),
      .pseudocount = pseudocount,
  };
}

Decoder decoder_from_string(std::string_view s) {
  if (s == "posterior") return Decoder::Posterior;
  if (s == "viterbi") return Decoder::Viterbi;
  throw ConfigError("unknown decoder '" + std::string(s) + "' (expected posterior|viterbi)");
}

std::string_view decoder_name(Decoder d) { return d == Decoder::Posterior ? "posterior" : "viterbi"; }

std::vector<int> predict_hidden(const DiscreteHmm& model, std::span<const int> observed,
                                Decoder decoder) {
  if (decoder == Decoder::Viterbi) return viterbi(model, observed).path;
  return decode_posterior(model, observed);
}

ClassMode class_mode_from_string(std::string_view s) {
  if (s == "8" || s == "eight") return ClassMode::Eight;
  if (s == "3" || s == "three") return ClassMode::Three;
  throw ConfigError("unknown class mode '" + std::string(s) + "' (expected 8|3)");
}

double q3_score(std::string_view predicted, std::string_view actual, ClassMode classes) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("predicted and actual strings differ in length");
  if (predicted.empty()) throw std::invalid_argument("cannot score empty strings");
  std::size_t match = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (classes == ClassMode::Three)
      match += reduce_to_three_class(predicted[i]) == reduce_to_three_class(actual[i]);
    else
      match += predicted[i] == actual[i];
  }
  return 100.0 * static_cast<double>(match) / static_cast<double>(predicted.size());
}

double mean_of(const std::vector<PairScore>& scores) {
  if (scores.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : scores) s += p.q3;
  return s / static_cast<double>(scores.size());
}

EvalReport evaluate_fold(const Corpus& corpus, const FoldSpec& fold, const EvalOptions& options) {
  auto lookup = [&](int id) -> const LabeledPair& {
    const auto* p = corpus.find(id);
    if (!p) throw std::invalid_argument("fold references unknown pair id " + std::to_string(id));
    return *p;
  };
  std::vector<LabeledPair> train;
  train.reserve(fold.train_ids.size());
  for (int id : fold.train_ids) train.push_back(lookup(id));
  const auto estimate = estimate_by_counting(train, options.direction, options.pseudocount);

  const auto& ha = hidden_alphabet(options.direction);
  const auto& oa = observed_alphabet(options.direction);
  const auto classes =
      options.direction == Direction::StructureHidden ? options.classes : ClassMode::Eight;

  EvalReport report;
  report.direction = options.direction;
  report.fold = fold;
  for (int id : fold.test_ids) {
    const auto& p = lookup(id);
    const auto obs = sequence_to_index_vector(observed_string(p, options.direction), oa);
    const auto hidden = predict_hidden(estimate.model, obs, options.decoder);
    const auto predicted = index_vector_to_sequence(hidden, ha);
    report.per_pair.push_back({id, q3_score(predicted, hidden_string(p, options.direction), classes)});
  }
  report.mean_q3 = mean_of(report.per_pair);
  return report;
}

}  // namespace seqhmm
