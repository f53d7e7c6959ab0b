#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "seqhmm/alphabet.hpp"
#include "seqhmm/dataset.hpp"
#include "seqhmm/hmm.hpp"

namespace seqhmm {

// Which string of a pair is hidden.
//   StructureHidden ("model1"): hidden = structure (N=8), observed = sequence (M=20)
//   SequenceHidden  ("model2"): hidden = sequence (N=20), observed = structure (M=8)
enum class Direction { StructureHidden, SequenceHidden };

std::string_view direction_name(Direction d);
Direction direction_from_string(std::string_view s);

const Alphabet& hidden_alphabet(Direction d);
const Alphabet& observed_alphabet(Direction d);
const std::string& hidden_string(const LabeledPair& p, Direction d);
const std::string& observed_string(const LabeledPair& p, Direction d);

// Integer cell counts, row-major.
struct CountTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> cells;

  CountTable() = default;
  CountTable(std::size_t r, std::size_t c) : rows(r), cols(c), cells(r * c, 0) {}
  std::int64_t& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
  std::int64_t at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  std::int64_t row_total(std::size_t r) const;
};

struct CountingEstimate {
  DiscreteHmm model;
  std::vector<std::int64_t> first_counts;  // hidden symbol at position 1 of each pair
  std::int64_t first_total = 0;            // number of training pairs
  CountTable trans_counts;                 // within-pair adjacent hidden symbols
  CountTable emit_counts;                  // aligned (hidden, observed) symbols
  double pseudocount = 0.0;
};

// Supervised estimate by counting. `pseudocount` is added to every cell
// (initial, transition and emission) before normalization; rows whose total is
// still zero become uniform. Throws EmptyTrainingSet.
CountingEstimate estimate_by_counting(const std::vector<LabeledPair>& pairs, Direction direction,
                                      double pseudocount);

enum class Decoder { Posterior, Viterbi };
Decoder decoder_from_string(std::string_view s);
std::string_view decoder_name(Decoder d);

std::vector<int> predict_hidden(const DiscreteHmm& model, std::span<const int> observed,
                                Decoder decoder = Decoder::Posterior);

enum class ClassMode { Eight, Three };
ClassMode class_mode_from_string(std::string_view s);

// Percentage of matching positions. Three-class mode reduces both strings with
// reduce_to_three_class first, so it accepts structure strings only. Throws
// std::invalid_argument on length mismatch or empty input.
double q3_score(std::string_view predicted, std::string_view actual,
                ClassMode classes = ClassMode::Eight);

struct PairScore {
  int id = 0;
  double q3 = 0.0;
};

struct EvalReport {
  std::vector<PairScore> per_pair;
  double mean_q3 = 0.0;
  Direction direction = Direction::StructureHidden;
  FoldSpec fold;
};

struct EvalOptions {
  Direction direction = Direction::StructureHidden;
  Decoder decoder = Decoder::Posterior;
  double pseudocount = 1.0;
  ClassMode classes = ClassMode::Eight;
};

double mean_of(const std::vector<PairScore>& scores);

// Trains by counting on fold.train_ids and scores every test pair. The
// three-class reduction applies only when the hidden string is the structure.
EvalReport evaluate_fold(const Corpus& corpus, const FoldSpec& fold, const EvalOptions& options);

}  // namespace seqhmm
