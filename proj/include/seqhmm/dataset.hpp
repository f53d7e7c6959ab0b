#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace seqhmm {

// One protein: residue string and its aligned secondary-structure string.
struct LabeledPair {
  int id = 0;
  std::string seq;
  std::string str;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

// Pairs ordered by strictly increasing id.
struct Corpus {
  std::vector<LabeledPair> pairs;

  std::size_t size() const { return pairs.size(); }
  // nullptr when absent.
  const LabeledPair* find(int id) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

enum class ParseMode {
  Strict,   // first bad pair aborts the parse
  Lenient,  // bad pairs are skipped with a warning
  Repair,   // illegal characters are dropped and both strings truncated to the shorter length
};

ParseMode parse_mode_from_string(std::string_view s);

struct ParseWarning {
  int id = 0;
  std::string message;
};

struct ParseResult {
  Corpus corpus;
  std::vector<ParseWarning> warnings;
};

// Accepts either the `seq{i}='...'` / `str{i}='...'` assignment grammar
// (payloads may wrap lines; whitespace inside quotes is ignored) or the plain
// record format `>id` / SEQ line / STR line. Text outside assignments is
// ignored. Payloads are upper-cased.
ParseResult parse_corpus(std::string_view text, ParseMode mode = ParseMode::Strict);
ParseResult load_corpus(const std::string& path, ParseMode mode = ParseMode::Strict);

// Writes the assignment grammar, one line per payload.
std::string format_corpus(const Corpus& corpus);

struct FoldSpec {
  std::vector<int> train_ids;
  std::vector<int> test_ids;

  friend bool operator==(const FoldSpec&, const FoldSpec&) = default;
};

// Folds over ids 1..corpus_size. When corpus_size >= 100 * n_folds the test
// blocks are [100f+1, 100(f+1)] (the remainder always trains); otherwise the
// test block is floor(corpus_size / n_folds) contiguous ids with the last fold
// taking the remainder. Throws InvalidFoldCount unless 2 <= n_folds <= corpus_size.
std::vector<FoldSpec> make_folds(std::size_t corpus_size, std::size_t n_folds);

// make_folds over corpus positions, mapped to the ids actually present.
std::vector<FoldSpec> make_corpus_folds(const Corpus& corpus, std::size_t n_folds);

// Compact range rendering of a sorted id list, e.g. "1-100;201-507".
std::string format_id_span(const std::vector<int>& ids);

// {"n_pairs", "pairs":[{"id","length","structure_counts":{H:..}}...]}
nlohmann::json corpus_summary(const Corpus& corpus);

}  // namespace seqhmm
