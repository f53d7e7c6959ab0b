#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqhmm/ann.hpp"
#include "seqhmm/dataset.hpp"
#include "seqhmm/seqstruct.hpp"

namespace seqhmm {

enum class Method { Hmm, Ann };
std::string_view method_name(Method m);
Method method_from_string(std::string_view s);

struct ExperimentConfig {
  std::string corpus_path;
  ParseMode parse_mode = ParseMode::Strict;
  std::vector<Method> methods{Method::Hmm, Method::Ann};
  std::vector<Direction> directions{Direction::StructureHidden, Direction::SequenceHidden};
  std::size_t folds = 5;

  // hmm
  double pseudocount = 1.0;
  Decoder decoder = Decoder::Posterior;
  ClassMode classes = ClassMode::Eight;

  // ann
  std::size_t window = 13;
  double learning_rate = 0.1;
  int iterations = 200;
  int epochs = 1;
  std::vector<std::size_t> hidden;
  std::uint64_t seed = 1;
  bool shuffled_sgd = false;

  std::string output_dir;  // empty: nothing written
  unsigned threads = 1;
};

// Throws ConfigError. Keys mirror the struct fields; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

struct CellResult {
  Method method = Method::Hmm;
  Direction direction = Direction::StructureHidden;
  std::size_t fold = 0;  // 1-based
  std::string train_span;
  std::string test_span;
  std::optional<EvalReport> report;  // empty when the cell failed
  std::string error;
  double seconds = 0.0;
};

struct SummaryRow {
  Method method = Method::Hmm;
  Direction direction = Direction::StructureHidden;
  std::size_t n_folds = 0;
  double mean = 0.0;    // arithmetic mean of the fold means
  double stddev = 0.0;  // sample standard deviation across folds (0 for one fold)
};

struct ComparisonReport {
  std::vector<CellResult> cells;  // ordered by (method, direction, fold)
  std::vector<SummaryRow> summary;

  std::size_t failures() const;
};

ComparisonReport run_experiment(const ExperimentConfig& cfg);
// Runs on an already parsed corpus; cfg.corpus_path is ignored.
ComparisonReport run_experiment(const ExperimentConfig& cfg, const Corpus& corpus);

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells);

// Fixed four-decimal rendering used in every report.
std::string format_q3(double value);

// method,direction,fold,train_span,test_span,mean_q3 (successful cells only)
std::string comparison_csv(const ComparisonReport& report);
void emit_csv(const ComparisonReport& report, const std::string& path);

nlohmann::json to_json(const ComparisonReport& report);

// Grouped bar chart, one group per (method, direction), one bar per fold.
std::string comparison_svg(const ComparisonReport& report);
void emit_svg_comparison(const ComparisonReport& report, const std::string& path);

// fold_index,train_span,test_span,direction,mean_q3,n_test, with a leading
// method column when `method` is set.
std::string eval_cv_csv(const std::vector<EvalReport>& reports,
                        std::optional<Method> method = std::nullopt);
nlohmann::json eval_cv_detail(const std::vector<EvalReport>& reports);

void write_text_file(const std::string& path, std::string_view content);

}  // namespace seqhmm
