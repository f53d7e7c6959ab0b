#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqhmm/error.hpp"
#include "seqhmm/harness.hpp"

using namespace seqhmm;

namespace {

const Corpus& sample_corpus() {
  static const Corpus c = load_corpus(SEQHMM_DATA_DIR "/sample20.txt", ParseMode::Repair).corpus;
  return c;
}

ExperimentConfig quick_config() {
  ExperimentConfig cfg;
  cfg.iterations = 2;
  cfg.window = 5;
  return cfg;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config json") {
    auto cfg = config_from_json(nlohmann::json::parse(
        R"({"corpus_path":"x.txt","methods":["hmm"],"directions":["model2"],"folds":4,"lr":0.2,"hidden":[3]})"));
    CHECK(cfg.methods == std::vector<Method>{Method::Hmm});
    CHECK(cfg.directions == std::vector<Direction>{Direction::SequenceHidden});
    CHECK(cfg.folds == 4);
    CHECK(cfg.learning_rate == 0.2);
    CHECK(cfg.hidden == std::vector<std::size_t>{3});
    auto again = config_from_json(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"fold":3})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"folds":"five"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"methods":["svm"]})")), ConfigError);
  }

  TEST_CASE("validation") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.methods.clear();
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.directions.clear();
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.folds = 1;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.window = 4;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }

  TEST_CASE("full matrix on the sample corpus") {
    auto cfg = quick_config();
    auto rep = run_experiment(cfg, sample_corpus());
    CHECK(rep.cells.size() == 20);
    CHECK(rep.failures() == 0);
    CHECK(rep.summary.size() == 4);
    for (const auto& s : rep.summary) {
      double sum = 0;
      std::vector<double> v;
      for (const auto& c : rep.cells)
        if (c.method == s.method && c.direction == s.direction) v.push_back(c.report->mean_q3);
      for (double x : v) sum += x;
      const double mean = sum / v.size();
      double ss = 0;
      for (double x : v) ss += (x - mean) * (x - mean);
      CHECK(s.n_folds == 5);
      CHECK(std::abs(s.mean - mean) <= 1e-12);
      CHECK(std::abs(s.stddev - std::sqrt(ss / (v.size() - 1))) <= 1e-12);
    }
    auto csv = comparison_csv(rep);
    CHECK(csv.rfind("method,direction,fold,train_span,test_span,mean_q3\n", 0) == 0);
    CHECK(count_of(csv, "\n") == 21);
    CHECK(csv.find("hmm,model1,1,5-20,1-4,") != std::string::npos);
    auto svg = comparison_svg(rep);
    CHECK(count_of(svg, "<rect class=\"bar\"") == 20);
    CHECK(count_of(svg, "class=\"group\"") == 4);
    CHECK(svg.find("Efficiency (Q3 %)") != std::string::npos);
  }

  TEST_CASE("row order and spans are stable") {
    auto cfg = quick_config();
    cfg.methods = {Method::Hmm};
    cfg.directions = {Direction::StructureHidden};
    auto rep = run_experiment(cfg, sample_corpus());
    REQUIRE(rep.cells.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(rep.cells[i].fold == i + 1);
    CHECK(rep.cells[2].train_span == "1-8;13-20");
    CHECK(rep.cells[2].test_span == "9-12");
    auto svg = comparison_svg(rep);
    CHECK(count_of(svg, "<rect class=\"bar\"") == 5);
  }

  TEST_CASE("threads do not change results") {
    auto cfg = quick_config();
    auto one = comparison_csv(run_experiment(cfg, sample_corpus()));
    cfg.threads = 4;
    CHECK(comparison_csv(run_experiment(cfg, sample_corpus())) == one);
  }

  TEST_CASE("failing cells are recorded and the run continues") {
    Corpus tiny;
    tiny.pairs = {{1, "A", "H"}, {2, "C", "E"}};
    auto cfg = quick_config();
    cfg.folds = 2;
    cfg.decoder = Decoder::Posterior;
    cfg.pseudocount = 0.0;
    cfg.methods = {Method::Hmm};
    cfg.directions = {Direction::StructureHidden};
    // Test symbol never seen in training: zero probability without smoothing.
    auto rep = run_experiment(cfg, tiny);
    CHECK(rep.cells.size() == 2);
    CHECK(rep.failures() == 2);
    CHECK_FALSE(rep.cells[0].error.empty());
    CHECK(comparison_csv(rep) == "method,direction,fold,train_span,test_span,mean_q3\n");
  }

  TEST_CASE("artifacts are written") {
    auto dir = std::filesystem::temp_directory_path() / "seqhmm_harness_test";
    std::filesystem::remove_all(dir);
    auto cfg = quick_config();
    cfg.methods = {Method::Hmm};
    cfg.output_dir = dir.string();
    auto rep = run_experiment(cfg, sample_corpus());
    for (const char* f : {"report.csv", "report.json", "comparison.svg", "run.log"})
      CHECK(std::filesystem::exists(dir / f));
    CHECK(slurp(dir / "report.csv") == comparison_csv(rep));
    auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["rows"].size() == 10);
    CHECK(count_of(slurp(dir / "run.log"), "\n") == 10);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("q3 formatting") {
    CHECK(format_q3(47.08) == "47.0800");
    CHECK(format_q3(13.66) == "13.6600");
    CHECK(format_q3(100.0) == "100.0000");
  }

  TEST_CASE("eval-cv csv") {
    EvalReport r;
    r.per_pair = {{1, 50.0}, {2, 25.0}};
    r.mean_q3 = 37.5;
    r.fold = {{3, 4}, {1, 2}};
    auto csv = eval_cv_csv({r});
    CHECK(csv == "fold_index,train_span,test_span,direction,mean_q3,n_test\n1,3-4,1-2,model1,37.5000,2\n");
    CHECK(eval_cv_csv({r}, Method::Ann).rfind("method,fold_index", 0) == 0);
  }
}
