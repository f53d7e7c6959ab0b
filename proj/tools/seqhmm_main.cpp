// seqhmm: command-line front end for the sequence/structure HMM toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqhmm/alphabet.hpp"
#include "seqhmm/ann.hpp"
#include "seqhmm/dataset.hpp"
#include "seqhmm/error.hpp"
#include "seqhmm/harness.hpp"
#include "seqhmm/hmm.hpp"
#include "seqhmm/profile_hmm.hpp"
#include "seqhmm/seqstruct.hpp"

using namespace seqhmm;
using nlohmann::json;

namespace {

struct CorpusArgs {
  std::string path;
  std::string parse_mode = "strict";
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& a) {
  cmd->add_option("--corpus", a.path, "corpus file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--parse-mode", a.parse_mode, "strict|lenient|repair")
      ->check(CLI::IsMember({"strict", "lenient", "repair"}));
}

Corpus load(const CorpusArgs& a) {
  auto parsed = load_corpus(a.path, parse_mode_from_string(a.parse_mode));
  for (const auto& w : parsed.warnings)
    std::cerr << "warning: pair " << w.id << ": " << w.message << '\n';
  return std::move(parsed.corpus);
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return json::parse(in);
}

std::vector<std::size_t> parse_hidden(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoul(item)));
  return out;
}

const Alphabet& alphabet_by_name(const std::string& name) {
  if (name == "residues") return residue_alphabet();
  if (name == "structures") return structure_alphabet();
  throw ConfigError("unknown alphabet '" + name + "'");
}

// One sequence per line, or FASTA-style records when '>' headers are present.
std::vector<std::string> read_sequences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  bool fasta = false;
  while (std::getline(in, line)) {
    std::string s;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::toupper(c)));
    if (s.empty()) continue;
    if (s.front() == '>') {
      fasta = true;
      out.emplace_back();
      continue;
    }
    if (fasta && !out.empty())
      out.back() += s;
    else
      out.push_back(s);
  }
  return out;
}

void dump_encoding() {
  for (const Alphabet* a : {&residue_alphabet(), &structure_alphabet()}) {
    std::cout << a->name() << " (" << a->min_code_width() << " bits)\n";
    for (std::size_t i = 0; i < a->size(); ++i) {
      std::cout << "  " << a->symbol(i) << ' ';
      for (auto b : encode_symbol_binary(a->symbol(i), *a, a->min_code_width())) std::cout << int(b);
      std::cout << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden Markov models and neural networks relating protein sequence and secondary structure"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("seqhmm ") + SEQHMM_VERSION);
  std::uint64_t global_seed = 1;
  unsigned threads = 1;
  bool want_encoding = false;
  app.add_option("--seed", global_seed, "default seed for randomized commands");
  app.add_option("--threads", threads, "worker threads for experiment cells")->check(CLI::PositiveNumber);
  app.add_flag("--dump-encoding", want_encoding, "print the binary symbol code tables");

  // summary
  CorpusArgs summary_corpus;
  auto* summary = app.add_subcommand("summary", "print a JSON summary of a corpus");
  add_corpus_options(summary, summary_corpus);

  // eval-cv / ann-eval share fold options
  CorpusArgs cv_corpus;
  std::string cv_direction = "model1", cv_decoder = "posterior", cv_classes = "8", cv_out = "report.csv",
              cv_detail;
  std::size_t cv_folds = 5;
  double cv_pseudo = 1.0;
  auto* eval_cv = app.add_subcommand("eval-cv", "cross-validated Q3 of the counting HMM");
  add_corpus_options(eval_cv, cv_corpus);
  eval_cv->add_option("--direction", cv_direction, "model1|model2");
  eval_cv->add_option("--folds", cv_folds);
  eval_cv->add_option("--decoder", cv_decoder, "posterior|viterbi");
  eval_cv->add_option("--pseudocount", cv_pseudo);
  eval_cv->add_option("--classes", cv_classes, "8|3");
  eval_cv->add_option("--out", cv_out, "report CSV path");
  eval_cv->add_option("--detail", cv_detail, "per-pair JSON path (default: <out>.json)");

  // hmm-train (counting)
  CorpusArgs ht_corpus;
  std::string ht_direction = "model1", ht_out = "model.json";
  double ht_pseudo = 1.0;
  auto* hmm_train = app.add_subcommand("hmm-train", "estimate a model by counting over a corpus");
  add_corpus_options(hmm_train, ht_corpus);
  hmm_train->add_option("--direction", ht_direction);
  hmm_train->add_option("--pseudocount", ht_pseudo);
  hmm_train->add_option("--out", ht_out);

  // em-train (Baum-Welch on the observed strings)
  CorpusArgs em_corpus;
  std::string em_direction = "model1", em_init = "random", em_out = "model.json", em_report = "em.json";
  std::size_t em_states = 0;
  int em_max_iter = 15;
  double em_thresh = 1e-4, em_pseudo = 0.0, em_dominance = 0.67;
  std::optional<std::uint64_t> em_seed;
  auto* em_train = app.add_subcommand("em-train", "unsupervised Baum-Welch on the observed strings");
  add_corpus_options(em_train, em_corpus);
  em_train->add_option("--direction", em_direction);
  em_train->add_option("--states", em_states, "hidden states (default: hidden alphabet size)");
  em_train->add_option("--init", em_init, "random|diagonal")->check(CLI::IsMember({"random", "diagonal"}));
  em_train->add_option("--dominance", em_dominance);
  em_train->add_option("--max-iter", em_max_iter);
  em_train->add_option("--thresh", em_thresh);
  em_train->add_option("--pseudocount", em_pseudo);
  em_train->add_option("--seed", em_seed);
  em_train->add_option("--out", em_out);
  em_train->add_option("--report", em_report, "EM report JSON (log-likelihood trace)");

  // ann-train / ann-eval
  CorpusArgs ann_corpus;
  std::string ann_direction = "model1", ann_hidden, ann_out = "net.json", ann_classes = "8";
  std::size_t ann_window = 13, ann_folds = 5;
  double ann_lr = 0.1;
  int ann_iters = 200, ann_epochs = 1;
  std::optional<std::uint64_t> ann_seed;
  bool ann_shuffled = false;
  auto add_ann_options = [&](CLI::App* cmd) {
    add_corpus_options(cmd, ann_corpus);
    cmd->add_option("--direction", ann_direction);
    cmd->add_option("--window", ann_window);
    cmd->add_option("--hidden", ann_hidden, "comma-separated hidden layer sizes, empty for none");
    cmd->add_option("--lr", ann_lr);
    cmd->add_option("--iters", ann_iters, "updates per position");
    cmd->add_option("--epochs", ann_epochs);
    cmd->add_option("--seed", ann_seed);
    cmd->add_flag("--shuffled-sgd", ann_shuffled, "shuffle examples instead of per-position repetition");
  };
  auto* ann_train = app.add_subcommand("ann-train", "train a windowed feed-forward net on a corpus");
  add_ann_options(ann_train);
  ann_train->add_option("--out", ann_out);
  std::string ann_eval_out = "report.csv", ann_eval_detail;
  auto* ann_eval = app.add_subcommand("ann-eval", "cross-validated Q3 of the feed-forward net");
  add_ann_options(ann_eval);
  ann_eval->add_option("--folds", ann_folds);
  ann_eval->add_option("--classes", ann_classes, "8|3");
  ann_eval->add_option("--out", ann_eval_out);
  ann_eval->add_option("--detail", ann_eval_detail);

  // run
  std::string run_config, run_corpus, run_out_dir, run_parse_mode, run_methods, run_directions;
  std::optional<std::size_t> run_folds;
  auto* run = app.add_subcommand("run", "full experiment matrix (methods x directions x folds)");
  run->add_option("--config", run_config, "JSON config mirroring ExperimentConfig");
  run->add_option("--corpus", run_corpus);
  run->add_option("--parse-mode", run_parse_mode);
  run->add_option("--out-dir", run_out_dir);
  run->add_option("--methods", run_methods, "comma list of hmm,ann");
  run->add_option("--directions", run_directions, "comma list of model1,model2");
  run->add_option("--folds", run_folds);

  // profile-train / profile-score
  std::string pt_sequences, pt_alphabet = "residues", pt_out = "profile.json", pt_report;
  std::size_t pt_length = 0;
  int pt_max_iter = 15;
  double pt_thresh = 1e-4, pt_pseudo = 0.0;
  std::optional<std::uint64_t> pt_seed;
  auto* profile_train = app.add_subcommand("profile-train", "Baum-Welch training of a profile HMM");
  profile_train->add_option("--sequences", pt_sequences)->required()->check(CLI::ExistingFile);
  profile_train->add_option("--alphabet", pt_alphabet, "residues|structures");
  profile_train->add_option("--length", pt_length, "match columns (default: mean sequence length)");
  profile_train->add_option("--max-iter", pt_max_iter);
  profile_train->add_option("--thresh", pt_thresh);
  profile_train->add_option("--pseudocount", pt_pseudo);
  profile_train->add_option("--seed", pt_seed);
  profile_train->add_option("--out", pt_out);
  profile_train->add_option("--report", pt_report, "log-likelihood trace JSON");
  std::string ps_profile, ps_sequences, ps_alphabet = "residues";
  auto* profile_score = app.add_subcommand("profile-score", "log P(x) of each sequence under a profile");
  profile_score->add_option("--profile", ps_profile)->required()->check(CLI::ExistingFile);
  profile_score->add_option("--sequences", ps_sequences)->required()->check(CLI::ExistingFile);
  profile_score->add_option("--alphabet", ps_alphabet, "residues|structures");

  CLI11_PARSE(app, argc, argv);

  try {
    if (want_encoding) dump_encoding();

    if (*summary) {
      std::cout << corpus_summary(load(summary_corpus)).dump(2) << '\n';
    } else if (*eval_cv) {
      const auto corpus = load(cv_corpus);
      EvalOptions opt{direction_from_string(cv_direction), decoder_from_string(cv_decoder), cv_pseudo,
                      class_mode_from_string(cv_classes)};
      std::vector<EvalReport> reports;
      for (const auto& fold : make_corpus_folds(corpus, cv_folds))
        reports.push_back(evaluate_fold(corpus, fold, opt));
      write_text_file(cv_out, eval_cv_csv(reports));
      write_json(cv_detail.empty() ? cv_out + ".json" : cv_detail, eval_cv_detail(reports));
      std::cout << eval_cv_csv(reports);
    } else if (*hmm_train) {
      const auto corpus = load(ht_corpus);
      const auto est = estimate_by_counting(corpus.pairs, direction_from_string(ht_direction), ht_pseudo);
      write_json(ht_out, to_json(est.model));
    } else if (*em_train) {
      const auto corpus = load(em_corpus);
      const auto dir = direction_from_string(em_direction);
      std::vector<Observations> data;
      for (const auto& p : corpus.pairs)
        data.push_back(sequence_to_index_vector(observed_string(p, dir), observed_alphabet(dir)));
      const std::size_t n = em_states ? em_states : hidden_alphabet(dir).size();
      const auto init = init_model(n, observed_alphabet(dir).size(),
                                   em_init == "diagonal" ? InitScheme::Diagonal : InitScheme::Random,
                                   em_seed.value_or(global_seed), em_dominance);
      const auto report = baum_welch(init, data, {em_max_iter, em_thresh, em_pseudo});
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      write_json(em_out, to_json(report.final_model));
      write_json(em_report, to_json(report));
      for (std::size_t k = 0; k < report.loglik_trace.size(); ++k)
        std::printf("iteration %zu, loglik = %f\n", k + 1, report.loglik_trace[k]);
    } else if (*ann_train || *ann_eval) {
      const auto corpus = load(ann_corpus);
      const auto dir = direction_from_string(ann_direction);
      AnnEvalOptions opt;
      opt.direction = dir;
      opt.window = WindowConfig::for_direction(dir, ann_window);
      opt.train.learning_rate = ann_lr;
      opt.train.iterations_per_position = ann_iters;
      opt.train.epochs = ann_epochs;
      opt.train.seed = ann_seed.value_or(global_seed);
      opt.train.hidden = parse_hidden(ann_hidden);
      opt.train.shuffled_sgd = ann_shuffled;
      if (*ann_train) {
        const auto net = train_ann(corpus.pairs, dir, opt.window, opt.train);
        write_json(ann_out, to_json(net, opt.window, dir));
      } else {
        opt.classes = class_mode_from_string(ann_classes);
        std::vector<EvalReport> reports;
        for (const auto& fold : make_corpus_folds(corpus, ann_folds))
          reports.push_back(evaluate_ann_fold(corpus, fold, opt));
        write_text_file(ann_eval_out, eval_cv_csv(reports, Method::Ann));
        write_json(ann_eval_detail.empty() ? ann_eval_out + ".json" : ann_eval_detail,
                   eval_cv_detail(reports));
        std::cout << eval_cv_csv(reports, Method::Ann);
      }
    } else if (*run) {
      json j = run_config.empty() ? json::object() : read_json(run_config);
      if (!run_corpus.empty()) j["corpus_path"] = run_corpus;
      if (!run_parse_mode.empty()) j["parse_mode"] = run_parse_mode;
      if (!run_out_dir.empty()) j["output_dir"] = run_out_dir;
      if (run_folds) j["folds"] = *run_folds;
      auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string item; std::getline(ss, item, ',');)
          if (!item.empty()) out.push_back(item);
        return out;
      };
      if (!run_methods.empty()) j["methods"] = split(run_methods);
      if (!run_directions.empty()) j["directions"] = split(run_directions);
      if (app.count("--seed")) j["seed"] = global_seed;
      if (app.count("--threads")) j["threads"] = threads;
      if (!j.contains("output_dir")) j["output_dir"] = "seqhmm_out";
      const auto cfg = config_from_json(j);
      const auto report = run_experiment(cfg);
      std::cout << comparison_csv(report);
      for (const auto& s : report.summary)
        std::printf("# %s %s mean=%s sd=%s\n", std::string(method_name(s.method)).c_str(),
                    std::string(direction_name(s.direction)).c_str(), format_q3(s.mean).c_str(),
                    format_q3(s.stddev).c_str());
      if (report.failures() > 0) {
        for (const auto& c : report.cells)
          if (!c.report) std::cerr << "cell failed: " << c.error << '\n';
        return 2;
      }
    } else if (*profile_train) {
      const auto& alphabet = alphabet_by_name(pt_alphabet);
      std::vector<std::vector<int>> seqs;
      std::size_t total = 0;
      for (const auto& s : read_sequences(pt_sequences)) {
        seqs.push_back(sequence_to_index_vector(s, alphabet));
        total += s.size();
      }
      if (seqs.empty()) throw EmptyTrainingSet();
      const std::size_t length = pt_length ? pt_length : std::max<std::size_t>(1, total / seqs.size());
      const auto init = random_profile(length, alphabet.size(), pt_seed.value_or(global_seed));
      const auto report = profile_baum_welch(init, seqs, {pt_max_iter, pt_thresh, pt_pseudo});
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      write_json(pt_out, to_json(report.model, std::string(alphabet.name())));
      if (!pt_report.empty())
        write_json(pt_report, {{"loglik_trace", report.loglik_trace},
                               {"iterations", report.iterations},
                               {"converged", report.converged}});
      for (std::size_t k = 0; k < report.loglik_trace.size(); ++k)
        std::printf("iteration %zu, loglik = %f\n", k + 1, report.loglik_trace[k]);
    } else if (*profile_score) {
      const auto profile = profile_from_json(read_json(ps_profile));
      const auto& alphabet = alphabet_by_name(ps_alphabet);
      if (alphabet.size() != profile.alphabet_size()) throw ConfigError("alphabet size does not match profile");
      std::size_t k = 0;
      for (const auto& s : read_sequences(ps_sequences))
        std::printf("%zu\t%.10g\n", ++k, profile_log_prob(profile, sequence_to_index_vector(s, alphabet)));
    } else if (!want_encoding) {
      std::cout << app.help();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
