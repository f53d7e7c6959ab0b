#include "seqhmm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "seqhmm/error.hpp"

namespace seqhmm {

std::string_view method_name(Method m) { return m == Method::Hmm ? "hmm" : "ann"; }

Method method_from_string(std::string_view s) {
  if (s == "hmm") return Method::Hmm;
  if (s == "ann") return Method::Ann;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected hmm|ann)");
}

namespace {

std::string_view parse_mode_name(ParseMode m) {
  switch (m) {
    case ParseMode::Strict:
      return "strict";
    case ParseMode::Lenient:
      return "lenient";
    case ParseMode::Repair:
      return "repair";
  }
  return "strict";
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

struct Cell {
  Method method;
  Direction direction;
  std::size_t fold;
};

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigError("at least one method is required");
  if (cfg.directions.empty()) throw ConfigError("at least one direction is required");
  if (cfg.folds < 2) throw ConfigError("folds must be >= 2 so train and test are both non-empty");
  if (cfg.pseudocount < 0.0) throw ConfigError("pseudocount must be >= 0");
  if (cfg.window == 0 || cfg.window % 2 == 0) throw ConfigError("window must be odd");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (cfg.iterations < 0 || cfg.epochs < 1) throw ConfigError("iterations >= 0 and epochs >= 1 required");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "corpus_path", "parse_mode",    "methods",    "directions", "folds",  "pseudocount",
      "decoder",     "classes",       "window",     "lr",         "iters",  "epochs",
      "hidden",      "seed",          "shuffled_sgd", "output_dir", "threads"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig cfg;
  cfg.corpus_path = get_or<std::string>(j, "corpus_path", cfg.corpus_path);
  cfg.parse_mode = parse_mode_from_string(get_or<std::string>(j, "parse_mode", "strict"));
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : get_or<std::vector<std::string>>(j, "methods", {}))
      cfg.methods.push_back(method_from_string(m));
  }
  if (j.contains("directions")) {
    cfg.directions.clear();
    for (const auto& d : get_or<std::vector<std::string>>(j, "directions", {}))
      cfg.directions.push_back(direction_from_string(d));
  }
  cfg.folds = get_or<std::size_t>(j, "folds", cfg.folds);
  cfg.pseudocount = get_or<double>(j, "pseudocount", cfg.pseudocount);
  cfg.decoder = decoder_from_string(get_or<std::string>(j, "decoder", "posterior"));
  if (j.contains("classes")) {
    const auto& c = j["classes"];
    cfg.classes = class_mode_from_string(c.is_number() ? std::to_string(c.get<int>()) : c.get<std::string>());
  }
  cfg.window = get_or<std::size_t>(j, "window", cfg.window);
  cfg.learning_rate = get_or<double>(j, "lr", cfg.learning_rate);
  cfg.iterations = get_or<int>(j, "iters", cfg.iterations);
  cfg.epochs = get_or<int>(j, "epochs", cfg.epochs);
  cfg.hidden = get_or<std::vector<std::size_t>>(j, "hidden", cfg.hidden);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.shuffled_sgd = get_or<bool>(j, "shuffled_sgd", cfg.shuffled_sgd);
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.threads = get_or<unsigned>(j, "threads", cfg.threads);
  validate(cfg);
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> methods, directions;
  for (auto m : cfg.methods) methods.emplace_back(method_name(m));
  for (auto d : cfg.directions) directions.emplace_back(direction_name(d));
  return {{"corpus_path", cfg.corpus_path},
          {"parse_mode", parse_mode_name(cfg.parse_mode)},
          {"methods", methods},
          {"directions", directions},
          {"folds", cfg.folds},
          {"pseudocount", cfg.pseudocount},
          {"decoder", decoder_name(cfg.decoder)},
          {"classes", cfg.classes == ClassMode::Eight ? 8 : 3},
          {"window", cfg.window},
          {"lr", cfg.learning_rate},
          {"iters", cfg.iterations},
          {"epochs", cfg.epochs},
          {"hidden", cfg.hidden},
          {"seed", cfg.seed},
          {"shuffled_sgd", cfg.shuffled_sgd},
          {"output_dir", cfg.output_dir},
          {"threads", cfg.threads}};
}

std::size_t ComparisonReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.report ? 0 : 1;
  return n;
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells) {
  std::vector<SummaryRow> out;
  std::map<std::pair<int, int>, std::vector<double>> groups;
  std::vector<std::pair<int, int>> order;
  for (const auto& c : cells) {
    if (!c.report) continue;
    std::pair key{static_cast<int>(c.method), static_cast<int>(c.direction)};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(c.report->mean_q3);
  }
  for (const auto& key : order) {
    const auto& v = groups[key];
    SummaryRow row{static_cast<Method>(key.first), static_cast<Direction>(key.second), v.size()};
    for (double x : v) row.mean += x;
    row.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - row.mean) * (x - row.mean);
      row.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    out.push_back(row);
  }
  return out;
}

ComparisonReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  auto parsed = load_corpus(cfg.corpus_path, cfg.parse_mode);
  return run_experiment(cfg, parsed.corpus);
}

ComparisonReport run_experiment(const ExperimentConfig& cfg, const Corpus& corpus) {
  validate(cfg);
  const auto folds = make_corpus_folds(corpus, cfg.folds);

  std::vector<Cell> cells;
  for (auto m : cfg.methods)
    for (auto d : cfg.directions)
      for (std::size_t f = 0; f < folds.size(); ++f) cells.push_back({m, d, f});

  ComparisonReport report;
  report.cells.resize(cells.size());
  auto run_cell = [&](std::size_t k) {
    const auto& cell = cells[k];
    const auto& fold = folds[cell.fold];
    auto& out = report.cells[k];
    out.method = cell.method;
    out.direction = cell.direction;
    out.fold = cell.fold + 1;
    out.train_span = format_id_span(fold.train_ids);
    out.test_span = format_id_span(fold.test_ids);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (cell.method == Method::Hmm) {
        out.report = evaluate_fold(corpus, fold,
                                   {cell.direction, cfg.decoder, cfg.pseudocount, cfg.classes});
      } else {
        AnnEvalOptions opt;
        opt.direction = cell.direction;
        opt.window = WindowConfig::for_direction(cell.direction, cfg.window);
        opt.train.learning_rate = cfg.learning_rate;
        opt.train.iterations_per_position = cfg.iterations;
        opt.train.epochs = cfg.epochs;
        opt.train.seed = cfg.seed;
        opt.train.hidden = cfg.hidden;
        opt.train.shuffled_sgd = cfg.shuffled_sgd;
        opt.classes = cfg.classes;
        out.report = evaluate_ann_fold(corpus, fold, opt);
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const unsigned workers = std::min<std::size_t>(cfg.threads, cells.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) run_cell(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < cells.size();) run_cell(k);
      });
  }
  report.summary = summarize(report.cells);

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);
    emit_csv(report, (dir / "report.csv").string());
    write_text_file((dir / "report.json").string(), to_json(report).dump(2) + "\n");
    emit_svg_comparison(report, (dir / "comparison.svg").string());
    std::ostringstream log;
    for (const auto& c : report.cells) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f", c.seconds);
      log << method_name(c.method) << ' ' << direction_name(c.direction) << " fold " << c.fold << ' '
          << (c.report ? "ok mean_q3=" + format_q3(c.report->mean_q3) : "FAILED: " + c.error)
          << " time_s=" << buf << '\n';
    }
    write_text_file((dir / "run.log").string(), log.str());
  }
  return report;
}

std::string format_q3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::string out = "method,direction,fold,train_span,test_span,mean_q3\n";
  for (const auto& c : report.cells) {
    if (!c.report) continue;
    out += std::string(method_name(c.method)) + ',' + std::string(direction_name(c.direction)) + ',' +
           std::to_string(c.fold) + ',' + c.train_span + ',' + c.test_span + ',' +
           format_q3(c.report->mean_q3) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

void emit_csv(const ComparisonReport& report, const std::string& path) {
  if (report.cells.empty()) throw Error("empty report");
  write_text_file(path, comparison_csv(report));
}

nlohmann::json to_json(const ComparisonReport& report) {
  auto rows = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json row{{"method", method_name(c.method)},
                       {"direction", direction_name(c.direction)},
                       {"fold", c.fold},
                       {"train_span", c.train_span},
                       {"test_span", c.test_span}};
    if (c.report) {
      row["mean_q3"] = c.report->mean_q3;
      auto per = nlohmann::json::array();
      for (const auto& p : c.report->per_pair) per.push_back({{"id", p.id}, {"q3", p.q3}});
      row["per_pair"] = per;
    } else {
      row["error"] = c.error;
    }
    rows.push_back(row);
  }
  auto summary = nlohmann::json::array();
  for (const auto& s : report.summary)
    summary.push_back({{"method", method_name(s.method)},
                       {"direction", direction_name(s.direction)},
                       {"n_folds", s.n_folds},
                       {"mean", s.mean},
                       {"stddev", s.stddev}});
  return {{"rows", rows}, {"summary", summary}, {"failures", report.failures()}};
}

std::string comparison_svg(const ComparisonReport& report) {
  struct Group {
    std::string label;
    std::vector<std::pair<std::size_t, double>> bars;
  };
  std::vector<Group> groups;
  for (const auto& c : report.cells) {
    if (!c.report) continue;
    std::string label = std::string(method_name(c.method)) + " " + std::string(direction_name(c.direction));
    if (groups.empty() || groups.back().label != label) groups.push_back({label, {}});
    groups.back().bars.emplace_back(c.fold, c.report->mean_q3);
  }
  if (groups.empty()) throw Error("report has no successful cells to plot");

  const double bar_w = 18, bar_gap = 4, group_gap = 30, left = 70, top = 30, plot_h = 300;
  double x = left + group_gap / 2;
  std::ostringstream body;
  const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
  char buf[256];
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double group_start = x;
    for (const auto& [fold, q3] : groups[g].bars) {
      const double h = plot_h * std::clamp(q3, 0.0, 100.0) / 100.0;
      std::snprintf(buf, sizeof buf,
                    "<rect class=\"bar\" x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"%s\">"
                    "<title>%s fold %zu: %s</title></rect>\n",
                    x, top + plot_h - h, bar_w, h, colors[g % 6], groups[g].label.c_str(), fold,
                    format_q3(q3).c_str());
      body << buf;
      x += bar_w + bar_gap;
    }
    std::snprintf(buf, sizeof buf,
                  "<text class=\"group\" x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%s</text>\n",
                  (group_start + x - bar_gap) / 2, top + plot_h + 20, groups[g].label.c_str());
    body << buf;
    x += group_gap;
  }
  const double width = x + 20;
  const double height = top + plot_h + 50;

  std::ostringstream svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\" font-family=\"sans-serif\" font-size=\"12\">\n",
                width, height, width, height);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << buf;
  svg << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int tick = 0; tick <= 100; tick += 20) {
    const double y = top + plot_h - plot_h * tick / 100.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%d</text>\n",
                  left, y, width - 20, y, left - 6, y + 4, tick);
    svg << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                "<text x=\"20\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 20 %.1f)\">"
                "Efficiency (Q3 %%)</text>\n",
                left, top, left, top + plot_h, top + plot_h / 2, top + plot_h / 2);
  svg << buf << body.str() << "</svg>\n";
  return svg.str();
}

void emit_svg_comparison(const ComparisonReport& report, const std::string& path) {
  write_text_file(path, comparison_svg(report));
}

std::string eval_cv_csv(const std::vector<EvalReport>& reports, std::optional<Method> method) {
  std::string out = method ? "method," : "";
  out += "fold_index,train_span,test_span,direction,mean_q3,n_test\n";
  for (std::size_t f = 0; f < reports.size(); ++f) {
    const auto& r = reports[f];
    if (method) out += std::string(method_name(*method)) + ',';
    out += std::to_string(f + 1) + ',' + format_id_span(r.fold.train_ids) + ',' +
           format_id_span(r.fold.test_ids) + ',' + std::string(direction_name(r.direction)) + ',' +
           format_q3(r.mean_q3) + ',' + std::to_string(r.per_pair.size()) + '\n';
  }
  return out;
}

nlohmann::json eval_cv_detail(const std::vector<EvalReport>& reports) {
  auto folds = nlohmann::json::array();
  for (std::size_t f = 0; f < reports.size(); ++f) {
    auto per = nlohmann::json::array();
    for (const auto& p : reports[f].per_pair) per.push_back({{"id", p.id}, {"q3", p.q3}});
    folds.push_back({{"fold_index", f + 1},
                     {"direction", direction_name(reports[f].direction)},
                     {"mean_q3", reports[f].mean_q3},
                     {"per_pair", per}});
  }
  return {{"folds", folds}};
}

}  // namespace seqhmm
