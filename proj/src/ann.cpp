#include "seqhmm/ann.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "seqhmm/error.hpp"
#include "seqhmm/hmm.hpp"

namespace seqhmm {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

FeedForwardNet make_net(std::vector<std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) throw ShapeMismatch("a network needs input and output layers");
  for (auto s : layer_sizes)
    if (s == 0) throw ShapeMismatch("layer sizes must be positive");
  FeedForwardNet net;
  net.layer_sizes = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l)
    net.weights.emplace_back(net.layer_sizes[l + 1], net.layer_sizes[l] + 1, 0.0);
  return net;
}

FeedForwardNet random_net(std::vector<std::size_t> layer_sizes, double scale, std::uint64_t seed) {
  auto net = make_net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (auto& w : net.weights)
    for (double& v : w.data()) v = (2.0 * unit_uniform(rng) - 1.0) * scale;
  return net;
}

std::vector<std::vector<double>> net_activations(const FeedForwardNet& net,
                                                 std::span<const double> input) {
  if (input.size() != net.input_size())
    throw ShapeMismatch("input has " + std::to_string(input.size()) + " values, net expects " +
                        std::to_string(net.input_size()));
  std::vector<std::vector<double>> acts;
  acts.emplace_back(input.begin(), input.end());
  for (const auto& w : net.weights) {
    const auto& prev = acts.back();
    std::vector<double> next(w.rows());
    for (std::size_t u = 0; u < w.rows(); ++u) {
      auto row = w.row(u);
      double a = row[prev.size()];  // bias
      for (std::size_t v = 0; v < prev.size(); ++v) a += row[v] * prev[v];
      next[u] = sigmoid(a);
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

std::vector<double> net_forward(const FeedForwardNet& net, std::span<const double> input) {
  return std::move(net_activations(net, input).back());
}

double squared_error(const FeedForwardNet& net, std::span<const double> input,
                     std::span<const double> target) {
  if (target.size() != net.output_size()) throw ShapeMismatch("target size != output size");
  const auto y = net_forward(net, input);
  double e = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) e += 0.5 * (y[k] - target[k]) * (y[k] - target[k]);
  return e;
}

std::vector<Matrix> error_gradient(const FeedForwardNet& net, std::span<const double> input,
                                   std::span<const double> target) {
  if (target.size() != net.output_size()) throw ShapeMismatch("target size != output size");
  const auto acts = net_activations(net, input);
  std::vector<Matrix> grad;
  for (const auto& w : net.weights) grad.emplace_back(w.rows(), w.cols(), 0.0);

  const auto& y = acts.back();
  std::vector<double> delta(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) delta[k] = (y[k] - target[k]) * y[k] * (1.0 - y[k]);

  for (std::size_t l = net.weights.size(); l-- > 0;) {
    const auto& w = net.weights[l];
    const auto& a = acts[l];
    for (std::size_t u = 0; u < w.rows(); ++u) {
      for (std::size_t v = 0; v < a.size(); ++v) grad[l](u, v) = delta[u] * a[v];
      grad[l](u, a.size()) = delta[u];
    }
    if (l == 0) break;
    std::vector<double> below(a.size(), 0.0);
    for (std::size_t v = 0; v < a.size(); ++v) {
      double s = 0.0;
      for (std::size_t u = 0; u < w.rows(); ++u) s += w(u, v) * delta[u];
      below[v] = s * a[v] * (1.0 - a[v]);
    }
    delta = std::move(below);
  }
  return grad;
}

double backprop_step(FeedForwardNet& net, std::span<const double> input,
                     std::span<const double> target, double learning_rate) {
  const double err = squared_error(net, input, target);
  if (learning_rate == 0.0) return err;
  const auto grad = error_gradient(net, input, target);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto w = net.weights[l].data();
    auto g = grad[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * g[k];
  }
  return err;
}

WindowConfig WindowConfig::for_direction(Direction d, std::size_t window) {
  return WindowConfig{window, observed_alphabet(d).min_code_width(),
                      hidden_alphabet(d).min_code_width()};
}

namespace {

void append_code(std::vector<double>& out, char symbol, const Alphabet& a, int width) {
  for (auto b : encode_symbol_binary(symbol, a, width)) out.push_back(b);
}

std::vector<double> window_input(std::string_view observed, std::size_t center, const Alphabet& a,
                                 const WindowConfig& cfg) {
  std::vector<double> in;
  in.reserve(cfg.input_size());
  const auto half = static_cast<std::ptrdiff_t>(cfg.window / 2);
  for (std::ptrdiff_t d = -half; d <= half; ++d) {
    const auto pos = static_cast<std::ptrdiff_t>(center) + d;
    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(observed.size()))
      in.insert(in.end(), static_cast<std::size_t>(cfg.in_bits), 0.0);
    else
      append_code(in, observed[static_cast<std::size_t>(pos)], a, cfg.in_bits);
  }
  return in;
}

void check_window(const WindowConfig& cfg) {
  if (cfg.window == 0 || cfg.window % 2 == 0) throw ConfigError("window size must be odd");
}

std::vector<std::size_t> net_shape(const WindowConfig& w, const TrainConfig& t) {
  std::vector<std::size_t> sizes{w.input_size()};
  sizes.insert(sizes.end(), t.hidden.begin(), t.hidden.end());
  sizes.push_back(static_cast<std::size_t>(w.out_bits));
  return sizes;
}

}  // namespace

std::vector<WindowExample> build_windows(const LabeledPair& pair, Direction direction,
                                         const WindowConfig& cfg) {
  check_window(cfg);
  const auto& oa = observed_alphabet(direction);
  const auto& ha = hidden_alphabet(direction);
  const auto& obs = observed_string(pair, direction);
  const auto& hid = hidden_string(pair, direction);
  std::vector<WindowExample> out;
  out.reserve(obs.size());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    WindowExample ex{window_input(obs, t, oa, cfg), {}};
    append_code(ex.target, hid[t], ha, cfg.out_bits);
    out.push_back(std::move(ex));
  }
  return out;
}

FeedForwardNet train_ann(const std::vector<LabeledPair>& pairs, Direction direction,
                         const WindowConfig& wcfg, const TrainConfig& tcfg) {
  if (pairs.empty()) throw EmptyTrainingSet();
  if (!(tcfg.learning_rate >= 0.0) || tcfg.iterations_per_position < 0 || tcfg.epochs < 0)
    throw ConfigError("learning rate, iterations and epochs must be non-negative");
  auto net = random_net(net_shape(wcfg, tcfg), tcfg.init_scale, tcfg.seed);

  std::vector<WindowExample> examples;
  for (const auto& p : pairs) {
    auto w = build_windows(p, direction, wcfg);
    examples.insert(examples.end(), std::make_move_iterator(w.begin()),
                    std::make_move_iterator(w.end()));
  }

  if (!tcfg.shuffled_sgd) {
    for (int e = 0; e < tcfg.epochs; ++e)
      for (const auto& ex : examples)
        for (int r = 0; r < tcfg.iterations_per_position; ++r)
          backprop_step(net, ex.input, ex.target, tcfg.learning_rate);
    return net;
  }

  std::mt19937_64 rng(tcfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int e = 0; e < tcfg.epochs; ++e) {
    for (int r = 0; r < tcfg.iterations_per_position; ++r) {
      for (std::size_t i = order.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[j]);
      }
      for (auto k : order) backprop_step(net, examples[k].input, examples[k].target, tcfg.learning_rate);
    }
  }
  return net;
}

std::size_t nearest_code(std::span<const double> output, const Alphabet& alphabet) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const int width = static_cast<int>(output.size());
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    const auto bits = encode_symbol_binary(alphabet.symbol(i), alphabet, width);
    double d = 0.0;
    for (std::size_t b = 0; b < bits.size(); ++b) d += (output[b] - bits[b]) * (output[b] - bits[b]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::string predict_ann(const FeedForwardNet& net, std::string_view observed, Direction direction,
                        const WindowConfig& cfg) {
  check_window(cfg);
  const auto& oa = observed_alphabet(direction);
  const auto& ha = hidden_alphabet(direction);
  for (std::size_t i = 0; i < observed.size(); ++i) oa.index(observed[i], i);
  std::string out;
  out.reserve(observed.size());
  for (std::size_t t = 0; t < observed.size(); ++t)
    out.push_back(ha.symbol(nearest_code(net_forward(net, window_input(observed, t, oa, cfg)), ha)));
  return out;
}

EvalReport evaluate_ann_fold(const Corpus& corpus, const FoldSpec& fold,
                             const AnnEvalOptions& options) {
  auto lookup = [&](int id) -> const LabeledPair& {
    const auto* p = corpus.find(id);
    if (!p) throw std::invalid_argument("fold references unknown pair id " + std::to_string(id));
    return *p;
  };
  std::vector<LabeledPair> train;
  for (int id : fold.train_ids) train.push_back(lookup(id));
  const auto net = train_ann(train, options.direction, options.window, options.train);
  const auto classes =
      options.direction == Direction::StructureHidden ? options.classes : ClassMode::Eight;

  EvalReport report;
  report.direction = options.direction;
  report.fold = fold;
  for (int id : fold.test_ids) {
    const auto& p = lookup(id);
    const auto predicted = predict_ann(net, observed_string(p, options.direction), options.direction,
                                       options.window);
    report.per_pair.push_back({id, q3_score(predicted, hidden_string(p, options.direction), classes)});
  }
  report.mean_q3 = mean_of(report.per_pair);
  return report;
}

nlohmann::json to_json(const FeedForwardNet& net, const WindowConfig& cfg, Direction direction) {
  auto layers = nlohmann::json::array();
  for (const auto& w : net.weights) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < w.rows(); ++r) {
      auto row = w.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    layers.push_back(rows);
  }
  return {{"layer_sizes", net.layer_sizes},
          {"weights", layers},
          {"window", {{"size", cfg.window}, {"in_bits", cfg.in_bits}, {"out_bits", cfg.out_bits}}},
          {"direction", direction_name(direction)}};
}

FeedForwardNet net_from_json(const nlohmann::json& j) {
  auto net = make_net(j.at("layer_sizes").get<std::vector<std::size_t>>());
  const auto& layers = j.at("weights");
  if (layers.size() != net.weights.size()) throw ShapeMismatch("weight layer count mismatch");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l];
    if (layers[l].size() != w.rows()) throw ShapeMismatch("weight row count mismatch");
    for (std::size_t r = 0; r < w.rows(); ++r) {
      if (layers[l][r].size() != w.cols()) throw ShapeMismatch("weight column count mismatch");
      for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = layers[l][r][c].get<double>();
    }
  }
  return net;
}

}  // namespace seqhmm
