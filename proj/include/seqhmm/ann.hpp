#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqhmm/dataset.hpp"
#include "seqhmm/matrix.hpp"
#include "seqhmm/seqstruct.hpp"

namespace seqhmm {

double sigmoid(double x);

// Fully connected sigmoid network. weights[l] maps layer l to layer l+1 and
// has layer_sizes[l+1] rows and layer_sizes[l] + 1 columns; the last column
// is the bias weight (bias input fixed at 1.0).
struct FeedForwardNet {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  friend bool operator==(const FeedForwardNet&, const FeedForwardNet&) = default;
};

// All-zero weights with the given shape. Throws ShapeMismatch for < 2 layers.
FeedForwardNet make_net(std::vector<std::size_t> layer_sizes);
// Weights uniform in [-scale, +scale].
FeedForwardNet random_net(std::vector<std::size_t> layer_sizes, double scale, std::uint64_t seed);

// activations[0] is the input; activations.back() the output.
std::vector<std::vector<double>> net_activations(const FeedForwardNet& net,
                                                 std::span<const double> input);
std::vector<double> net_forward(const FeedForwardNet& net, std::span<const double> input);

// E = 1/2 * sum_k (y_k - target_k)^2
double squared_error(const FeedForwardNet& net, std::span<const double> input,
                     std::span<const double> target);

// dE/dw for every weight, same layout as net.weights.
std::vector<Matrix> error_gradient(const FeedForwardNet& net, std::span<const double> input,
                                   std::span<const double> target);

// One gradient-descent step in place. Returns the error before the update.
double backprop_step(FeedForwardNet& net, std::span<const double> input,
                     std::span<const double> target, double learning_rate);

struct WindowConfig {
  std::size_t window = 13;  // odd
  int in_bits = 5;
  int out_bits = 3;

  std::size_t input_size() const { return window * static_cast<std::size_t>(in_bits); }
  static WindowConfig for_direction(Direction d, std::size_t window = 13);
};

struct TrainConfig {
  double learning_rate = 0.1;
  int iterations_per_position = 200;
  int epochs = 1;
  std::uint64_t seed = 1;
  double init_scale = 0.1;
  std::vector<std::size_t> hidden;  // empty: single-layer perceptron
  bool shuffled_sgd = false;        // experimental; not the default procedure
};

struct WindowExample {
  std::vector<double> input;
  std::vector<double> target;
};

// One example per position of the observed string: the codes of the window
// centred on it (all-zero code outside the chain) and the code of the aligned
// hidden symbol.
std::vector<WindowExample> build_windows(const LabeledPair& pair, Direction direction,
                                         const WindowConfig& cfg);

// Weights initialized uniformly from the seed, then for each pair and each
// position in order, iterations_per_position backprop steps on that position's
// example; repeated for `epochs`.
FeedForwardNet train_ann(const std::vector<LabeledPair>& pairs, Direction direction,
                         const WindowConfig& wcfg, const TrainConfig& tcfg);

// Index of the symbol whose code is nearest (Euclidean) to `output`; ties go
// to the lowest alphabet index.
std::size_t nearest_code(std::span<const double> output, const Alphabet& alphabet);

std::string predict_ann(const FeedForwardNet& net, std::string_view observed, Direction direction,
                        const WindowConfig& cfg);

struct AnnEvalOptions {
  Direction direction = Direction::StructureHidden;
  WindowConfig window;
  TrainConfig train;
  ClassMode classes = ClassMode::Eight;
};

// Same contract as evaluate_fold, with the network in place of the HMM.
EvalReport evaluate_ann_fold(const Corpus& corpus, const FoldSpec& fold,
                             const AnnEvalOptions& options);

nlohmann::json to_json(const FeedForwardNet& net, const WindowConfig& cfg, Direction direction);
FeedForwardNet net_from_json(const nlohmann::json& j);

}  // namespace seqhmm
