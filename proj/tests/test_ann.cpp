#include <doctest.h>

#include <cmath>
#include <random>

#include "seqhmm/ann.hpp"
#include "seqhmm/error.hpp"

using namespace seqhmm;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, bool binary = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = binary ? static_cast<double>(rng() % 2) : u(rng);
  return v;
}

// Straight re-evaluation of the affine + logistic chain.
std::vector<double> reference_forward(const FeedForwardNet& net, std::vector<double> x) {
  for (const auto& w : net.weights) {
    std::vector<double> y(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double s = w(r, w.cols() - 1);
      for (std::size_t c = 0; c + 1 < w.cols(); ++c) s += w(r, c) * x[c];
      y[r] = 1.0 / (1.0 + std::exp(-s));
    }
    x = std::move(y);
  }
  return x;
}

double grad_rel_error(FeedForwardNet net, const std::vector<double>& in, const std::vector<double>& target) {
  const auto g = error_gradient(net, in, target);
  const double h = 1e-5;
  double diff2 = 0, a2 = 0, n2 = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t i = 0; i < net.weights[l].data().size(); ++i) {
      double& w = net.weights[l].data()[i];
      const double saved = w;
      w = saved + h;
      const double ep = squared_error(net, in, target);
      w = saved - h;
      const double em = squared_error(net, in, target);
      w = saved;
      const double numeric = (ep - em) / (2 * h);
      const double analytic = g[l].data()[i];
      diff2 += (numeric - analytic) * (numeric - analytic);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
  }
  const double denom = std::max(std::sqrt(a2), std::sqrt(n2));
  return denom == 0.0 ? 0.0 : std::sqrt(diff2) / denom;
}

std::string bits(const std::vector<double>& v, std::size_t from, std::size_t n) {
  std::string s;
  for (std::size_t i = from; i < from + n; ++i) s.push_back(v[i] == 1.0 ? '1' : (v[i] == 0.0 ? '0' : '?'));
  return s;
}

}  // namespace

TEST_SUITE("ann") {
  TEST_CASE("zero weights give one half") {
    auto net = make_net({4, 3, 2});
    std::vector<double> x{1, 0, 1, 1};
    for (double y : net_forward(net, x)) CHECK(y == 0.5);
    CHECK_THROWS_AS(make_net({4}), ShapeMismatch);
  }

  TEST_CASE("single unit with bias") {
    auto net = make_net({1, 1});
    net.weights[0](0, 1) = 1.7;
    std::vector<double> x{3.0};
    CHECK(net_forward(net, x)[0] == doctest::Approx(sigmoid(1.7)).epsilon(1e-15));
  }

  TEST_CASE("shape mismatch") {
    auto net = make_net({3, 2});
    std::vector<double> x{1, 2};
    CHECK_THROWS_AS(net_forward(net, x), ShapeMismatch);
    std::vector<double> in{1, 2, 3}, t{1};
    CHECK_THROWS_AS(backprop_step(net, in, t, 0.1), ShapeMismatch);
  }

  TEST_CASE("forward matches a re-implementation") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
      std::vector<std::size_t> sizes{1 + rng() % 8, 1 + rng() % 6};
      if (k % 2) sizes.insert(sizes.begin() + 1, 1 + rng() % 5);
      auto net = random_net(sizes, 1.0, rng());
      auto x = random_vec(sizes[0], rng);
      auto y = net_forward(net, x);
      auto ref = reference_forward(net, x);
      REQUIRE(y.size() == ref.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(y[i] - ref[i]) <= 1e-12);
        CHECK(y[i] > 0.0);
        CHECK(y[i] < 1.0);
      }
      auto acts = net_activations(net, x);
      CHECK(acts.size() == sizes.size());
      CHECK(acts.front() == x);
    }
  }

  TEST_CASE("gradient check") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
      std::vector<std::size_t> sizes{1 + rng() % 10, 1 + rng() % 5};
      if (k % 2 == 0) sizes.insert(sizes.begin() + 1, 1 + rng() % 6);
      auto net = random_net(sizes, 1.0, rng());
      auto x = random_vec(sizes.front(), rng);
      auto t = random_vec(sizes.back(), rng, true);
      CHECK(grad_rel_error(net, x, t) <= 1e-4);
    }
  }

  TEST_CASE("zero learning rate leaves the net unchanged") {
    auto net = random_net({5, 3, 2}, 0.5, 3);
    auto before = net;
    std::vector<double> x{1, 0, 0, 1, 1}, t{1, 0};
    const double e = backprop_step(net, x, t, 0.0);
    CHECK(net == before);
    CHECK(e == squared_error(before, x, t));
  }

  TEST_CASE("single pattern error decreases to near zero") {
    // Convergence speed near the target scales with the input norm, so use
    // a full 13-residue window rather than a toy vector.
    const auto cfg = WindowConfig::for_direction(Direction::StructureHidden);
    const auto ex = build_windows(LabeledPair{1, "WWWWWWWWWWWWW", "UUUUUUHUUUUUU"}, Direction::StructureHidden, cfg)[6];
    auto net = random_net({cfg.input_size(), 3}, 0.1, 4);
    const auto& x = ex.input;
    const auto& t = ex.target;
    double prev = squared_error(net, x, t);
    int steps = 0;
    while (prev >= 1e-6 && steps < 50000) {
      backprop_step(net, x, t, 0.5);
      const double e = squared_error(net, x, t);
      CHECK(e < prev);
      prev = e;
      ++steps;
    }
    CHECK(prev < 1e-6);
  }

  TEST_CASE("single pattern error is non-increasing on random two-layer nets") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
      auto net = random_net({4, 3, 2}, 0.5, rng());
      auto x = random_vec(4, rng, true);
      auto t = random_vec(2, rng, true);
      double prev = squared_error(net, x, t);
      for (int s = 0; s < 200; ++s) {
        backprop_step(net, x, t, 0.5);
        const double e = squared_error(net, x, t);
        CHECK(e <= prev + 1e-15);
        prev = e;
      }
    }
  }

  TEST_CASE("window layout") {
    auto cfg = WindowConfig::for_direction(Direction::StructureHidden);
    CHECK(cfg.input_size() == 65);
    auto w = build_windows(LabeledPair{1, "A", "H"}, Direction::StructureHidden, cfg);
    REQUIRE(w.size() == 1);
    REQUIRE(w[0].input.size() == 65);
    CHECK(bits(w[0].input, 0, 30) == std::string(30, '0'));
    CHECK(bits(w[0].input, 30, 5) == "00001");
    CHECK(bits(w[0].input, 35, 30) == std::string(30, '0'));
    CHECK(bits(w[0].target, 0, 3) == "001");

    auto ten = build_windows(LabeledPair{1, "ACDEFGHIKL", "HHHEEEUUUT"}, Direction::StructureHidden, cfg);
    CHECK(ten.size() == 10);
    // four pad codes left of position 2
    CHECK(bits(ten[2].input, 0, 20) == std::string(20, '0'));
    CHECK(bits(ten[2].input, 20, 5) == "00001");
    CHECK(bits(ten[2].input, 30, 5) == "00011");

    auto c2 = WindowConfig::for_direction(Direction::SequenceHidden);
    auto m2 = build_windows(LabeledPair{1, "ACD", "HEU"}, Direction::SequenceHidden, c2);
    REQUIRE(m2.size() == 3);
    CHECK(m2[0].input.size() == 39);
    CHECK(m2[0].target.size() == 5);
    CHECK(bits(m2[1].target, 0, 5) == "00010");
  }

  TEST_CASE("nearest code") {
    std::vector<double> half(3, 0.5);
    CHECK(nearest_code(half, structure_alphabet()) == 0);
    std::vector<double> half5(5, 0.5);
    CHECK(nearest_code(half5, residue_alphabet()) == 0);
    std::vector<double> e{0.9, 0.1, 0.2};
    CHECK(structure_alphabet().symbol(nearest_code(e, structure_alphabet())) == 'E');
    // 00000 is not a residue code; the closest legal ones are single-bit codes.
    std::vector<double> zero(5, 0.0);
    CHECK(residue_alphabet().symbol(nearest_code(zero, residue_alphabet())) == 'A');
  }

  TEST_CASE("rigged net predicts a constant") {
    auto cfg = WindowConfig::for_direction(Direction::StructureHidden, 3);
    auto net = make_net({cfg.input_size(), 3});
    net.weights[0](0, cfg.input_size()) = -20;
    net.weights[0](1, cfg.input_size()) = -20;
    net.weights[0](2, cfg.input_size()) = 20;
    CHECK(predict_ann(net, "ACDWY", Direction::StructureHidden, cfg) == "HHHHH");
  }

  TEST_CASE("prediction is total and length preserving") {
    std::mt19937_64 rng(6);
    auto cfg = WindowConfig::for_direction(Direction::SequenceHidden);
    auto net = random_net({cfg.input_size(), 4, 5}, 2.0, 7);
    for (int k = 0; k < 50; ++k) {
      std::string s;
      const std::size_t n = 1 + rng() % 40;
      for (std::size_t i = 0; i < n; ++i) s.push_back(structure_alphabet().symbol(rng() % 8));
      auto p = predict_ann(net, s, Direction::SequenceHidden, cfg);
      CHECK(p.size() == s.size());
      for (char c : p) CHECK(residue_alphabet().contains(c));
    }
  }

  TEST_CASE("training is the literal per-position schedule") {
    WindowConfig w = WindowConfig::for_direction(Direction::StructureHidden, 3);
    TrainConfig t;
    t.iterations_per_position = 7;
    t.epochs = 2;
    t.seed = 9;
    std::vector<LabeledPair> pairs{{1, "ACDE", "HEHU"}, {2, "WY", "TS"}};
    auto net = train_ann(pairs, Direction::StructureHidden, w, t);

    auto manual = random_net({w.input_size(), 3}, t.init_scale, t.seed);
    std::size_t steps = 0;
    for (int e = 0; e < 2; ++e)
      for (const auto& p : pairs)
        for (const auto& ex : build_windows(p, Direction::StructureHidden, w))
          for (int r = 0; r < 7; ++r, ++steps) backprop_step(manual, ex.input, ex.target, t.learning_rate);
    CHECK(steps == 2 * 6 * 7);
    CHECK(net == manual);

    t.iterations_per_position = 0;
    CHECK(train_ann(pairs, Direction::StructureHidden, w, t) == random_net({w.input_size(), 3}, t.init_scale, t.seed));
  }

  TEST_CASE("training is deterministic") {
    WindowConfig w = WindowConfig::for_direction(Direction::SequenceHidden, 5);
    TrainConfig t;
    t.hidden = {4};
    t.iterations_per_position = 20;
    std::vector<LabeledPair> pairs{{1, "ACDEFG", "HHEETU"}};
    CHECK(train_ann(pairs, Direction::SequenceHidden, w, t) == train_ann(pairs, Direction::SequenceHidden, w, t));
    t.shuffled_sgd = true;
    CHECK(train_ann(pairs, Direction::SequenceHidden, w, t) == train_ann(pairs, Direction::SequenceHidden, w, t));
  }

  TEST_CASE("two-symbol toy mapping is learned") {
    WindowConfig w = WindowConfig::for_direction(Direction::StructureHidden, 1);
    TrainConfig t;
    std::string seq, str;
    for (int i = 0; i < 20; ++i) {
      seq += "AC";
      str += "HE";
    }
    auto net = train_ann({{1, seq, str}}, Direction::StructureHidden, w, t);
    CHECK(predict_ann(net, seq, Direction::StructureHidden, w) == str);
  }

  TEST_CASE("training errors") {
    CHECK_THROWS_AS(train_ann({}, Direction::StructureHidden, {}, {}), EmptyTrainingSet);
    WindowConfig even;
    even.window = 4;
    CHECK_THROWS(build_windows(LabeledPair{1, "A", "H"}, Direction::StructureHidden, even));
  }

  TEST_CASE("json round trip") {
    auto net = random_net({6, 2, 3}, 1.0, 8);
    auto j = to_json(net, WindowConfig::for_direction(Direction::StructureHidden), Direction::StructureHidden);
    CHECK(net_from_json(j) == net);
  }
}
