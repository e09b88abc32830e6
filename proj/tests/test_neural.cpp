#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "footfall/neural.hpp"

using namespace footfall;

namespace {

double leaky(double x, double a) { return x > 0.0 ? x : a * x; }

// Plain-loop forward pass used as the reference.
std::vector<double> reference_forward(const Mlp& p, std::vector<double> x) {
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const auto& l = p.layers[k];
    std::vector<double> y(static_cast<std::size_t>(l.weight.rows()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      double s = l.bias(r);
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) s += l.weight(r, c) * x[static_cast<std::size_t>(c)];
      const bool last = k + 1 == p.layers.size();
      if (!last) {
        s = leaky(s, p.leaky_slope);
      } else if (p.output == OutputActivation::Tanh) {
        s = std::tanh(s);
      }
      y[static_cast<std::size_t>(r)] = s;
    }
    x = std::move(y);
  }
  return x;
}

Mlp::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mlp::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace

TEST_CASE("initialization shapes and ranges") {
  const Mlp p = mlp_init<double>({8, 400, 300, 3}, 1, OutputActivation::Tanh);
  CHECK(p.layers.size() == 3);
  CHECK(p.parameter_count() == 8 * 400 + 400 + 400 * 300 + 300 + 300 * 3 + 3);
  CHECK(p.layers[0].weight.rows() == 400);
  CHECK(p.layers[0].weight.cols() == 8);
  CHECK(p.layers[1].weight.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(400.0));
  CHECK(p.layers[2].bias.isZero());
  const Mlp q = mlp_init<double>({8, 400, 300, 3}, 1, OutputActivation::Tanh);
  CHECK(p.layers[1].weight == q.layers[1].weight);
  const Mlp r = mlp_init<double>({8, 400, 300, 3}, 2, OutputActivation::Tanh);
  CHECK_FALSE(p.layers[1].weight == r.layers[1].weight);
  CHECK_THROWS_AS(mlp_init<double>({8}, 1, OutputActivation::Tanh), std::invalid_argument);
  CHECK_THROWS_AS(mlp_init<double>({8, 0, 3}, 1, OutputActivation::Tanh), std::invalid_argument);
}

TEST_CASE("forward matches a loop implementation") {
  std::mt19937_64 rng(21);
  for (auto head : {OutputActivation::Tanh, OutputActivation::Identity}) {
    Mlp p = mlp_init<double>({5, 7, 6, 2}, 3, head, 0.1);
    for (auto& l : p.layers) l.bias = random_matrix(l.bias.size(), 1, rng);
    const Mlp::Matrix x = random_matrix(5, 4, rng);
    const Mlp::Matrix y = mlp_predict(p, x);
    const MlpCache<double> cache = mlp_forward(p, x);
    CHECK(cache.output == y);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      std::vector<double> in(x.col(c).data(), x.col(c).data() + 5);
      const auto expected = reference_forward(p, in);
      for (std::size_t r = 0; r < expected.size(); ++r) {
        CHECK(y(static_cast<Eigen::Index>(r), c) == doctest::Approx(expected[r]).epsilon(1e-12));
      }
    }
  }
  const Mlp p = mlp_init<double>({5, 4, 2}, 1, OutputActivation::Identity);
  CHECK_THROWS_AS(mlp_predict(p, Mlp::Matrix::Zero(4, 1)), std::invalid_argument);
}

TEST_CASE("backward matches central differences of every parameter") {
  std::mt19937_64 rng(22);
  Mlp p = mlp_init<double>({3, 5, 4, 2}, 7, OutputActivation::Tanh, 0.05);
  for (auto& l : p.layers) l.bias = random_matrix(l.bias.size(), 1, rng) * 0.3;
  const Mlp::Matrix x = random_matrix(3, 6, rng);
  const Mlp::Matrix g = random_matrix(2, 6, rng);
  auto objective = [&](const Mlp& net) { return (mlp_predict(net, x).array() * g.array()).sum(); };

  const MlpGrads<double> grads = mlp_backward(p, mlp_forward(p, x), g);
  const double h = 1e-6;
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    for (Eigen::Index i = 0; i < p.layers[k].weight.size(); ++i) {
      Mlp plus = p;
      Mlp minus = p;
      plus.layers[k].weight.data()[i] += h;
      minus.layers[k].weight.data()[i] -= h;
      const double numeric = (objective(plus) - objective(minus)) / (2.0 * h);
      CHECK(grads.layers[k].weight.data()[i] == doctest::Approx(numeric).epsilon(1e-6));
    }
    for (Eigen::Index i = 0; i < p.layers[k].bias.size(); ++i) {
      Mlp plus = p;
      Mlp minus = p;
      plus.layers[k].bias(i) += h;
      minus.layers[k].bias(i) -= h;
      const double numeric = (objective(plus) - objective(minus)) / (2.0 * h);
      CHECK(grads.layers[k].bias(i) == doctest::Approx(numeric).epsilon(1e-6));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Mlp::Matrix xp = x;
    Mlp::Matrix xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    const double numeric =
        ((mlp_predict(p, xp).array() - mlp_predict(p, xm).array()) * g.array()).sum() / (2.0 * h);
    CHECK(grads.input.data()[i] == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("grad_check passes the real backward and flags a broken one") {
  const Mlp p = mlp_init<double>({4, 9, 3}, 5, OutputActivation::Tanh);
  Mlp::Vector x(4);
  x << 0.3, -0.2, 0.7, 0.1;
  CHECK(grad_check(p, x, 1) <= 1e-4);
  const BackwardFn broken = [](const Mlp& net, const MlpCache<double>& c, const Mlp::Matrix& g) {
    MlpGrads<double> out = mlp_backward(net, c, g);
    out.layers[0].weight *= 1.01;
    return out;
  };
  CHECK(grad_check(p, x, 1, 200, 1e-5, broken) > 1e-3);
}

TEST_CASE("stale caches are rejected") {
  Mlp p = mlp_init<double>({2, 3, 1}, 1, OutputActivation::Identity);
  const MlpCache<double> cache = mlp_forward(p, Mlp::Matrix::Ones(2, 1));
  AdamState<double> opt = adam_init(p);
  adam_step(opt, p, mlp_backward(p, cache, Mlp::Matrix::Ones(1, 1)), 1e-3);
  CHECK_THROWS_AS(mlp_backward(p, cache, Mlp::Matrix::Ones(1, 1)), std::invalid_argument);
  const Mlp other = p;
  CHECK_THROWS_AS(mlp_backward(other, mlp_forward(p, Mlp::Matrix::Ones(2, 1)), Mlp::Matrix::Ones(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("Adam follows the bias-corrected update") {
  Mlp p = mlp_init<double>({1, 1}, 1, OutputActivation::Identity);
  p.layers[0].weight(0, 0) = 0.5;
  p.layers[0].bias(0) = 0.0;
  AdamState<double> opt = adam_init(p);
  double w = 0.5;
  double m = 0.0;
  double v = 0.0;
  const double lr = 0.01;
  for (int t = 1; t <= 5; ++t) {
    MlpGrads<double> g;
    g.layers = {{Mlp::Matrix::Constant(1, 1, 2.0 * w), Mlp::Vector::Zero(1)}};
    adam_step(opt, p, g, lr);
    const double grad = 2.0 * w;
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    w -= lr * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p.layers[0].weight(0, 0) == doctest::Approx(w).epsilon(1e-12));
  }
  CHECK(opt.step == 5);
}

TEST_CASE("Adam minimizes a regression loss") {
  std::mt19937_64 rng(23);
  Mlp p = mlp_init<double>({2, 16, 1}, 4, OutputActivation::Identity);
  AdamState<double> opt = adam_init(p);
  const Mlp::Matrix x = random_matrix(2, 64, rng);
  const Mlp::Matrix y = (x.row(0).array() * 0.7 - x.row(1).array() * 0.3).matrix();
  auto loss = [&] { return (mlp_predict(p, x) - y).squaredNorm() / 64.0; };
  const double before = loss();
  for (int i = 0; i < 500; ++i) {
    const MlpCache<double> c = mlp_forward(p, x);
    adam_step(opt, p, mlp_backward(p, c, Mlp::Matrix((c.output - y) * (2.0 / 64.0))), 1e-2);
  }
  CHECK(loss() < 0.01 * before);
}

TEST_CASE("Polyak averaging interpolates parameters") {
  Mlp target = mlp_init<double>({2, 3, 1}, 1, OutputActivation::Identity);
  const Mlp online = mlp_init<double>({2, 3, 1}, 2, OutputActivation::Identity);
  const Mlp before = target;
  polyak_update(target, online, 0.25);
  for (std::size_t k = 0; k < target.layers.size(); ++k) {
    const Mlp::Matrix expected = 0.75 * before.layers[k].weight + 0.25 * online.layers[k].weight;
    CHECK(target.layers[k].weight.isApprox(expected, 1e-14));
  }
  polyak_update(target, online, 1.0);
  CHECK(target.layers[0].weight == online.layers[0].weight);
}

TEST_CASE("float and double networks agree") {
  const Mlp p = mlp_init<double>({8, 40, 30, 3}, 9, OutputActivation::Tanh);
  const MlpF f = p.cast<float>();
  std::mt19937_64 rng(24);
  const Mlp::Matrix x = random_matrix(8, 5, rng);
  const Mlp::Matrix yd = mlp_predict(p, x);
  const MlpF::Matrix yf = mlp_predict(f, MlpF::Matrix(x.cast<float>()));
  CHECK((yd - yf.cast<double>()).cwiseAbs().maxCoeff() < 1e-5);
}
