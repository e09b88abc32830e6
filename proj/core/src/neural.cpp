#include "footfall/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace footfall {

template <typename Scalar>
std::size_t BasicMlp<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

template <typename Scalar>
void BasicMlp<Scalar>::validate() const {
  if (dims.size() < 2 || layers.size() != dims.size() - 1) {
    throw std::invalid_argument("mlp: layer count does not match dims");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weight.rows() != dims[i + 1] || l.weight.cols() != dims[i] || l.bias.size() != dims[i + 1]) {
      throw std::invalid_argument("mlp: layer " + std::to_string(i) + " shape does not chain with dims");
    }
  }
}

namespace {

template <typename Matrix, typename Scalar>
void leaky_inplace(Matrix& z, Scalar slope) {
  z = z.cwiseMax(slope * z);
}

}  // namespace

template <typename Scalar>
BasicMlp<Scalar> mlp_init(const std::vector<int>& dims, std::uint64_t seed, OutputActivation output,
                          double leaky_slope) {
  if (dims.size() < 2) throw std::invalid_argument("mlp_init: need at least input and output dims");
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("mlp_init: dims must be positive");
  }
  BasicMlp<Scalar> p;
  p.dims = dims;
  p.output = output;
  p.leaky_slope = static_cast<Scalar>(leaky_slope);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    std::uniform_real_distribution<double> u(-bound, bound);
    typename BasicMlp<Scalar>::Layer layer;
    layer.weight.resize(dims[i + 1], dims[i]);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = static_cast<Scalar>(u(rng));
      }
    }
    layer.bias = BasicMlp<Scalar>::Vector::Zero(dims[i + 1]);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <typename Scalar>
MlpCache<Scalar> mlp_forward(const BasicMlp<Scalar>& p,
                             const typename BasicMlp<Scalar>::Matrix& input) {
  if (input.rows() != p.input_size()) {
    throw std::invalid_argument("mlp_forward: expected " + std::to_string(p.input_size()) +
                                " input rows, got " + std::to_string(input.rows()));
  }
  MlpCache<Scalar> cache;
  cache.owner = &p;
  cache.revision = p.revision;
  cache.inputs.reserve(p.layers.size());
  cache.pre.reserve(p.layers.size());

  typename BasicMlp<Scalar>::Matrix a = input;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& l = p.layers[i];
    typename BasicMlp<Scalar>::Matrix z(l.weight.rows(), a.cols());
    z.noalias() = l.weight * a;
    z.colwise() += l.bias;
    cache.inputs.push_back(std::move(a));
    cache.pre.push_back(z);
    if (i + 1 < p.layers.size()) {
      leaky_inplace(z, p.leaky_slope);
    } else if (p.output == OutputActivation::Tanh) {
      z = z.array().tanh().matrix();
    }
    a = std::move(z);
  }
  cache.output = std::move(a);
  return cache;
}

template <typename Scalar>
typename BasicMlp<Scalar>::Matrix mlp_predict(const BasicMlp<Scalar>& p,
                                              const typename BasicMlp<Scalar>::Matrix& input) {
  if (input.rows() != p.input_size()) {
    throw std::invalid_argument("mlp_predict: expected " + std::to_string(p.input_size()) +
                                " input rows, got " + std::to_string(input.rows()));
  }
  typename BasicMlp<Scalar>::Matrix a = input;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& l = p.layers[i];
    typename BasicMlp<Scalar>::Matrix z(l.weight.rows(), a.cols());
    z.noalias() = l.weight * a;
    z.colwise() += l.bias;
    if (i + 1 < p.layers.size()) {
      leaky_inplace(z, p.leaky_slope);
    } else if (p.output == OutputActivation::Tanh) {
      z = z.array().tanh().matrix();
    }
    a = std::move(z);
  }
  return a;
}

template <typename Scalar>
MlpGrads<Scalar> mlp_backward(const BasicMlp<Scalar>& p, const MlpCache<Scalar>& cache,
                              const typename BasicMlp<Scalar>::Matrix& grad_output,
                              bool param_grads) {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  if (cache.owner != &p || cache.revision != p.revision) {
    throw std::invalid_argument("mlp_backward: cache is stale or belongs to another network");
  }
  if (cache.pre.size() != p.layers.size() || grad_output.rows() != cache.output.rows() ||
      grad_output.cols() != cache.output.cols()) {
    throw std::invalid_argument("mlp_backward: gradient shape does not match the forward pass");
  }

  MlpGrads<Scalar> g;
  if (param_grads) g.layers.resize(p.layers.size());

  Matrix delta;
  if (p.output == OutputActivation::Tanh) {
    delta = (grad_output.array() * (Scalar(1) - cache.output.array().square())).matrix();
  } else {
    delta = grad_output;
  }

  for (std::size_t k = p.layers.size(); k-- > 0;) {
    const auto& l = p.layers[k];
    if (param_grads) {
      g.layers[k].weight.noalias() = delta * cache.inputs[k].transpose();
      g.layers[k].bias = delta.rowwise().sum();
    }
    Matrix back(l.weight.cols(), delta.cols());
    back.noalias() = l.weight.transpose() * delta;
    if (k == 0) {
      g.input = std::move(back);
    } else {
      const auto& z = cache.pre[k - 1];
      delta = (z.array() > Scalar(0)).select(back.array(), p.leaky_slope * back.array()).matrix();
    }
  }
  return g;
}

template <typename Scalar>
AdamState<Scalar> adam_init(const BasicMlp<Scalar>& p) {
  AdamState<Scalar> s;
  for (const auto& l : p.layers) {
    s.m.push_back({BasicMlp<Scalar>::Matrix::Zero(l.weight.rows(), l.weight.cols()),
                   BasicMlp<Scalar>::Vector::Zero(l.bias.size())});
  }
  s.v = s.m;
  return s;
}

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, BasicMlp<Scalar>& p, const MlpGrads<Scalar>& grads,
               double lr) {
  if (state.m.size() != p.layers.size() || grads.layers.size() != p.layers.size()) {
    throw std::invalid_argument("adam_step: optimizer state, parameters and gradients disagree");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const Scalar b1 = static_cast<Scalar>(state.beta1);
  const Scalar b2 = static_cast<Scalar>(state.beta2);
  const Scalar step_size = static_cast<Scalar>(lr / bc1);
  const Scalar inv_sqrt_bc2 = static_cast<Scalar>(1.0 / std::sqrt(bc2));
  const Scalar eps = static_cast<Scalar>(state.epsilon);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m.array() = b1 * m.array() + (Scalar(1) - b1) * g.array();
    v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
    param.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + eps);
  };
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    update(p.layers[i].weight, state.m[i].weight, state.v[i].weight, grads.layers[i].weight);
    update(p.layers[i].bias, state.m[i].bias, state.v[i].bias, grads.layers[i].bias);
  }
  ++p.revision;
}

template <typename Scalar>
void polyak_update(BasicMlp<Scalar>& target, const BasicMlp<Scalar>& online, double tau) {
  if (target.dims != online.dims) throw std::invalid_argument("polyak_update: shape mismatch");
  const Scalar t = static_cast<Scalar>(tau);
  const Scalar keep = static_cast<Scalar>(1.0 - tau);
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    target.layers[i].weight = keep * target.layers[i].weight + t * online.layers[i].weight;
    target.layers[i].bias = keep * target.layers[i].bias + t * online.layers[i].bias;
  }
  ++target.revision;
}

namespace {

// Sign pattern of every hidden pre-activation; a change means a finite
// difference straddled a LeakyReLU kink.
std::vector<bool> kink_signature(const Mlp& p, const Mlp::Matrix& x) {
  const auto cache = mlp_forward(p, x);
  std::vector<bool> sig;
  for (std::size_t k = 0; k + 1 < cache.pre.size(); ++k) {
    for (Eigen::Index i = 0; i < cache.pre[k].size(); ++i) sig.push_back(cache.pre[k](i) > 0.0);
  }
  return sig;
}

double objective(const Mlp& p, const Mlp::Matrix& x, const Mlp::Matrix& g) {
  return (mlp_predict(p, x).array() * g.array()).sum();
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

double grad_check(const Mlp& p, const Mlp::Vector& input, std::uint64_t seed, int samples,
                  double h, const BackwardFn& backward) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mlp::Matrix g(p.output_size(), 1);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal(rng);

  Mlp net = p;
  Mlp::Matrix x = input;
  const auto cache = mlp_forward(net, x);
  const MlpGrads<double> grads = backward ? backward(net, cache, g) : mlp_backward(net, cache, g);
  const std::vector<bool> base_sig = kink_signature(net, x);

  double worst = 0.0;
  // Central difference on one scalar slot; skipped when it crosses a kink.
  auto probe = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + h;
    const double up = objective(net, x, g);
    const bool kink_up = kink_signature(net, x) != base_sig;
    slot = saved - h;
    const double down = objective(net, x, g);
    const bool kink_down = kink_signature(net, x) != base_sig;
    slot = saved;
    if (kink_up || kink_down) return false;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2.0 * h)));
    return true;
  };

  for (Eigen::Index i = 0; i < x.size(); ++i) probe(x(i), grads.input(i));

  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  for (const auto& l : net.layers) {
    sizes.push_back(static_cast<std::size_t>(l.weight.size()));
    sizes.push_back(static_cast<std::size_t>(l.bias.size()));
    total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  }
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  const std::size_t wanted = std::min<std::size_t>(static_cast<std::size_t>(samples), total);
  std::size_t checked = 0;
  for (std::size_t attempts = 0; checked < wanted && attempts < 20 * wanted + 100; ++attempts) {
    std::size_t idx = total <= static_cast<std::size_t>(samples) ? attempts : pick(rng);
    if (idx >= total) break;
    for (std::size_t block = 0; block < sizes.size(); ++block) {
      if (idx < sizes[block]) {
        const std::size_t layer = block / 2;
        const auto e = static_cast<Eigen::Index>(idx);
        bool ok = block % 2 == 0
                      ? probe(net.layers[layer].weight(e), grads.layers[layer].weight(e))
                      : probe(net.layers[layer].bias(e), grads.layers[layer].bias(e));
        if (ok) ++checked;
        break;
      }
      idx -= sizes[block];
    }
  }
  return worst;
}

#define FOOTFALL_INSTANTIATE(S)                                                                \
  template struct BasicMlp<S>;                                                                    \
  template BasicMlp<S> mlp_init<S>(const std::vector<int>&, std::uint64_t, OutputActivation,      \
                                   double);                                                       \
  template MlpCache<S> mlp_forward<S>(const BasicMlp<S>&, const BasicMlp<S>::Matrix&);            \
  template BasicMlp<S>::Matrix mlp_predict<S>(const BasicMlp<S>&, const BasicMlp<S>::Matrix&);    \
  template MlpGrads<S> mlp_backward<S>(const BasicMlp<S>&, const MlpCache<S>&,                    \
                                       const BasicMlp<S>::Matrix&, bool);                         \
  template AdamState<S> adam_init<S>(const BasicMlp<S>&);                                         \
  template void adam_step<S>(AdamState<S>&, BasicMlp<S>&, const MlpGrads<S>&, double);            \
  template void polyak_update<S>(BasicMlp<S>&, const BasicMlp<S>&, double);

FOOTFALL_INSTANTIATE(float)
FOOTFALL_INSTANTIATE(double)

#undef FOOTFALL_INSTANTIATE

}  // namespace footfall
