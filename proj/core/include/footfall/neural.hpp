#pragma once

// Small fully-connected networks: LeakyReLU hidden layers, Tanh or identity
// head, exact reverse-mode gradients and Adam. Batches are column-major
// matrices with one sample per column.
//
// Everything is templated on the scalar type: training runs in float for
// throughput, inference and gradient checks in double.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <vector>

namespace footfall {

enum class OutputActivation { Tanh, Identity };

template <typename Scalar>
struct BasicMlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  std::vector<int> dims;  // input, hidden..., output
  std::vector<Layer> layers;
  OutputActivation output{OutputActivation::Identity};
  Scalar leaky_slope{Scalar(0.01)};
  /// Bumped by every in-library mutation; forward caches record it.
  std::uint64_t revision{0};

  int input_size() const { return dims.front(); }
  int output_size() const { return dims.back(); }
  std::size_t parameter_count() const;

  /// Throws std::invalid_argument if layer shapes do not chain with dims.
  void validate() const;

  template <typename Other>
  BasicMlp<Other> cast() const {
    BasicMlp<Other> out;
    out.dims = dims;
    out.output = output;
    out.leaky_slope = static_cast<Other>(leaky_slope);
    out.layers.reserve(layers.size());
    for (const auto& l : layers) {
      out.layers.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
    }
    return out;
  }
};

using Mlp = BasicMlp<double>;
using MlpF = BasicMlp<float>;

template <typename Scalar>
struct MlpCache {
  using Matrix = typename BasicMlp<Scalar>::Matrix;

  std::vector<Matrix> inputs;  // activation entering each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
  Matrix output;
  const BasicMlp<Scalar>* owner{nullptr};
  std::uint64_t revision{0};
};

/// Gradients shaped like the parameters, plus the gradient with respect to
/// the network input.
template <typename Scalar>
struct MlpGrads {
  std::vector<typename BasicMlp<Scalar>::Layer> layers;
  typename BasicMlp<Scalar>::Matrix input;
};

/// Fan-in uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
/// Throws std::invalid_argument for fewer than two or non-positive dims.
template <typename Scalar>
BasicMlp<Scalar> mlp_init(const std::vector<int>& dims, std::uint64_t seed,
                          OutputActivation output, double leaky_slope = 0.01);

/// Throws std::invalid_argument on an input row-count mismatch.
template <typename Scalar>
MlpCache<Scalar> mlp_forward(const BasicMlp<Scalar>& p,
                             const typename BasicMlp<Scalar>::Matrix& input);

/// Forward pass without keeping intermediates.
template <typename Scalar>
typename BasicMlp<Scalar>::Matrix mlp_predict(const BasicMlp<Scalar>& p,
                                              const typename BasicMlp<Scalar>::Matrix& input);

/// Reverse-mode gradient of sum(output .* grad_output), summed over the
/// batch. With param_grads == false only the input gradient is produced.
/// Throws std::invalid_argument when the cache does not belong to p (or p
/// changed since the forward pass) or grad_output has the wrong shape.
template <typename Scalar>
MlpGrads<Scalar> mlp_backward(const BasicMlp<Scalar>& p, const MlpCache<Scalar>& cache,
                              const typename BasicMlp<Scalar>::Matrix& grad_output,
                              bool param_grads = true);

template <typename Scalar>
struct AdamState {
  std::vector<typename BasicMlp<Scalar>::Layer> m;
  std::vector<typename BasicMlp<Scalar>::Layer> v;
  std::int64_t step{0};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
};

template <typename Scalar>
AdamState<Scalar> adam_init(const BasicMlp<Scalar>& p);

/// Bias-corrected Adam descent step on p.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, BasicMlp<Scalar>& p, const MlpGrads<Scalar>& grads,
               double lr);

/// target <- (1 - tau) * target + tau * online.
template <typename Scalar>
void polyak_update(BasicMlp<Scalar>& target, const BasicMlp<Scalar>& online, double tau);

using BackwardFn = std::function<MlpGrads<double>(const Mlp&, const MlpCache<double>&,
                                                  const Mlp::Matrix&)>;

/// Compares analytic gradients of output . g (g random) against central
/// differences with step h on a random subsample of at least `samples`
/// parameters plus every input entry. Returns the worst relative error.
double grad_check(const Mlp& p, const Mlp::Vector& input, std::uint64_t seed,
                  int samples = 200, double h = 1e-5, const BackwardFn& backward = {});

}  // namespace footfall
