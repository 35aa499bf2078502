#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ivs/geometry.hpp"
#include "ivs/image.hpp"
#include "ivs/workspace.hpp"

namespace ivs {

struct ConvSpec {
  int kernel = 3;
  int channels = 8;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Valid convolutions (stride 1) each followed by ReLU and 2x2 max pooling,
// then one dense head per subtask: dense(hidden) + ReLU + dropout + dense(3).
struct Architecture {
  int input_size = 150;
  int input_channels = 3;
  std::vector<ConvSpec> convs{{5, 8}, {5, 16}, {3, 32}};
  int hidden = 128;
  double dropout = 0.5;

  static Architecture standard() { return {}; }
  // 16x16 variant for gradient checks.
  static Architecture reduced() { return {16, 3, {{3, 4}, {2, 6}, {2, 8}}, 16, 0.5}; }

  // Side length of the map after each conv+pool stage.
  std::vector<int> stage_sizes() const;
  int feature_size() const;
  std::size_t parameter_count() const;
  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class Mode { train, eval };

struct NetOutput {
  Pose2 action;
  double phi_prob = 0.5;
  double logit = 0.0;
};

// One training example in network input form (CHW, values in [0, 1]).
template <class S>
struct Example {
  std::vector<S> input;
  Pose2 action;
  int termination = 0;
};

template <class S>
std::vector<S> to_input(const Image& img);

// A single ensemble member. All parameters live in one flat vector; the conv
// blocks come first and are used by both subtask heads.
template <class S>
class Network {
 public:
  struct Slice {
    std::size_t offset = 0;
    std::size_t size = 0;
  };
  struct HeadLayout {
    Slice w1, b1, w2, b2;
  };

  Network() : Network(Architecture::standard()) {}
  explicit Network(Architecture arch);

  // Glorot-uniform weights, zero biases.
  void init(std::uint64_t seed);

  const Architecture& arch() const { return arch_; }
  std::vector<S>& params() { return params_; }
  const std::vector<S>& params() const { return params_; }
  Slice conv_weights(int layer) const { return conv_w_[layer]; }
  Slice conv_bias(int layer) const { return conv_b_[layer]; }
  const HeadLayout& head(Subtask s) const { return heads_[s == Subtask::pick ? 0 : 1]; }
  std::size_t conv_parameter_count() const;

  // Train mode draws an inverted-dropout mask from `dropout_seed`.
  NetOutput forward(std::span<const S> input, Subtask subtask, Mode mode = Mode::eval,
                    std::uint64_t dropout_seed = 0) const;
  NetOutput forward(const Image& img, Subtask subtask) const;

  // Flattened conv features for an input (shared by both heads).
  std::vector<S> features(std::span<const S> input) const;

  // Mean over the batch of |a_pred - a|^2 + mu * CE(clamped p, phi).
  // Adds d(loss)/d(params) into `grad` (resized and zeroed when empty). Each
  // example i uses dropout seed (dropout_seed, i) in train mode.
  double loss_and_gradient(std::span<const Example<S>* const> batch, Subtask subtask, double mu,
                           Mode mode, std::uint64_t dropout_seed, std::vector<S>* grad) const;
  double loss(std::span<const Example<S>* const> batch, Subtask subtask, double mu, Mode mode,
              std::uint64_t dropout_seed = 0) const {
    return loss_and_gradient(batch, subtask, mu, mode, dropout_seed, nullptr);
  }

 private:
  Architecture arch_;
  std::vector<S> params_;
  std::vector<Slice> conv_w_, conv_b_;
  HeadLayout heads_[2];
};

inline constexpr double kProbClamp = 1e-7;

extern template class Network<float>;
extern template class Network<double>;
extern template std::vector<float> to_input<float>(const Image&);
extern template std::vector<double> to_input<double>(const Image&);

}  // namespace ivs
