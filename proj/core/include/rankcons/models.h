// Copyright 2026 The rankcons Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RANKCONS_MODELS_H_
#define RANKCONS_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rankcons {

/// Feedforward scorer over the interaction features phi(u, x).
///
/// Hidden layers use tanh, the output layer is a single linear unit (the
/// logit). Coordinates of phi whose mask bit is false never reach the first
/// layer and never receive gradient, which is how the capacity tiers
/// (small / med / full feature sets) are realised.
///
/// Parameters live in one flat array, layer by layer: the weight matrix of
/// each layer in row-major (out x in) order followed by its bias vector.
class Predictor {
 public:
  // Scratch buffers reused across forward/backward calls.
  struct Workspace {
    std::vector<double> phi;
    std::vector<std::vector<double>> activations;
    std::vector<double> delta;
    std::vector<double> next_delta;
    double output_without_bias = 0.0;  // final logit minus the output bias
  };

  Predictor() = default;
  /// Zero-initialised. `layer_dims` = (input, hidden..., 1); input must equal mask size.
  Predictor(std::vector<bool> feature_mask, std::vector<std::size_t> layer_dims);

  /// Glorot-uniform weights over the active inputs, zero biases.
  static Predictor initialized(std::vector<bool> feature_mask,
                               std::vector<std::size_t> layer_dims, std::uint64_t seed);

  const std::vector<bool>& feature_mask() const { return mask_; }
  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  double mask_fraction() const;

  /// Logit for a precomputed phi vector.
  double forward_phi(std::span<const double> phi) const;
  double forward_phi(std::span<const double> phi, Workspace& ws) const;
  /// Logit for a (user, item) pair; phi is built internally.
  double forward(std::span<const double> user, std::span<const double> item) const;
  double forward(std::span<const double> user, std::span<const double> item,
                 Workspace& ws) const;
  /// sigma(forward(user, item)).
  double predict_prob(std::span<const double> user, std::span<const double> item) const;

  /// Adds d(loss)/d(params) into `grad`, given d(loss)/d(logit), using the
  /// activations left in `ws` by the immediately preceding forward call.
  void backward(double dlogit, std::span<double> grad, Workspace& ws) const;

  friend bool operator==(const Predictor&, const Predictor&) = default;

 private:
  void check_shape() const;

  std::vector<bool> mask_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;  // start of each layer in params_
  std::vector<double> params_;
};

enum class LossKind { kLogloss, kDistill, kRankNet };

std::string_view to_string(LossKind kind);
/// Throws ConfigError for an unknown name.
LossKind parse_loss_kind(std::string_view name);

/// One training example. The spans point into storage owned elsewhere (the
/// world corpus and request stream) so large datasets stay cheap.
///
/// `target` is the click label for logloss, the teacher logit for distill,
/// and the chunk label for ranknet.
struct Example {
  std::span<const double> user;
  std::span<const double> item;
  double target = 0.0;
};

using PointDataset = std::vector<Example>;

// All items of one request; ranknet pairs never cross groups.
struct Group {
  std::vector<Example> items;
};

using GroupDataset = std::vector<Group>;

inline constexpr double kProbClamp = 1e-12;

/// -[y log p + (1-y) log(1-p)] with p clamped to [1e-12, 1 - 1e-12].
double logloss(double prob, double label);
/// d logloss(sigma(z), y) / dz; zero where the clamp is active.
double logloss_grad_logit(double logit, double label);

/// (1/N) sum (rank - pre)^2. Throws DataError for empty or unequal inputs.
double distill_loss(std::span<const double> logits_rank,
                    std::span<const double> logits_pre);
/// Gradient with respect to `logits_pre`; the teacher side is constant.
std::vector<double> distill_grad(std::span<const double> logits_rank,
                                 std::span<const double> logits_pre);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// Sum over ordered pairs with labels[i] > labels[j] of log(1 + exp(-(s_i - s_j))).
double ranknet_loss(std::span<const double> scores, std::span<const double> labels);
std::vector<double> ranknet_grad(std::span<const double> scores,
                                 std::span<const double> labels);
std::size_t ranknet_pair_count(std::span<const double> labels);

/// Chunk labels for a list already sorted best-first by the teacher.
///
/// Without a boundary the list is cut into `chunks` contiguous, near-equal
/// pieces; when the split is uneven the bottom chunks are the larger ones.
/// With a boundary (two chunks only) the first `top_boundary` items get
/// label 2 and the rest label 1. Labels run from `chunks` (best) down to 1.
std::vector<int> assign_chunks(std::size_t list_length, std::size_t chunks,
                               std::optional<std::size_t> top_boundary = std::nullopt);

/// rank_prob * opt_bid / init_bid: the quantity an LTR model orders by.
double ltr_target(double rank_prob, double opt_bid, double init_bid);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  LossKind loss = LossKind::kLogloss;
  std::size_t chunks = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainResult {
  Predictor model;
  // Full-dataset loss before training, then after every epoch.
  std::vector<double> loss_trace;
};

/// Full-dataset objective: mean logloss, or the distill mean square error.
double dataset_loss(const Predictor& p, LossKind kind, const PointDataset& data);
/// Ranknet objective: total pair loss divided by the total pair count.
double dataset_loss(const Predictor& p, const GroupDataset& data);

std::vector<double> dataset_gradient(const Predictor& p, LossKind kind,
                                     const PointDataset& data);
std::vector<double> dataset_gradient(const Predictor& p, const GroupDataset& data);

/// Minibatch gradient descent with a seeded per-epoch shuffle.
/// Throws DataError when the loss becomes NaN.
TrainResult train(Predictor init, const PointDataset& data, const TrainConfig& cfg);
TrainResult train(Predictor init, const GroupDataset& data, const TrainConfig& cfg);

/// Max over parameters of |g_fd - g_an| / max(1e-8, |g_fd| + |g_an|), with
/// g_fd from central differences of the full-dataset objective.
double finite_diff_check(const Predictor& p, LossKind kind, const PointDataset& data,
                         double eps = 1e-5);
double finite_diff_check(const Predictor& p, const GroupDataset& data,
                         double eps = 1e-5);

}  // namespace rankcons

#endif  // RANKCONS_MODELS_H_
