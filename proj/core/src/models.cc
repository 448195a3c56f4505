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

#include "rankcons/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankcons/errors.h"
#include "rankcons/synthworld.h"

namespace rankcons {

Predictor::Predictor(std::vector<bool> feature_mask, std::vector<std::size_t> layer_dims)
    : mask_(std::move(feature_mask)), dims_(std::move(layer_dims)) {
  check_shape();
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) active_.push_back(i);
  }
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(count);
    count += dims_[l + 1] * dims_[l] + dims_[l + 1];
  }
  params_.assign(count, 0.0);
}

void Predictor::check_shape() const {
  if (dims_.size() < 2) throw ConfigError("predictor needs at least input and output dims");
  if (dims_.back() != 1) throw ConfigError("predictor output dimension must be 1");
  if (dims_.front() != mask_.size()) {
    throw ConfigError("feature mask length " + std::to_string(mask_.size()) +
                      " does not match input dimension " + std::to_string(dims_.front()));
  }
  for (auto d : dims_) {
    if (d == 0) throw ConfigError("predictor layer dimensions must be positive");
  }
}

Predictor Predictor::initialized(std::vector<bool> feature_mask,
                                 std::vector<std::size_t> layer_dims,
                                 std::uint64_t seed) {
  Predictor p(std::move(feature_mask), std::move(layer_dims));
  Rng rng(derive_seed(seed, streams::kInit));
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < p.dims_.size(); ++l) {
    const std::size_t in = p.dims_[l];
    const std::size_t out = p.dims_[l + 1];
    const std::size_t fan_in = l == 0 ? std::max<std::size_t>(p.active_.size(), 1) : in;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (std::size_t i = 0; i < out * in; ++i) p.params_[offset + i] = uniform(rng);
    offset += out * in + out;
  }
  return p;
}

double Predictor::mask_fraction() const {
  if (mask_.empty()) return 0.0;
  return static_cast<double>(active_.size()) / static_cast<double>(mask_.size());
}

double Predictor::forward_phi(std::span<const double> phi) const {
  thread_local Workspace ws;
  return forward_phi(phi, ws);
}

double Predictor::forward_phi(std::span<const double> phi, Workspace& ws) const {
  if (phi.size() != input_dim()) {
    throw ConfigError("phi dimension " + std::to_string(phi.size()) +
                      " does not match predictor input " + std::to_string(input_dim()));
  }
  if (ws.phi.data() != phi.data()) ws.phi.assign(phi.begin(), phi.end());
  const std::size_t layers = dims_.size() - 1;
  ws.activations.resize(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const double* w = params_.data() + offset;
    const double* b = w + out * in;
    auto& act = ws.activations[l];
    act.resize(out);
    if (l == 0) {
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = w + o * in;
        double z = 0.0;
        for (std::size_t i : active_) z += row[i] * ws.phi[i];
        if (l + 1 == layers) ws.output_without_bias = z;
        act[o] = z + b[o];
      }
    } else {
      const auto& prev = ws.activations[l - 1];
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = w + o * in;
        double z = 0.0;
        for (std::size_t i = 0; i < in; ++i) z += row[i] * prev[i];
        if (l + 1 == layers) ws.output_without_bias = z;
        act[o] = z + b[o];
      }
    }
    if (l + 1 < layers) {
      for (auto& a : act) a = std::tanh(a);
    }
    offset += out * in + out;
  }
  return ws.activations.back()[0];
}

double Predictor::forward(std::span<const double> user,
                          std::span<const double> item) const {
  thread_local Workspace ws;
  return forward(user, item, ws);
}

double Predictor::forward(std::span<const double> user, std::span<const double> item,
                          Workspace& ws) const {
  ws.phi.resize(feature_map_dim(user.size(), item.size()));
  feature_map(user, item, ws.phi);
  return forward_phi(ws.phi, ws);
}

double Predictor::predict_prob(std::span<const double> user,
                               std::span<const double> item) const {
  return sigmoid(forward(user, item));
}

void Predictor::backward(double dlogit, std::span<double> grad, Workspace& ws) const {
  const std::size_t layers = dims_.size() - 1;
  ws.delta.assign(1, dlogit);
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + out * in;
    if (l == 0) {
      for (std::size_t o = 0; o < out; ++o) {
        const double d = ws.delta[o];
        gb[o] += d;
        double* grow = gw + o * in;
        for (std::size_t i : active_) grow[i] += d * ws.phi[i];
      }
      break;
    }
    const auto& input = ws.activations[l - 1];
    ws.next_delta.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = ws.delta[o];
      gb[o] += d;
      double* grow = gw + o * in;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += d * input[i];
        ws.next_delta[i] += row[i] * d;
      }
    }
    for (std::size_t i = 0; i < in; ++i) ws.next_delta[i] *= 1.0 - input[i] * input[i];
    std::swap(ws.delta, ws.next_delta);
  }
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kLogloss:
      return "logloss";
    case LossKind::kDistill:
      return "distill";
    case LossKind::kRankNet:
      return "ranknet";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "logloss") return LossKind::kLogloss;
  if (name == "distill") return LossKind::kDistill;
  if (name == "ranknet") return LossKind::kRankNet;
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

double logloss(double prob, double label) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

double logloss_grad_logit(double logit, double label) {
  const double p = sigmoid(logit);
  if (p < kProbClamp || p > 1.0 - kProbClamp) return 0.0;
  return p - label;
}

double distill_loss(std::span<const double> logits_rank,
                    std::span<const double> logits_pre) {
  if (logits_rank.empty() || logits_rank.size() != logits_pre.size()) {
    throw DataError("distill loss needs two non-empty vectors of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits_rank.size(); ++i) {
    const double diff = logits_rank[i] - logits_pre[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(logits_rank.size());
}

std::vector<double> distill_grad(std::span<const double> logits_rank,
                                 std::span<const double> logits_pre) {
  if (logits_rank.empty() || logits_rank.size() != logits_pre.size()) {
    throw DataError("distill loss needs two non-empty vectors of equal length");
  }
  const double scale = 2.0 / static_cast<double>(logits_rank.size());
  std::vector<double> grad(logits_pre.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = -scale * (logits_rank[i] - logits_pre[i]);
  }
  return grad;
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double ranknet_loss(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("ranknet scores and labels differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] > labels[j]) sum += softplus(-(scores[i] - scores[j]));
    }
  }
  return sum;
}

std::vector<double> ranknet_grad(std::span<const double> scores,
                                 std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("ranknet scores and labels differ in length");
  }
  std::vector<double> grad(scores.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!(labels[i] > labels[j])) continue;
      // d/ds_i softplus(-(s_i - s_j)) = -sigma(-(s_i - s_j))
      const double g = sigmoid(-(scores[i] - scores[j]));
      grad[i] -= g;
      grad[j] += g;
    }
  }
  return grad;
}

std::size_t ranknet_pair_count(std::span<const double> labels) {
  std::size_t pairs = 0;
  for (double a : labels) {
    for (double b : labels) pairs += a > b ? 1 : 0;
  }
  return pairs;
}

std::vector<int> assign_chunks(std::size_t list_length, std::size_t chunks,
                               std::optional<std::size_t> top_boundary) {
  if (chunks < 1) throw ConfigError("chunk count must be >= 1");
  if (chunks > list_length) {
    throw DataError("chunk count " + std::to_string(chunks) + " exceeds list length " +
                    std::to_string(list_length));
  }
  std::vector<int> labels(list_length);
  if (top_boundary) {
    if (chunks != 2) throw ConfigError("a chunk boundary requires exactly two chunks");
    const std::size_t cut = std::min(*top_boundary, list_length);
    for (std::size_t i = 0; i < list_length; ++i) labels[i] = i < cut ? 2 : 1;
    return labels;
  }
  const std::size_t base = list_length / chunks;
  const std::size_t extra = list_length % chunks;
  std::size_t pos = 0;
  // Chunk index 0 is the top; the last `extra` chunks carry one more item.
  for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t size = base + (chunk >= chunks - extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      labels[pos++] = static_cast<int>(chunks - chunk);
    }
  }
  return labels;
}

double ltr_target(double rank_prob, double opt_bid, double init_bid) {
  if (!(opt_bid > 0.0) || !(init_bid > 0.0)) throw DataError("bids must be positive");
  return rank_prob * opt_bid / init_bid;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train.learning_rate must be > 0");
  }
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (loss == LossKind::kRankNet && chunks < 2) {
    throw ConfigError("train.chunks must be >= 2 for ranknet");
  }
}

namespace {

double point_loss(LossKind kind, double logit, double target) {
  switch (kind) {
    case LossKind::kLogloss:
      return logloss(sigmoid(logit), target);
    case LossKind::kDistill: {
      const double diff = target - logit;
      return diff * diff;
    }
    case LossKind::kRankNet:
      break;
  }
  throw ConfigError("ranknet needs a grouped dataset");
}

double point_grad(LossKind kind, double logit, double target) {
  switch (kind) {
    case LossKind::kLogloss:
      return logloss_grad_logit(logit, target);
    case LossKind::kDistill:
      return -2.0 * (target - logit);
    case LossKind::kRankNet:
      break;
  }
  throw ConfigError("ranknet needs a grouped dataset");
}

struct GroupScratch {
  std::vector<double> scores;
  std::vector<double> labels;
};

void score_group(const Predictor& p, const Group& group, Predictor::Workspace& ws,
                 GroupScratch& scratch) {
  scratch.scores.resize(group.items.size());
  scratch.labels.resize(group.items.size());
  for (std::size_t i = 0; i < group.items.size(); ++i) {
    // Pair losses only see score differences, so the output bias is left out
    // to keep the objective exactly invariant to it.
    p.forward(group.items[i].user, group.items[i].item, ws);
    scratch.scores[i] = ws.output_without_bias;
    scratch.labels[i] = group.items[i].target;
  }
}

// Adds the pair-loss gradient of one group, scaled by `scale`, into `grad`.
void accumulate_group(const Predictor& p, const Group& group, double scale,
                      std::span<double> grad, Predictor::Workspace& ws,
                      GroupScratch& scratch) {
  score_group(p, group, ws, scratch);
  const auto dscore = ranknet_grad(scratch.scores, scratch.labels);
  for (std::size_t i = 0; i < group.items.size(); ++i) {
    if (dscore[i] == 0.0) continue;
    p.forward(group.items[i].user, group.items[i].item, ws);
    p.backward(dscore[i] * scale, grad, ws);
  }
}

void check_finite(double loss, std::size_t epoch) {
  if (std::isnan(loss) || std::isinf(loss)) {
    throw DataError("training diverged: loss is " + std::to_string(loss) +
                    " after epoch " + std::to_string(epoch) +
                    "; lower train.learning_rate");
  }
}

std::vector<std::size_t> shuffled(std::size_t count, std::uint64_t seed,
                                  std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, streams::kShuffle, epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

double dataset_loss(const Predictor& p, LossKind kind, const PointDataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  Predictor::Workspace ws;
  double sum = 0.0;
  for (const auto& ex : data) sum += point_loss(kind, p.forward(ex.user, ex.item, ws), ex.target);
  return sum / static_cast<double>(data.size());
}

double dataset_loss(const Predictor& p, const GroupDataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  Predictor::Workspace ws;
  GroupScratch scratch;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& group : data) {
    score_group(p, group, ws, scratch);
    sum += ranknet_loss(scratch.scores, scratch.labels);
    pairs += ranknet_pair_count(scratch.labels);
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

std::vector<double> dataset_gradient(const Predictor& p, LossKind kind,
                                     const PointDataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  Predictor::Workspace ws;
  std::vector<double> grad(p.num_params(), 0.0);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (const auto& ex : data) {
    const double z = p.forward(ex.user, ex.item, ws);
    p.backward(point_grad(kind, z, ex.target) * scale, grad, ws);
  }
  return grad;
}

std::vector<double> dataset_gradient(const Predictor& p, const GroupDataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  Predictor::Workspace ws;
  GroupScratch scratch;
  std::size_t pairs = 0;
  for (const auto& group : data) {
    std::vector<double> labels;
    for (const auto& ex : group.items) labels.push_back(ex.target);
    pairs += ranknet_pair_count(labels);
  }
  std::vector<double> grad(p.num_params(), 0.0);
  if (pairs == 0) return grad;
  const double scale = 1.0 / static_cast<double>(pairs);
  for (const auto& group : data) accumulate_group(p, group, scale, grad, ws, scratch);
  return grad;
}

TrainResult train(Predictor init, const PointDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.loss == LossKind::kRankNet) throw ConfigError("ranknet needs a grouped dataset");
  TrainResult result{std::move(init), {}};
  Predictor& model = result.model;
  result.loss_trace.push_back(dataset_loss(model, cfg.loss, data));
  Predictor::Workspace ws;
  std::vector<double> grad(model.num_params());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled(data.size(), cfg.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const Example& ex = data[order[b]];
        const double z = model.forward(ex.user, ex.item, ws);
        model.backward(point_grad(cfg.loss, z, ex.target) * scale, grad, ws);
      }
      auto params = model.params();
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * grad[i];
    }
    const double loss = dataset_loss(model, cfg.loss, data);
    check_finite(loss, epoch + 1);
    result.loss_trace.push_back(loss);
  }
  return result;
}

TrainResult train(Predictor init, const GroupDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.loss != LossKind::kRankNet) {
    throw ConfigError("grouped datasets train with the ranknet loss only");
  }
  TrainResult result{std::move(init), {}};
  Predictor& model = result.model;
  result.loss_trace.push_back(dataset_loss(model, data));
  Predictor::Workspace ws;
  GroupScratch scratch;
  std::vector<double> grad(model.num_params());
  std::vector<std::size_t> group_pairs(data.size());
  for (std::size_t g = 0; g < data.size(); ++g) {
    std::vector<double> labels;
    for (const auto& ex : data[g].items) labels.push_back(ex.target);
    group_pairs[g] = ranknet_pair_count(labels);
  }
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled(data.size(), cfg.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::size_t pairs = 0;
      for (std::size_t b = start; b < stop; ++b) pairs += group_pairs[order[b]];
      if (pairs == 0) continue;
      const double scale = 1.0 / static_cast<double>(pairs);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        accumulate_group(model, data[order[b]], scale, grad, ws, scratch);
      }
      auto params = model.params();
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * grad[i];
    }
    const double loss = dataset_loss(model, data);
    check_finite(loss, epoch + 1);
    result.loss_trace.push_back(loss);
  }
  return result;
}

namespace {

template <typename LossFn>
double compare_gradients(const Predictor& p, std::span<const double> analytic,
                         double eps, LossFn&& loss_at) {
  Predictor probe = p;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.num_params(); ++i) {
    const double original = probe.params()[i];
    probe.params()[i] = original + eps;
    const double up = loss_at(probe);
    probe.params()[i] = original - eps;
    const double down = loss_at(probe);
    probe.params()[i] = original;
    const double fd = (up - down) / (2.0 * eps);
    const double err =
        std::abs(fd - analytic[i]) / std::max(1e-8, std::abs(fd) + std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

double finite_diff_check(const Predictor& p, LossKind kind, const PointDataset& data,
                         double eps) {
  const auto analytic = dataset_gradient(p, kind, data);
  return compare_gradients(p, analytic, eps, [&](const Predictor& probe) {
    return dataset_loss(probe, kind, data);
  });
}

double finite_diff_check(const Predictor& p, const GroupDataset& data, double eps) {
  const auto analytic = dataset_gradient(p, data);
  return compare_gradients(p, analytic, eps,
                           [&](const Predictor& probe) { return dataset_loss(probe, data); });
}

}  // namespace rankcons
