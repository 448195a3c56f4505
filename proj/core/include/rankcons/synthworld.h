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

#ifndef RANKCONS_SYNTHWORLD_H_
#define RANKCONS_SYNTHWORLD_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rankcons/core.h"

namespace rankcons {

using Rng = std::mt19937_64;

/// SplitMix64-style mixing of a base seed with stream tags. Used to give every
/// (stream, request, item) its own independent RNG so generation order never
/// matters.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

namespace streams {
inline constexpr std::uint64_t kCorpus = 0x636f72707573ULL;
inline constexpr std::uint64_t kTruth = 0x7472757468ULL;
inline constexpr std::uint64_t kRequests = 0x72657173ULL;
inline constexpr std::uint64_t kClicks = 0x636c69636bULL;
inline constexpr std::uint64_t kMasks = 0x6d61736bULL;
inline constexpr std::uint64_t kInit = 0x696e6974ULL;
inline constexpr std::uint64_t kTeacherLabels = 0x7465616368ULL;
inline constexpr std::uint64_t kShuffle = 0x73687566ULL;
}  // namespace streams

struct BidRange {
  double lo = 1.0;
  double hi = 3.0;
};

// Scales of the hidden click and bid-optimisation models.
struct TruthParams {
  double ctr_logit_scale = 1.5;  // stddev of w_ctr . phi
  double ctr_bias = -2.0;
  double opt_logit_scale = 1.0;  // stddev of w_opt . phi
};

enum class Split { kTrain, kEval };

struct WorldConfig {
  std::size_t d = 32;
  std::size_t d_u = 16;
  std::size_t corpus_size = 10000;
  std::size_t requests_per_epoch = 2000;
  std::size_t eval_requests = 500;
  StageSizes sizes{500, 50, 10};
  std::uint64_t seed = 1;
  BidRange bid_range;
  TruthParams truth;

  /// Throws ConfigError on the first violated invariant, naming the field.
  void validate() const;
  /// Dimension of the interaction map phi(u, x).
  std::size_t phi_dim() const { return d_u + d + std::min(d_u, d); }
};

/// phi(u, x) = [u, x, u[0..m) * x[0..m)] with m = min(|u|, |x|).
std::size_t feature_map_dim(std::size_t user_dim, std::size_t item_dim);
void feature_map(std::span<const double> user, std::span<const double> item,
                 std::span<double> out);
std::vector<double> feature_map(std::span<const double> user,
                                std::span<const double> item);

struct GroundTruth {
  std::vector<double> w_ctr;
  double b_ctr = 0.0;
  std::vector<double> w_opt;
};

GroundTruth gen_ground_truth(const WorldConfig& cfg);

/// Items 0..corpus_size-1 with N(0,1) features and uniform init bids.
std::vector<Item> gen_corpus(const WorldConfig& cfg);

/// Uniform sample of n distinct corpus items plus N(0,1) user features.
Request gen_request(const WorldConfig& cfg, std::span<const Item> corpus,
                    RequestId id, Rng& rng);

/// The request stream of one split. Each request draws from its own derived
/// seed, so the stream is reproducible and order independent.
std::vector<Request> gen_requests(const WorldConfig& cfg, std::span<const Item> corpus,
                                  Split split);

double sigmoid(double z);

/// sigma(w_ctr . phi(u, x) + b_ctr). Throws ConfigError on a dimension mismatch.
double true_ctr(const GroundTruth& gt, std::span<const double> user,
                std::span<const double> item);

/// init_bid * (0.5 + 1.5 * sigma(w_opt . phi(u, x))).
double opt_bid(const GroundTruth& gt, double init_bid, std::span<const double> user,
               std::span<const double> item);

/// Bernoulli(p). Throws DataError unless 0 < p < 1.
bool sample_click(double p, Rng& rng);

/// Corpus, hidden truth, and config bundled together; what every stage scores against.
struct World {
  WorldConfig cfg;
  GroundTruth truth;
  std::vector<Item> corpus;

  static World generate(const WorldConfig& cfg);

  /// Throws DataError for an id outside the corpus.
  const Item& item(ItemId id) const;
  double opt_bid(const Request& req, const Item& item) const;
  double true_ctr(const Request& req, const Item& item) const;
};

}  // namespace rankcons

#endif  // RANKCONS_SYNTHWORLD_H_
