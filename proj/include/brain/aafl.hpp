/*
   Copyright 2026 The BRAIN Simulator Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brain/types.hpp"

namespace brain::aafl {

struct ModelWeights {
    std::vector<double> values;

    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const ModelWeights&) const = default;

    // dim as u64 followed by the reals, all little-endian.
    [[nodiscard]] Bytes serialize() const;
    static ModelWeights deserialize(ByteView bytes);
};

// ver = H(serialized weights)
Hash256 version_of(const ModelWeights& w);

struct ModelUpdate {
    ProposalId id = 0;  // assigned by the contract on Suggest
    std::string net;
    Hash256 ver;
    NodeId proposer = kNoNode;
    Height timeout = kNever;
    std::uint64_t round = 0;  // set once aggregated
    Height submitted_at = 0;
};

// Content-addressed weight store. With a directory, every stored blob is also written
// to <dir>/<hex(ver)> and misses fall back to reading that file.
class WeightStore {
  public:
    WeightStore() = default;
    explicit WeightStore(std::filesystem::path dir);

    Hash256 store(const ModelWeights& weights);
    [[nodiscard]] std::optional<ModelWeights> fetch(const Hash256& ver) const;
    [[nodiscard]] bool contains(const Hash256& ver) const;
    [[nodiscard]] std::size_t size() const noexcept { return blobs_.size(); }

  private:
    std::map<Hash256, Bytes> blobs_;
    std::optional<std::filesystem::path> dir_;
};

// Locally computed global model plus the score window a_{r-n+1..r}.
struct WmaState {
    ModelWeights global;
    std::deque<double> window;
    std::uint64_t round = 0;
    std::uint32_t n = 2;
};

// r = 0: global = M_0, window = {a_0 = 1}.
WmaState wma_init(ModelWeights initial, std::uint32_t n);

// Blend weight for a new score given the current window (before the new score is added).
double wma_alpha(const std::deque<double>& window, std::uint32_t n, double score);

// One aggregation round: global <- (1 - alpha) global + alpha M_r. Throws
// std::invalid_argument on dimension mismatch or a non-positive score.
WmaState wma_step(const WmaState& state, const ModelWeights& model, double score);

using History = std::vector<std::pair<ModelWeights, double>>;

// Global model after the whole history, evaluated without the running blend: each model's
// effective weight is built from the score sequence alone and the models are summed once.
// history[0] is (M_0, a_0).
ModelWeights wma_direct(const History& history, std::uint32_t n);

// Effective weight of every history entry in the global model; sums to 1.
std::vector<double> wma_effective_weights(const std::vector<double>& scores, std::uint32_t n);

// Plain score-weighted mean over the trailing window of the history. Coincides with the
// iterated blend while the round index is below n and drifts from it afterwards.
ModelWeights windowed_mean(const History& history, std::uint32_t n);

// ---- desk-scale learning task ------------------------------------------------------------

// y = w* . x + noise with x ~ N(0, I); w* is shared by every node.
struct LinearTask {
    std::vector<double> w_star;
    double noise_sigma = 0.1;

    static LinearTask make(std::size_t dim, std::uint64_t seed, double noise_sigma = 0.1);
};

struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<double> y;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
};

Dataset make_dataset(const LinearTask& task, std::uint64_t seed, std::size_t samples);

double mse(const ModelWeights& w, const Dataset& data);

// Fraction of samples where sign(w . x) matches sign(y), in basis points [0, 10000].
std::int64_t sign_accuracy_bp(const ModelWeights& w, const Dataset& data);

// Full-batch gradient descent on the mean squared error.
ModelWeights train_local(const ModelWeights& start, const Dataset& data, std::uint32_t steps,
                         double learning_rate = 0.05);

}  // namespace brain::aafl
