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
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "brain/types.hpp"

namespace brain::workload {

using Rng = std::mt19937_64;

// Bounds and mean of the measured per-request inference time on one GPU.
struct DurationBounds {
    double min_s = 0.0975;
    double mean_s = 18.5421;
    double max_s = 50.6394;
    double sigma = 1.0;  // log-space spread; mu is calibrated to hit mean_s after truncation
};

struct WorkloadConfig {
    double freq = 0.0577;  // fraction of user transactions that are inference requests
    std::uint64_t n_requests = 819;
    std::vector<double> trace;  // non-empty selects trace replay over the sampler
    DurationBounds durations;
    double pareto_shape = 1.16;
    Height timeout_default = 20;
    double user_txs_per_block = 0.9;
    std::uint32_t n_users = 64;
    std::uint64_t input_len_min = 16;
    std::uint64_t input_len_max = 256;
    std::uint64_t output_len_min = 1;
    std::uint64_t output_len_max = 512;
    std::uint64_t fee_headroom = 512;  // feeLimit = |input| + headroom

    void validate() const;
};

// Log-normal truncated to [min, max] with mu chosen so the truncated mean equals the target.
class TruncatedLogNormal {
  public:
    explicit TruncatedLogNormal(const DurationBounds& bounds);

    double sample(Rng& rng) const;
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] double analytic_mean() const noexcept;

    // Mean of exp(N(mu, sigma^2)) conditioned on [lo, hi].
    static double truncated_mean(double mu, double sigma, double lo, double hi);

  private:
    DurationBounds bounds_;
    double mu_;
};

// Per-request inference time: trace replay (wrapping) or the calibrated sampler.
class DurationSource {
  public:
    explicit DurationSource(const WorkloadConfig& cfg);

    double next(Rng& rng);

  private:
    std::vector<double> trace_;
    std::size_t cursor_ = 0;
    std::optional<TruncatedLogNormal> sampler_;
};

// Pareto(x_m = 1, shape) mapped to min(1000, floor((x - 1) * 100)).
int sample_priority(Rng& rng, double shape);

// Monotone priority -> feePrice mapping.
inline Asset fee_price_for(int priority) noexcept { return 1 + priority; }

struct RequestArrival {
    std::uint64_t tick = 0;  // index among user transactions
    InferenceRequest request;
    AccountId payer = 0;
    double duration_s = 0.0;
    std::uint64_t output_len = 0;
};

struct Stream {
    std::vector<RequestArrival> requests;
    std::uint64_t user_txs = 0;  // Plain + Request
    double user_txs_per_block = 1.0;

    [[nodiscard]] std::uint64_t plain_txs() const noexcept { return user_txs - requests.size(); }

    // User transaction `tick` arrives in the interval before this block height (heights start at 1).
    [[nodiscard]] Height block_of(std::uint64_t tick) const noexcept {
        return 1 + static_cast<Height>(static_cast<double>(tick) / user_txs_per_block);
    }
};

// Bernoulli(freq) mixing of user transactions. Stops at n_requests requests, or after
// user_tx_limit user transactions when given. With freq == 0 and no limit, n_requests
// plain transactions are produced.
Stream gen_stream(const WorkloadConfig& cfg, Rng& rng,
                  std::optional<std::uint64_t> user_tx_limit = std::nullopt);

// One decimal duration in seconds per line.
std::vector<double> load_trace(const std::filesystem::path& path);

// Payer accounts used by gen_stream occupy [kFirstUserAccount, kFirstUserAccount + n_users).
inline constexpr AccountId kFirstUserAccount = 10'000;
inline constexpr AccountId kTargetAccount = 9'999;

}  // namespace brain::workload
