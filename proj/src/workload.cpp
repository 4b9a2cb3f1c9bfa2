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

#include "brain/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace brain {

Hash256 InferenceRequest::digest() const {
    ByteWriter w;
    w.put_u64(id)
        .put_sized(ByteView{reinterpret_cast<const std::uint8_t*>(net.data()), net.size()})
        .put(ver)
        .put_sized(input)
        .put_u64(seed)
        .put_sized(args)
        .put_u64(target)
        .put_sized(funcsig)
        .put_u64(static_cast<std::uint64_t>(value))
        .put_u64(timeout)
        .put_u64(static_cast<std::uint64_t>(fee_price))
        .put_u64(fee_limit);
    return sha256(w.bytes());
}

}  // namespace brain

namespace brain::workload {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

const Hash256& model_version() {
    static const Hash256 ver = sha256(ByteWriter{}.put("gpt-j-6b/float16").bytes());
    return ver;
}

}  // namespace

void WorkloadConfig::validate() const {
    if (!(freq >= 0.0 && freq < 1.0)) {
        throw std::invalid_argument("workload freq must lie in [0, 1)");
    }
    if (!(durations.min_s <= durations.mean_s && durations.mean_s <= durations.max_s) ||
        durations.min_s <= 0.0) {
        throw std::invalid_argument("duration bounds must satisfy 0 < min <= mean <= max");
    }
    if (pareto_shape <= 0.0) {
        throw std::invalid_argument("pareto shape must be positive");
    }
    if (user_txs_per_block <= 0.0) {
        throw std::invalid_argument("user_txs_per_block must be positive");
    }
    if (n_users == 0 || input_len_min > input_len_max || output_len_min > output_len_max ||
        output_len_max > fee_headroom) {
        throw std::invalid_argument("inconsistent request size bounds");
    }
}

double TruncatedLogNormal::truncated_mean(double mu, double sigma, double lo, double hi) {
    const double la = std::log(lo);
    const double lb = std::log(hi);
    const double mass = normal_cdf((lb - mu) / sigma) - normal_cdf((la - mu) / sigma);
    const double shifted = normal_cdf((lb - mu - sigma * sigma) / sigma) -
                           normal_cdf((la - mu - sigma * sigma) / sigma);
    return std::exp(mu + 0.5 * sigma * sigma) * shifted / mass;
}

TruncatedLogNormal::TruncatedLogNormal(const DurationBounds& bounds) : bounds_(bounds) {
    double lo = std::log(bounds.min_s) - 6.0 * bounds.sigma;
    double hi = std::log(bounds.max_s) + 6.0 * bounds.sigma;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (truncated_mean(mid, bounds.sigma, bounds.min_s, bounds.max_s) < bounds.mean_s) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mu_ = 0.5 * (lo + hi);
}

double TruncatedLogNormal::analytic_mean() const noexcept {
    return truncated_mean(mu_, bounds_.sigma, bounds_.min_s, bounds_.max_s);
}

double TruncatedLogNormal::sample(Rng& rng) const {
    std::lognormal_distribution<double> dist(mu_, bounds_.sigma);
    for (;;) {
        const double x = dist(rng);
        if (x >= bounds_.min_s && x <= bounds_.max_s) {
            return x;
        }
    }
}

DurationSource::DurationSource(const WorkloadConfig& cfg) : trace_(cfg.trace) {
    if (trace_.empty()) {
        sampler_.emplace(cfg.durations);
    }
}

double DurationSource::next(Rng& rng) {
    if (sampler_) {
        return sampler_->sample(rng);
    }
    const double d = trace_[cursor_];
    cursor_ = (cursor_ + 1) % trace_.size();
    return d;
}

int sample_priority(Rng& rng, double shape) {
    if (shape <= 0.0) {
        throw std::invalid_argument("pareto shape must be positive");
    }
    // Inverse CDF of Pareto(1, shape); u in (0, 1].
    const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double x = std::pow(u, -1.0 / shape);
    const double scaled = std::floor((x - 1.0) * 100.0);
    if (!(scaled < kMaxUserPriority)) {
        return kMaxUserPriority;
    }
    return std::max(0, static_cast<int>(scaled));
}

Stream gen_stream(const WorkloadConfig& cfg, Rng& rng, std::optional<std::uint64_t> user_tx_limit) {
    cfg.validate();
    Stream stream;
    stream.user_txs_per_block = cfg.user_txs_per_block;

    if (cfg.freq == 0.0) {
        stream.user_txs = user_tx_limit.value_or(cfg.n_requests);
        return stream;
    }

    DurationSource durations(cfg);
    std::geometric_distribution<std::uint64_t> gap(cfg.freq);
    std::uniform_int_distribution<std::uint64_t> input_len(cfg.input_len_min, cfg.input_len_max);
    std::uniform_int_distribution<std::uint64_t> output_len(cfg.output_len_min, cfg.output_len_max);
    std::uniform_int_distribution<std::uint32_t> payer(0, cfg.n_users - 1);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<Asset> value(0, 10);

    std::uint64_t tick = 0;
    while (stream.requests.size() < cfg.n_requests || user_tx_limit) {
        tick += gap(rng);
        if (user_tx_limit && tick >= *user_tx_limit) {
            tick = *user_tx_limit;
            break;
        }
        RequestArrival a;
        a.tick = tick;
        InferenceRequest& q = a.request;
        q.id = stream.requests.size() + 1;
        q.net = "gpt-j-6b";
        q.ver = model_version();
        q.input.resize(input_len(rng));
        for (auto& b : q.input) {
            b = static_cast<std::uint8_t>(byte(rng));
        }
        q.seed = rng();
        q.args = {0x01, 0x00, 0x80};  // serialized generation args
        q.target = kTargetAccount;
        q.funcsig = {0xa9, 0x05, 0x9c, 0xbb};
        q.value = value(rng);
        q.timeout = cfg.timeout_default;
        q.priority = sample_priority(rng, cfg.pareto_shape);
        q.fee_price = fee_price_for(q.priority);
        q.fee_limit = q.input.size() + cfg.fee_headroom;
        a.payer = kFirstUserAccount + payer(rng);
        a.duration_s = durations.next(rng);
        a.output_len = output_len(rng);
        stream.requests.push_back(std::move(a));
        ++tick;
        if (!user_tx_limit && stream.requests.size() == cfg.n_requests) {
            break;
        }
    }
    stream.user_txs = tick;
    return stream;
}

std::vector<double> load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trace file " + path.string());
    }
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ss(line);
        double d = 0.0;
        if (!(ss >> d) || d < 0.0) {
            throw std::runtime_error("bad duration on line " + std::to_string(lineno) + " of " +
                                     path.string());
        }
        out.push_back(d);
    }
    if (out.empty()) {
        throw std::runtime_error("trace file " + path.string() + " has no durations");
    }
    return out;
}

}  // namespace brain::workload
