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

#include "brain/aafl.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <stdexcept>

namespace brain::aafl {

namespace {

void put_le64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint64_t get_le64(ByteView in, std::size_t offset) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | in[offset + i];
    }
    return v;
}

void require_finite(const ModelWeights& w) {
    for (double v : w.values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("model weights must be finite");
        }
    }
}

}  // namespace

Bytes ModelWeights::serialize() const {
    Bytes out;
    out.reserve(8 + 8 * values.size());
    put_le64(out, values.size());
    for (double v : values) {
        put_le64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

ModelWeights ModelWeights::deserialize(ByteView bytes) {
    if (bytes.size() < 8) {
        throw std::invalid_argument("weight blob shorter than its header");
    }
    const std::uint64_t dim = get_le64(bytes, 0);
    if (bytes.size() != 8 + 8 * dim) {
        throw std::invalid_argument("weight blob length does not match its dimension");
    }
    ModelWeights w;
    w.values.resize(dim);
    for (std::uint64_t i = 0; i < dim; ++i) {
        w.values[i] = std::bit_cast<double>(get_le64(bytes, 8 + 8 * i));
    }
    return w;
}

Hash256 version_of(const ModelWeights& w) { return sha256(w.serialize()); }

WeightStore::WeightStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
}

Hash256 WeightStore::store(const ModelWeights& weights) {
    require_finite(weights);
    Bytes blob = weights.serialize();
    const Hash256 ver = sha256(blob);
    if (dir_) {
        std::ofstream out(*dir_ / ver.hex(), std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
        if (!out) {
            throw std::runtime_error("failed to persist weights " + ver.hex());
        }
    }
    blobs_.insert_or_assign(ver, std::move(blob));
    return ver;
}

std::optional<ModelWeights> WeightStore::fetch(const Hash256& ver) const {
    if (auto it = blobs_.find(ver); it != blobs_.end()) {
        return ModelWeights::deserialize(it->second);
    }
    if (!dir_) {
        return std::nullopt;
    }
    std::ifstream in(*dir_ / ver.hex(), std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    Bytes blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // A file whose content does not hash to its name is treated as absent.
    if (sha256(blob) != ver) {
        return std::nullopt;
    }
    return ModelWeights::deserialize(blob);
}

bool WeightStore::contains(const Hash256& ver) const { return fetch(ver).has_value(); }

WmaState wma_init(ModelWeights initial, std::uint32_t n) {
    if (n < 2) {
        throw std::invalid_argument("WMA window must be at least 2");
    }
    require_finite(initial);
    WmaState s;
    s.global = std::move(initial);
    s.window = {1.0};
    s.round = 0;
    s.n = n;
    return s;
}

double wma_alpha(const std::deque<double>& window, std::uint32_t n, double score) {
    // Window after the push holds min(r + 1, n) scores ending at a_r.
    double sum = score;
    const std::size_t keep = std::min<std::size_t>(window.size(), n - 1);
    for (std::size_t i = window.size() - keep; i < window.size(); ++i) {
        sum += window[i];
    }
    return score / sum;
}

WmaState wma_step(const WmaState& state, const ModelWeights& model, double score) {
    if (model.dim() != state.global.dim()) {
        throw std::invalid_argument("model dimension does not match the global model");
    }
    if (!(score > 0.0) || !std::isfinite(score)) {
        throw std::invalid_argument("aggregation score must be positive and finite");
    }
    require_finite(model);
    const double alpha = wma_alpha(state.window, state.n, score);

    WmaState next = state;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        next.global.values[i] = (1.0 - alpha) * state.global.values[i] + alpha * model.values[i];
    }
    next.window.push_back(score);
    while (next.window.size() > next.n) {
        next.window.pop_front();
    }
    ++next.round;
    return next;
}

std::vector<double> wma_effective_weights(const std::vector<double>& scores, std::uint32_t n) {
    if (n < 2) {
        throw std::invalid_argument("WMA window must be at least 2");
    }
    const std::size_t len = scores.size();
    std::vector<double> alpha(len, 1.0);
    for (std::size_t i = 1; i < len; ++i) {
        const std::size_t lo = i + 1 >= n ? i + 1 - n : 0;
        double sum = 0.0;
        for (std::size_t j = lo; j <= i; ++j) {
            sum += scores[j];
        }
        alpha[i] = scores[i] / sum;
    }
    // w_i = alpha_i * prod_{j > i} (1 - alpha_j)
    std::vector<double> weights(len);
    double tail = 1.0;
    for (std::size_t i = len; i-- > 0;) {
        weights[i] = alpha[i] * tail;
        tail *= 1.0 - alpha[i];
    }
    return weights;
}

ModelWeights wma_direct(const History& history, std::uint32_t n) {
    if (history.empty()) {
        throw std::invalid_argument("history must not be empty");
    }
    std::vector<double> scores;
    scores.reserve(history.size());
    for (const auto& [model, score] : history) {
        if (model.dim() != history.front().first.dim()) {
            throw std::invalid_argument("history models differ in dimension");
        }
        scores.push_back(score);
    }
    const std::vector<double> weights = wma_effective_weights(scores, n);
    ModelWeights out;
    out.values.assign(history.front().first.dim(), 0.0);
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& m = history[i].first.values;
        for (std::size_t k = 0; k < out.values.size(); ++k) {
            out.values[k] += weights[i] * m[k];
        }
    }
    return out;
}

ModelWeights windowed_mean(const History& history, std::uint32_t n) {
    if (history.empty()) {
        throw std::invalid_argument("history must not be empty");
    }
    const std::size_t r = history.size() - 1;
    const std::size_t lo = r + 1 >= n ? r + 1 - n : 0;
    double total = 0.0;
    ModelWeights out;
    out.values.assign(history.front().first.dim(), 0.0);
    for (std::size_t i = lo; i <= r; ++i) {
        total += history[i].second;
        for (std::size_t k = 0; k < out.values.size(); ++k) {
            out.values[k] += history[i].second * history[i].first.values[k];
        }
    }
    for (double& v : out.values) {
        v /= total;
    }
    return out;
}

LinearTask LinearTask::make(std::size_t dim, std::uint64_t seed, double noise_sigma) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    LinearTask t;
    t.w_star.resize(dim);
    for (double& v : t.w_star) {
        v = normal(rng);
    }
    t.noise_sigma = noise_sigma;
    return t;
}

Dataset make_dataset(const LinearTask& task, std::uint64_t seed, std::size_t samples) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset d;
    d.x.resize(samples);
    d.y.resize(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        auto& row = d.x[s];
        row.resize(task.w_star.size());
        double y = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            row[k] = normal(rng);
            y += task.w_star[k] * row[k];
        }
        d.y[s] = y + task.noise_sigma * normal(rng);
    }
    return d;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double mse(const ModelWeights& w, const Dataset& data) {
    if (data.size() == 0) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const double e = dot(w.values, data.x[s]) - data.y[s];
        acc += e * e;
    }
    return acc / static_cast<double>(data.size());
}

std::int64_t sign_accuracy_bp(const ModelWeights& w, const Dataset& data) {
    if (data.size() == 0) {
        return 0;
    }
    std::size_t hits = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const bool predicted = dot(w.values, data.x[s]) >= 0.0;
        const bool actual = data.y[s] >= 0.0;
        hits += predicted == actual ? 1 : 0;
    }
    return static_cast<std::int64_t>(hits * 10000 / data.size());
}

ModelWeights train_local(const ModelWeights& start, const Dataset& data, std::uint32_t steps,
                         double learning_rate) {
    ModelWeights w = start;
    if (data.size() == 0) {
        return w;
    }
    const double scale = 2.0 / static_cast<double>(data.size());
    std::vector<double> grad(w.dim());
    for (std::uint32_t step = 0; step < steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t s = 0; s < data.size(); ++s) {
            const double e = dot(w.values, data.x[s]) - data.y[s];
            for (std::size_t k = 0; k < w.dim(); ++k) {
                grad[k] += e * data.x[s][k];
            }
        }
        for (std::size_t k = 0; k < w.dim(); ++k) {
            w.values[k] -= learning_rate * scale * grad[k];
        }
    }
    return w;
}

}  // namespace brain::aafl
