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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "brain/workload.hpp"

using namespace brain;
using namespace brain::workload;

namespace {

// Oracle: mean of the truncated log-normal by Simpson integration in log space.
double integrated_mean(double mu, double sigma, double lo, double hi) {
    const int steps = 20'000;
    const double a = std::log(lo);
    const double b = std::log(hi);
    const double h = (b - a) / steps;
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double z = a + i * h;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double pdf = std::exp(-0.5 * ((z - mu) / sigma) * ((z - mu) / sigma));
        num += w * pdf * std::exp(z);
        den += w * pdf;
    }
    return num / den;
}

}  // namespace

TEST_CASE("duration sampler is calibrated to the target mean inside the bounds") {
    const DurationBounds bounds;
    const TruncatedLogNormal tln(bounds);
    CHECK(integrated_mean(tln.mu(), bounds.sigma, bounds.min_s, bounds.max_s) ==
          doctest::Approx(18.5421).epsilon(0.01));
    CHECK(tln.analytic_mean() == doctest::Approx(18.5421).epsilon(0.01));

    Rng rng(1);
    double sum = 0.0;
    const int n = 50'000;
    for (int i = 0; i < n; ++i) {
        const double d = tln.sample(rng);
        REQUIRE(d >= bounds.min_s);
        REQUIRE(d <= bounds.max_s);
        sum += d;
    }
    CHECK(std::abs(sum / n - 18.5421) < 0.5);
}

TEST_CASE("trace replay wraps around") {
    WorkloadConfig cfg;
    cfg.trace = {1.0, 2.0};
    DurationSource src(cfg);
    Rng rng(0);
    CHECK(src.next(rng) == 1.0);
    CHECK(src.next(rng) == 2.0);
    CHECK(src.next(rng) == 1.0);
}

TEST_CASE("trace files hold one duration per line") {
    const auto path = std::filesystem::temp_directory_path() / "brain_trace_test.txt";
    {
        std::ofstream out(path);
        out << "0.5\n1.25\n\n3\n";
    }
    CHECK(load_trace(path) == std::vector<double>{0.5, 1.25, 3.0});
    std::filesystem::remove(path);
    CHECK_THROWS(load_trace(path));
}

TEST_CASE("priorities are clamped and right-skewed") {
    Rng rng(3);
    std::vector<int> draws;
    for (int i = 0; i < 10'000; ++i) {
        const int p = sample_priority(rng, 1.16);
        REQUIRE(p >= 0);
        REQUIRE(p <= 1000);
        draws.push_back(p);
    }
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
    std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
    CHECK(draws[draws.size() / 2] < mean);

    Rng rng2(4);
    int zeros = 0;
    for (int i = 0; i < 1000; ++i) zeros += sample_priority(rng2, 100.0) == 0 ? 1 : 0;
    // P(priority = 0) = P(x < 1.01) = 1 - 1.01^-shape
    const double p0 = 1.0 - std::pow(1.01, -100.0);
    CHECK(std::abs(zeros - 1000 * p0) < 3 * std::sqrt(1000 * p0 * (1 - p0)));

    CHECK(fee_price_for(0) < fee_price_for(1));
    CHECK(fee_price_for(999) < fee_price_for(1000));
}

TEST_CASE("stream request fraction converges to freq") {
    WorkloadConfig cfg;
    Rng rng(5);
    const std::uint64_t n = 100'000;
    const Stream s = gen_stream(cfg, rng, n);
    CHECK(s.user_txs == n);
    const double expected = n * cfg.freq;
    const double sd = std::sqrt(n * cfg.freq * (1 - cfg.freq));
    CHECK(std::abs(static_cast<double>(s.requests.size()) - expected) < 3 * sd);
}

TEST_CASE("stream shape and determinism") {
    WorkloadConfig cfg;
    cfg.n_requests = 200;
    Rng a(9);
    Rng b(9);
    const Stream s1 = gen_stream(cfg, a);
    const Stream s2 = gen_stream(cfg, b);
    REQUIRE(s1.requests.size() == 200);
    REQUIRE(s2.requests.size() == 200);
    for (std::size_t i = 0; i < s1.requests.size(); ++i) {
        const auto& r = s1.requests[i];
        CHECK(r.tick == s2.requests[i].tick);
        CHECK(r.request.digest() == s2.requests[i].request.digest());
        CHECK(r.duration_s == s2.requests[i].duration_s);
        CHECK(r.request.id == i + 1);
        CHECK(r.request.input.size() <= r.request.fee_limit);
        CHECK(r.request.input.size() + r.output_len <= r.request.fee_limit);
        CHECK(r.request.fee_price == fee_price_for(r.request.priority));
        CHECK(r.request.timeout == 20);
        if (i > 0) CHECK(r.tick > s1.requests[i - 1].tick);
    }
    CHECK(s1.user_txs == s1.requests.back().tick + 1);
}

TEST_CASE("zero frequency yields plain transactions only") {
    WorkloadConfig cfg;
    cfg.freq = 0.0;
    Rng rng(1);
    const Stream s = gen_stream(cfg, rng);
    CHECK(s.requests.empty());
    CHECK(s.plain_txs() == cfg.n_requests);
}

TEST_CASE("arrival ticks map to blocks at the configured rate") {
    Stream s;
    s.user_txs_per_block = 2.0;
    CHECK(s.block_of(0) == 1);
    CHECK(s.block_of(1) == 1);
    CHECK(s.block_of(2) == 2);
    CHECK(s.block_of(5) == 3);
}

TEST_CASE("invalid workload configs are rejected") {
    WorkloadConfig cfg;
    cfg.freq = 1.5;
    CHECK_THROWS(cfg.validate());
    cfg = WorkloadConfig{};
    cfg.user_txs_per_block = 0.0;
    CHECK_THROWS(cfg.validate());
}
