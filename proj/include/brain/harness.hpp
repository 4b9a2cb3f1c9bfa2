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
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "brain/contract.hpp"
#include "brain/economics.hpp"
#include "brain/simchain.hpp"
#include "brain/workload.hpp"

namespace brain::harness {

enum class Baseline { Brain, Naive, None };
enum class SweepAxis { Freq, QuorumCommit, Difficulty, Timeout };

const char* to_string(Baseline b) noexcept;
const char* to_string(SweepAxis a) noexcept;
Baseline parse_baseline(const std::string& s);
SweepAxis parse_axis(const std::string& s);  // throws std::invalid_argument on unknown names

struct ExperimentConfig {
    simchain::ChainParams chain;
    contract::HyperParams params;
    workload::WorkloadConfig workload;
    std::uint32_t nodes = 21;
    std::uint32_t repetitions = 10;
    std::uint64_t seed = 1;
    std::optional<SweepAxis> axis;
    std::vector<double> values;
    Baseline baseline = Baseline::Brain;
    bool full_verify = false;
    std::uint32_t non_revealers = 0;
    std::uint32_t deviant_revealers = 0;
    Height max_blocks = 100'000'000;
    std::string config_id = "default";

    void validate() const;

    [[nodiscard]] nlohmann::json to_json() const;
    // Missing keys keep their defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
};

// Applies one sweep point. Q_C sweeps move Q_R with it; difficulty values are exponents k
// for d = 2^k.
void apply_axis(ExperimentConfig& cfg, SweepAxis axis, double value);

struct LatencyStats {
    Height min = 0;
    double avg = 0.0;
    Height max = 0;
    double stddev = 0.0;
    std::size_t count = 0;
};

// Completed tasks over summed transaction execution time. Plain transactions and executed
// requests are tasks; every included transaction contributes base_tx_exec_ms.
double tasks_per_second(const simchain::EventLog& log);

// Execute height minus Request height over executed requests.
LatencyStats latency_stats(const simchain::EventLog& log);

// Single-phase design: each request transaction runs for its full inference duration.
double naive_baseline(const workload::Stream& stream, double base_tx_exec_ms);

// Closed forms used as oracles.
double oracle_tasks_per_second(double freq, std::uint32_t quorum_commit, std::uint32_t quorum_reveal);
double oracle_naive(double freq, double mean_duration_s, double base_tx_exec_ms);

struct RunResult {
    std::uint64_t seed = 0;
    double tasks_per_second = 0.0;
    std::uint64_t timeouts = 0;
    std::uint64_t executed = 0;
    std::uint64_t requests = 0;
    LatencyStats latency;
    std::uint64_t total_gas = 0;
    Height blocks = 0;
    std::size_t max_block_fill = 0;
    Asset assets_before = 0;
    Asset assets_after = 0;
    bool resolved = true;  // every request executed, cancelled or timed out

    [[nodiscard]] bool conserved() const noexcept { return assets_before == assets_after; }
};

struct RunArtifacts {
    simchain::EventLog log;
    std::vector<economics::GasMeter::Entry> gas;
};

// One simulation of `cfg` (sweep axis ignored) under `seed`.
RunResult run_once(const ExperimentConfig& cfg, std::uint64_t seed, RunArtifacts* artifacts = nullptr);

struct SweepRow {
    std::string config_id;
    std::string axis;
    double axis_value = 0.0;
    std::string repetition;  // index, or "mean" / "sd" for aggregate rows
    std::optional<std::uint64_t> seed;
    double tasks_per_second = 0.0;
    double timeouts = 0.0;
    double latency_min = 0.0;
    double latency_avg = 0.0;
    double latency_max = 0.0;
    double total_gas = 0.0;
};

struct SweepPoint {
    double axis_value = 0.0;
    std::vector<RunResult> runs;

    [[nodiscard]] double mean_tps() const;
    [[nodiscard]] double mean_timeouts() const;
    [[nodiscard]] double mean_latency() const;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<SweepRow> rows;

    [[nodiscard]] bool all_conserved() const;
    [[nodiscard]] bool all_within_capacity(std::uint32_t txs_per_block) const;
};

// Seeds are cfg.seed + repetition. `workers` > 1 runs simulations on a thread pool.
SweepResult run_sweep(const ExperimentConfig& cfg, unsigned workers = 1);

// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_stddev(const std::vector<double>& values);

void write_csv_header(std::ostream& os);
void write_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// ---- federated training demo -------------------------------------------------------

struct FlDemoConfig {
    std::uint32_t nodes = 21;
    std::size_t dim = 16;
    std::uint32_t rounds = 50;  // accepted updates to reach
    std::uint32_t wma_window = 4;
    std::uint32_t local_steps = 20;
    std::size_t train_samples = 64;
    std::size_t validation_samples = 256;
    std::size_t holdout_samples = 1000;
    std::uint64_t seed = 7;
    contract::HyperParams params;  // training quorums and difficulty
    std::uint32_t lazy_scorers = 0;
    std::int64_t lazy_bias = 2000;
    Height max_blocks = 20'000;
};

struct FlDemoResult {
    std::vector<double> holdout_loss;  // index r: loss of the global model after round r
    std::uint32_t accepted = 0;
    std::uint32_t rejected = 0;
    bool consistent = true;  // every honest node's global model byte-identical each round
    Height blocks = 0;
    bool conserved = true;
};

FlDemoResult run_fl_demo(const FlDemoConfig& cfg);

}  // namespace brain::harness
