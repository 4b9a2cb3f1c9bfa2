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

#include "brain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "brain/noderuntime.hpp"

namespace brain::harness {

using nlohmann::json;

const char* to_string(Baseline b) noexcept {
    switch (b) {
        case Baseline::Brain: return "brain";
        case Baseline::Naive: return "naive";
        case Baseline::None: return "none";
    }
    return "?";
}

const char* to_string(SweepAxis a) noexcept {
    switch (a) {
        case SweepAxis::Freq: return "freq";
        case SweepAxis::QuorumCommit: return "Q_C";
        case SweepAxis::Difficulty: return "d_I";
        case SweepAxis::Timeout: return "q.timeout";
    }
    return "?";
}

Baseline parse_baseline(const std::string& s) {
    if (s == "brain") return Baseline::Brain;
    if (s == "naive") return Baseline::Naive;
    if (s == "none") return Baseline::None;
    throw std::invalid_argument("unknown baseline '" + s + "' (expected brain, naive or none)");
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "freq") return SweepAxis::Freq;
    if (s == "Q_C" || s == "qc" || s == "quorum") return SweepAxis::QuorumCommit;
    if (s == "d_I" || s == "difficulty") return SweepAxis::Difficulty;
    if (s == "q.timeout" || s == "timeout") return SweepAxis::Timeout;
    throw std::invalid_argument("unknown sweep axis '" + s + "' (expected freq, Q_C, d_I or q.timeout)");
}

// ---- configuration ---------------------------------------------------------------------

namespace {

unsigned log2_of(const U256& d) {
    for (unsigned k = 0; k < 256; ++k) {
        if (U256::pow2(k) == d) {
            return k;
        }
    }
    throw std::invalid_argument("difficulty is not a power of two");
}

json height_or_null(Height h) { return h == kNever ? json(nullptr) : json(h); }

Height height_from(const json& j) { return j.is_null() ? kNever : j.get<Height>(); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw std::invalid_argument(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        out = it->get<T>();
    }
}

void read_height(const json& j, const char* key, Height& out) {
    if (auto it = j.find(key); it != j.end()) {
        out = height_from(*it);
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    chain.validate();
    params.validate(nodes);
    workload.validate();
    if (repetitions == 0) {
        throw std::invalid_argument("repetitions must be at least 1");
    }
    if (non_revealers + deviant_revealers > nodes) {
        throw std::invalid_argument("more adversaries than nodes");
    }
    if (non_revealers > 0 && params.reveal_timeout == kNever) {
        throw std::invalid_argument("non-revealing nodes need a finite reveal timeout T_R");
    }
    if (axis && values.empty()) {
        throw std::invalid_argument("a sweep axis needs at least one value");
    }
}

json ExperimentConfig::to_json() const {
    const auto& p = params;
    const auto& w = workload;
    return json{
        {"config_id", config_id},
        {"nodes", nodes},
        {"repetitions", repetitions},
        {"seed", seed},
        {"baseline", to_string(baseline)},
        {"full_verify", full_verify},
        {"non_revealers", non_revealers},
        {"deviant_revealers", deviant_revealers},
        {"max_blocks", max_blocks},
        {"axis", axis ? json(to_string(*axis)) : json(nullptr)},
        {"values", values},
        {"chain",
         {{"block_interval_s", chain.block_interval_s},
          {"txs_per_block", chain.txs_per_block},
          {"base_tx_exec_ms", chain.base_tx_exec_ms}}},
        {"params",
         {{"epoch_inference", p.epoch_inference},
          {"epoch_training", p.epoch_training},
          {"difficulty_inference_log2", log2_of(p.difficulty_inference)},
          {"difficulty_training_log2", log2_of(p.difficulty_training)},
          {"finality", p.finality},
          {"quorum_commit", p.quorum_commit},
          {"quorum_reveal", p.quorum_reveal},
          {"quorum_commit_training", p.quorum_commit_training},
          {"quorum_reveal_training", p.quorum_reveal_training},
          {"commit_timeout", height_or_null(p.commit_timeout)},
          {"reveal_timeout", height_or_null(p.reveal_timeout)},
          {"execute_timeout", height_or_null(p.execute_timeout)},
          {"update_timeout", height_or_null(p.update_timeout)},
          {"reward_commit", p.reward_commit},
          {"reward_execute", p.reward_execute},
          {"reward_update", p.reward_update},
          {"reward_reveal", p.reward_reveal},
          {"reward_suggest", p.reward_suggest},
          {"penalty_commit", p.penalty_commit},
          {"penalty_reveal", p.penalty_reveal},
          {"penalty_suggest", p.penalty_suggest},
          {"score_threshold", p.score_threshold},
          {"wma_window", p.wma_window},
          {"fallback", p.fallback == contract::FallbackType::ProceedWithRevealed ? "b1" : "b2"},
          {"training_ring_capacity", p.training_ring_capacity},
          {"node_deposit", p.node_deposit}}},
        {"workload",
         {{"freq", w.freq},
          {"n_requests", w.n_requests},
          {"trace", w.trace},
          {"duration_min_s", w.durations.min_s},
          {"duration_mean_s", w.durations.mean_s},
          {"duration_max_s", w.durations.max_s},
          {"duration_sigma", w.durations.sigma},
          {"pareto_shape", w.pareto_shape},
          {"timeout_default", w.timeout_default},
          {"user_txs_per_block", w.user_txs_per_block},
          {"n_users", w.n_users},
          {"input_len_min", w.input_len_min},
          {"input_len_max", w.input_len_max},
          {"output_len_min", w.output_len_min},
          {"output_len_max", w.output_len_max},
          {"fee_headroom", w.fee_headroom}}},
    };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"config_id", "nodes", "repetitions", "seed", "baseline", "full_verify", "non_revealers",
                    "deviant_revealers", "max_blocks", "axis", "values", "chain", "params", "workload"},
                   "config");
    ExperimentConfig cfg;
    read(j, "config_id", cfg.config_id);
    read(j, "nodes", cfg.nodes);
    read(j, "repetitions", cfg.repetitions);
    read(j, "seed", cfg.seed);
    if (auto it = j.find("baseline"); it != j.end()) cfg.baseline = parse_baseline(it->get<std::string>());
    read(j, "full_verify", cfg.full_verify);
    read(j, "non_revealers", cfg.non_revealers);
    read(j, "deviant_revealers", cfg.deviant_revealers);
    read(j, "max_blocks", cfg.max_blocks);
    if (auto it = j.find("axis"); it != j.end() && !it->is_null()) cfg.axis = parse_axis(it->get<std::string>());
    read(j, "values", cfg.values);

    if (auto it = j.find("chain"); it != j.end()) {
        reject_unknown(*it, {"block_interval_s", "txs_per_block", "base_tx_exec_ms"}, "chain");
        read(*it, "block_interval_s", cfg.chain.block_interval_s);
        read(*it, "txs_per_block", cfg.chain.txs_per_block);
        read(*it, "base_tx_exec_ms", cfg.chain.base_tx_exec_ms);
    }
    if (auto it = j.find("params"); it != j.end()) {
        const json& pj = *it;
        reject_unknown(pj,
                       {"epoch_inference", "epoch_training", "difficulty_inference_log2", "difficulty_training_log2",
                        "finality", "quorum_commit", "quorum_reveal", "quorum_commit_training",
                        "quorum_reveal_training", "commit_timeout", "reveal_timeout", "execute_timeout",
                        "update_timeout", "reward_commit", "reward_execute", "reward_update", "reward_reveal",
                        "reward_suggest", "penalty_commit", "penalty_reveal", "penalty_suggest", "score_threshold",
                        "wma_window", "fallback", "training_ring_capacity", "node_deposit"},
                       "params");
        auto& p = cfg.params;
        read(pj, "epoch_inference", p.epoch_inference);
        read(pj, "epoch_training", p.epoch_training);
        if (auto d = pj.find("difficulty_inference_log2"); d != pj.end()) p.difficulty_inference = U256::pow2(d->get<unsigned>());
        if (auto d = pj.find("difficulty_training_log2"); d != pj.end()) p.difficulty_training = U256::pow2(d->get<unsigned>());
        read(pj, "finality", p.finality);
        read(pj, "quorum_commit", p.quorum_commit);
        read(pj, "quorum_reveal", p.quorum_reveal);
        read(pj, "quorum_commit_training", p.quorum_commit_training);
        read(pj, "quorum_reveal_training", p.quorum_reveal_training);
        read_height(pj, "commit_timeout", p.commit_timeout);
        read_height(pj, "reveal_timeout", p.reveal_timeout);
        read_height(pj, "execute_timeout", p.execute_timeout);
        read_height(pj, "update_timeout", p.update_timeout);
        read(pj, "reward_commit", p.reward_commit);
        read(pj, "reward_execute", p.reward_execute);
        read(pj, "reward_update", p.reward_update);
        read(pj, "reward_reveal", p.reward_reveal);
        read(pj, "reward_suggest", p.reward_suggest);
        read(pj, "penalty_commit", p.penalty_commit);
        read(pj, "penalty_reveal", p.penalty_reveal);
        read(pj, "penalty_suggest", p.penalty_suggest);
        read(pj, "score_threshold", p.score_threshold);
        read(pj, "wma_window", p.wma_window);
        if (auto f = pj.find("fallback"); f != pj.end()) {
            const auto s = f->get<std::string>();
            if (s == "b1") {
                p.fallback = contract::FallbackType::ProceedWithRevealed;
            } else if (s == "b2") {
                p.fallback = contract::FallbackType::Requeue;
            } else {
                throw std::invalid_argument("fallback must be b1 or b2");
            }
        }
        read(pj, "training_ring_capacity", p.training_ring_capacity);
        read(pj, "node_deposit", p.node_deposit);
    }
    if (auto it = j.find("workload"); it != j.end()) {
        const json& wj = *it;
        reject_unknown(wj,
                       {"freq", "n_requests", "trace", "trace_file", "duration_min_s", "duration_mean_s",
                        "duration_max_s", "duration_sigma", "pareto_shape", "timeout_default", "user_txs_per_block",
                        "n_users", "input_len_min", "input_len_max", "output_len_min", "output_len_max",
                        "fee_headroom"},
                       "workload");
        auto& w = cfg.workload;
        read(wj, "freq", w.freq);
        read(wj, "n_requests", w.n_requests);
        read(wj, "trace", w.trace);
        if (auto t = wj.find("trace_file"); t != wj.end()) w.trace = workload::load_trace(t->get<std::string>());
        read(wj, "duration_min_s", w.durations.min_s);
        read(wj, "duration_mean_s", w.durations.mean_s);
        read(wj, "duration_max_s", w.durations.max_s);
        read(wj, "duration_sigma", w.durations.sigma);
        read(wj, "pareto_shape", w.pareto_shape);
        read(wj, "timeout_default", w.timeout_default);
        read(wj, "user_txs_per_block", w.user_txs_per_block);
        read(wj, "n_users", w.n_users);
        read(wj, "input_len_min", w.input_len_min);
        read(wj, "input_len_max", w.input_len_max);
        read(wj, "output_len_min", w.output_len_min);
        read(wj, "output_len_max", w.output_len_max);
        read(wj, "fee_headroom", w.fee_headroom);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path.string());
    }
    return from_json(json::parse(in, nullptr, true, /*ignore_comments=*/true));
}

void apply_axis(ExperimentConfig& cfg, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::Freq:
            cfg.workload.freq = value;
            break;
        case SweepAxis::QuorumCommit: {
            const auto q = static_cast<std::uint32_t>(std::lround(value));
            cfg.params.quorum_commit = q;
            cfg.params.quorum_reveal = q;
            break;
        }
        case SweepAxis::Difficulty:
            cfg.params.difficulty_inference = U256::pow2(static_cast<unsigned>(std::lround(value)));
            break;
        case SweepAxis::Timeout:
            cfg.workload.timeout_default = static_cast<Height>(std::llround(value));
            break;
    }
}

// ---- metrics ---------------------------------------------------------------------------

double tasks_per_second(const simchain::EventLog& log) {
    const double total_txs = static_cast<double>(log.plain_txs + log.other_txs);
    if (total_txs == 0.0) {
        return 0.0;
    }
    // Ordered so an all-plain log gives exactly 1000 / base_tx_exec_ms.
    const double tasks = static_cast<double>(log.plain_txs + log.executed_at.size());
    return tasks * 1000.0 / (total_txs * log.base_tx_exec_ms);
}

LatencyStats latency_stats(const simchain::EventLog& log) {
    LatencyStats s;
    std::vector<double> values;
    for (const auto& [id, executed] : log.executed_at) {
        auto it = log.requested_at.find(id);
        if (it == log.requested_at.end()) {
            continue;
        }
        values.push_back(static_cast<double>(executed - it->second));
    }
    if (values.empty()) {
        return s;
    }
    s.count = values.size();
    s.min = static_cast<Height>(*std::min_element(values.begin(), values.end()));
    s.max = static_cast<Height>(*std::max_element(values.begin(), values.end()));
    s.avg = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.stddev = sample_stddev(values);
    return s;
}

double naive_baseline(const workload::Stream& stream, double base_tx_exec_ms) {
    if (stream.user_txs == 0) {
        return 0.0;
    }
    double seconds = static_cast<double>(stream.plain_txs()) * base_tx_exec_ms / 1000.0;
    for (const auto& a : stream.requests) {
        seconds += a.duration_s;
    }
    return static_cast<double>(stream.user_txs) / seconds;
}

double oracle_tasks_per_second(double freq, std::uint32_t quorum_commit, std::uint32_t quorum_reveal) {
    return 1000.0 / (1.0 + static_cast<double>(quorum_commit + quorum_reveal) * freq);
}

double oracle_naive(double freq, double mean_duration_s, double base_tx_exec_ms) {
    return 1.0 / (freq * mean_duration_s + (1.0 - freq) * base_tx_exec_ms / 1000.0);
}

double sample_stddev(const std::vector<double>& values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) {
        acc += (v - mean) * (v - mean);
    }
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

// ---- single run ------------------------------------------------------------------------

namespace {

constexpr Asset kUserEndowment = 10'000'000'000;
constexpr Asset kTreasuryEndowment = 1'000'000'000'000;

AccountId node_addr(NodeId i) { return 1 + i; }

Hash256 genesis_for(std::uint64_t seed) { return sha256(ByteWriter{}.put("genesis").put_u64(seed).bytes()); }

}  // namespace

RunResult run_once(const ExperimentConfig& cfg_in, std::uint64_t seed, RunArtifacts* artifacts) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.baseline == Baseline::None) {
        cfg.workload.freq = 0.0;
    }
    cfg.validate();

    RunResult result;
    result.seed = seed;
    workload::Rng rng(seed);
    const workload::Stream stream = workload::gen_stream(cfg.workload, rng);
    result.requests = stream.requests.size();

    if (cfg.baseline == Baseline::Naive) {
        result.tasks_per_second = naive_baseline(stream, cfg.chain.base_tx_exec_ms);
        result.executed = stream.requests.size();
        return result;
    }

    contract::BrainContract state(cfg.params, genesis_for(seed));
    state.fund_treasury(kTreasuryEndowment);
    for (std::uint32_t u = 0; u < cfg.workload.n_users; ++u) {
        state.mint(workload::kFirstUserAccount + u, kUserEndowment);
    }
    std::unordered_map<RequestId, node::JobSpec> jobs;
    for (const auto& a : stream.requests) {
        jobs.emplace(a.request.id, node::JobSpec{a.duration_s, a.output_len});
    }
    node::JobCatalog catalog = [&jobs](RequestId id) -> std::optional<node::JobSpec> {
        auto it = jobs.find(id);
        if (it == jobs.end()) return std::nullopt;
        return it->second;
    };

    std::vector<std::unique_ptr<node::Node>> nodes;
    nodes.reserve(cfg.nodes);
    for (NodeId i = 0; i < cfg.nodes; ++i) {
        node::NodeConfig nc;
        nc.node_id = i;
        nc.keypair = sortition::keygen_for_index(i);
        nc.addr = node_addr(i);
        if (i < cfg.non_revealers) {
            nc.behavior = node::Behavior::NonRevealer;
        } else if (i < cfg.non_revealers + cfg.deviant_revealers) {
            nc.behavior = node::Behavior::DeviantRevealer;
        }
        nc.local_dataset_seed = seed * 1000 + i;
        state.mint(nc.addr, cfg.params.node_deposit);
        state.register_node(i, nc.keypair.pk, nc.addr);
        nodes.push_back(std::make_unique<node::Node>(std::move(nc), catalog, cfg.chain.block_interval_s));
    }

    economics::GasMeter meter(cfg.full_verify);
    state.set_gas_hook(meter.hook());
    result.assets_before = state.total_assets();

    simchain::Chain chain(cfg.chain, state);
    chain.load_stream(stream);
    for (auto& n : nodes) {
        chain.add_participant(n.get());
    }
    const simchain::EventLog& log = chain.run(cfg.max_blocks);

    result.assets_after = state.total_assets();
    result.tasks_per_second = tasks_per_second(log);
    result.timeouts = log.timed_out;
    result.executed = log.executed_at.size();
    result.latency = latency_stats(log);
    result.total_gas = meter.total_gas();
    result.blocks = chain.height();
    result.max_block_fill = chain.max_block_fill();
    result.resolved = !state.head() && state.revealing().empty() && chain.mempool().empty();
    if (artifacts != nullptr) {
        artifacts->log = log;
        artifacts->gas = meter.entries();
    }
    return result;
}

// ---- sweeps ----------------------------------------------------------------------------

double SweepPoint::mean_tps() const {
    double s = 0.0;
    for (const auto& r : runs) s += r.tasks_per_second;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

double SweepPoint::mean_timeouts() const {
    double s = 0.0;
    for (const auto& r : runs) s += static_cast<double>(r.timeouts);
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

double SweepPoint::mean_latency() const {
    double s = 0.0;
    for (const auto& r : runs) s += r.latency.avg;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

bool SweepResult::all_conserved() const {
    for (const auto& p : points) {
        for (const auto& r : p.runs) {
            if (!r.conserved()) return false;
        }
    }
    return true;
}

bool SweepResult::all_within_capacity(std::uint32_t txs_per_block) const {
    for (const auto& p : points) {
        for (const auto& r : p.runs) {
            if (r.max_block_fill > txs_per_block) return false;
        }
    }
    return true;
}

SweepResult run_sweep(const ExperimentConfig& cfg, unsigned workers) {
    cfg.validate();
    const std::vector<double> values = cfg.axis ? cfg.values : std::vector<double>{0.0};
    const std::string axis_name = cfg.axis ? to_string(*cfg.axis) : "none";

    struct Job {
        std::size_t point;
        std::uint32_t rep;
    };
    std::vector<Job> jobs;
    SweepResult out;
    out.points.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.points[i].axis_value = values[i];
        out.points[i].runs.resize(cfg.repetitions);
        for (std::uint32_t r = 0; r < cfg.repetitions; ++r) {
            jobs.push_back({i, r});
        }
    }

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const Job& job = jobs[k];
            ExperimentConfig point = cfg;
            if (cfg.axis) {
                apply_axis(point, *cfg.axis, values[job.point]);
            }
            out.points[job.point].runs[job.rep] = run_once(point, cfg.seed + job.rep);
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    for (const auto& p : out.points) {
        std::vector<double> tps, to, lmin, lavg, lmax, gas;
        for (std::uint32_t r = 0; r < p.runs.size(); ++r) {
            const RunResult& res = p.runs[r];
            SweepRow row{cfg.config_id, axis_name, p.axis_value, std::to_string(r), res.seed,
                         res.tasks_per_second, static_cast<double>(res.timeouts),
                         static_cast<double>(res.latency.min), res.latency.avg,
                         static_cast<double>(res.latency.max), static_cast<double>(res.total_gas)};
            tps.push_back(row.tasks_per_second);
            to.push_back(row.timeouts);
            lmin.push_back(row.latency_min);
            lavg.push_back(row.latency_avg);
            lmax.push_back(row.latency_max);
            gas.push_back(row.total_gas);
            out.rows.push_back(std::move(row));
        }
        auto mean = [](const std::vector<double>& v) {
            return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        out.rows.push_back(SweepRow{cfg.config_id, axis_name, p.axis_value, "mean", std::nullopt, mean(tps),
                                    mean(to), mean(lmin), mean(lavg), mean(lmax), mean(gas)});
        out.rows.push_back(SweepRow{cfg.config_id, axis_name, p.axis_value, "sd", std::nullopt,
                                    sample_stddev(tps), sample_stddev(to), sample_stddev(lmin),
                                    sample_stddev(lavg), sample_stddev(lmax), sample_stddev(gas)});
    }
    return out;
}

void write_csv_header(std::ostream& os) {
    os << "config_id,axis,axis_value,repetition,seed,tasks_per_second,timeouts,latency_min,latency_avg,"
          "latency_max,total_gas\n";
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    write_csv_header(os);
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        os << r.config_id << ',' << r.axis << ',' << r.axis_value << ',' << r.repetition << ',';
        if (r.seed) os << *r.seed;
        os << ',' << r.tasks_per_second << ',' << r.timeouts << ',' << r.latency_min << ',' << r.latency_avg
           << ',' << r.latency_max << ',' << r.total_gas << '\n';
    }
    os.precision(old);
}

// ---- federated training demo -----------------------------------------------------------

namespace {

// Hands out Suggest transactions round-robin whenever the training pipeline is idle.
class ProposalDriver : public simchain::Participant {
  public:
    ProposalDriver(std::vector<node::Node*> proposers, std::vector<node::Node*> honest,
                   const aafl::Dataset& holdout, FlDemoResult& result)
        : proposers_(std::move(proposers)), honest_(std::move(honest)), holdout_(holdout), result_(result) {}

    void observe(const contract::BrainContract& state, Height h, simchain::Chain& chain) override {
        const auto& accepted = state.accepted_updates();
        while (seen_ < accepted.size()) {
            ++seen_;
            const Bytes reference = honest_.front()->wma()->global.serialize();
            for (const node::Node* n : honest_) {
                if (n->wma()->global.serialize() != reference) {
                    result_.consistent = false;
                }
            }
            result_.holdout_loss.push_back(aafl::mse(honest_.front()->wma()->global, holdout_));
        }
        if (state.training_queue_size() > 0 || !state.revealing_proposals().empty() || in_flight_) {
            return;
        }
        node::Node* proposer = proposers_[next_++ % proposers_.size()];
        simchain::Tx tx = proposer->make_proposal("linear-16", kNever);
        tx.submitted_at_block = h;
        in_flight_ = true;
        chain.submit(std::move(tx), this);
    }

    void on_included(const simchain::Tx& /*tx*/, const contract::TxResult& /*result*/, Height /*h*/) override {
        in_flight_ = false;
    }

  private:
    std::vector<node::Node*> proposers_;
    std::vector<node::Node*> honest_;
    const aafl::Dataset& holdout_;
    FlDemoResult& result_;
    std::size_t next_ = 0;
    std::size_t seen_ = 0;
    bool in_flight_ = false;
};

}  // namespace

FlDemoResult run_fl_demo(const FlDemoConfig& cfg) {
    contract::HyperParams params = cfg.params;
    params.wma_window = cfg.wma_window;
    params.validate(cfg.nodes);
    if (cfg.lazy_scorers >= cfg.nodes) {
        throw std::invalid_argument("at least one honest node is required");
    }

    node::TrainingContext ctx;
    ctx.task = aafl::LinearTask::make(cfg.dim, cfg.seed);
    ctx.train_samples = cfg.train_samples;
    ctx.validation_samples = cfg.validation_samples;
    ctx.local_steps = cfg.local_steps;
    const aafl::Dataset holdout = aafl::make_dataset(ctx.task, cfg.seed ^ 0xfeedULL, cfg.holdout_samples);

    aafl::WeightStore store;
    contract::BrainContract state(params, genesis_for(cfg.seed));
    state.fund_treasury(kTreasuryEndowment);

    aafl::ModelWeights initial;
    initial.values.assign(cfg.dim, 0.0);

    std::vector<std::unique_ptr<node::Node>> nodes;
    std::vector<node::Node*> honest;
    for (NodeId i = 0; i < cfg.nodes; ++i) {
        node::NodeConfig nc;
        nc.node_id = i;
        nc.keypair = sortition::keygen_for_index(i);
        nc.addr = node_addr(i);
        nc.local_dataset_seed = cfg.seed * 1000 + i;
        if (i >= cfg.nodes - cfg.lazy_scorers) {
            nc.behavior = node::Behavior::LazyScorer;
            nc.score_bias = (i % 2 == 0) ? cfg.lazy_bias : -cfg.lazy_bias;
        }
        state.mint(nc.addr, params.node_deposit);
        state.register_node(i, nc.keypair.pk, nc.addr);
        auto n = std::make_unique<node::Node>(std::move(nc), node::JobCatalog{[](RequestId) {
                                                  return std::optional<node::JobSpec>{};
                                              }},
                                              12.06, &ctx, &store);
        n->init_global(initial, cfg.wma_window);
        if (n->config().behavior != node::Behavior::LazyScorer) {
            honest.push_back(n.get());
        }
        nodes.push_back(std::move(n));
    }

    FlDemoResult result;
    result.holdout_loss.push_back(aafl::mse(initial, holdout));
    const Asset before = state.total_assets();

    simchain::Chain chain(simchain::ChainParams{}, state, &store);
    for (auto& n : nodes) {
        chain.add_participant(n.get());
    }
    ProposalDriver driver(honest, honest, holdout, result);
    chain.add_participant(&driver);
    chain.run_until(
        [&](const contract::BrainContract& s) {
            return s.accepted_updates().size() >= cfg.rounds && result.holdout_loss.size() > cfg.rounds;
        },
        cfg.max_blocks);

    result.accepted = static_cast<std::uint32_t>(state.accepted_updates().size());
    for (std::uint64_t id = 1;; ++id) {
        const auto* p = state.proposal(id);
        if (p == nullptr) break;
        if (p->phase == contract::ProposalPhase::Rejected) ++result.rejected;
    }
    result.blocks = chain.height();
    result.conserved = state.total_assets() == before;
    return result;
}

}  // namespace brain::harness
