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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "brain/economics.hpp"
#include "brain/harness.hpp"

namespace {

using brain::harness::ExperimentConfig;

// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> reps;
    std::optional<std::uint32_t> nodes;
    std::optional<double> freq;
    std::optional<std::uint32_t> n_requests;
    std::optional<std::uint32_t> quorum;
    std::optional<unsigned> difficulty_log2;
    std::optional<std::uint64_t> timeout;
    std::optional<std::uint32_t> epoch;
    std::optional<double> user_txs_per_block;
    std::optional<std::string> baseline;
    std::optional<std::string> config_id;
    bool full_verify = false;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "base RNG seed");
    cmd->add_option("--reps", o.reps, "repetitions per point");
    cmd->add_option("--nodes", o.nodes, "number of nodes");
    cmd->add_option("--freq", o.freq, "inference request frequency");
    cmd->add_option("--requests", o.n_requests, "inference requests per run");
    cmd->add_option("--quorum", o.quorum, "Q_C (Q_R follows)");
    cmd->add_option("--difficulty-log2", o.difficulty_log2, "d_I = 2^k");
    cmd->add_option("--timeout", o.timeout, "q.timeout in blocks");
    cmd->add_option("--epoch", o.epoch, "E_I in blocks");
    cmd->add_option("--user-rate", o.user_txs_per_block, "user transactions per block");
    cmd->add_option("--baseline", o.baseline, "brain, naive or none");
    cmd->add_option("--id", o.config_id, "config_id column value");
    cmd->add_flag("--full-verify", o.full_verify, "charge full VRF verification gas");
}

ExperimentConfig build_config(const Overrides& o) {
    ExperimentConfig cfg = o.config ? ExperimentConfig::load(*o.config) : ExperimentConfig{};
    if (o.seed) cfg.seed = *o.seed;
    if (o.reps) cfg.repetitions = *o.reps;
    if (o.nodes) cfg.nodes = *o.nodes;
    if (o.freq) cfg.workload.freq = *o.freq;
    if (o.n_requests) cfg.workload.n_requests = *o.n_requests;
    if (o.quorum) {
        cfg.params.quorum_commit = *o.quorum;
        cfg.params.quorum_reveal = *o.quorum;
    }
    if (o.difficulty_log2) cfg.params.difficulty_inference = brain::U256::pow2(*o.difficulty_log2);
    if (o.timeout) cfg.workload.timeout_default = *o.timeout;
    if (o.epoch) cfg.params.epoch_inference = *o.epoch;
    if (o.user_txs_per_block) cfg.workload.user_txs_per_block = *o.user_txs_per_block;
    if (o.baseline) cfg.baseline = brain::harness::parse_baseline(*o.baseline);
    if (o.config_id) cfg.config_id = *o.config_id;
    if (o.full_verify) cfg.full_verify = true;
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) {
        throw std::runtime_error("cannot write " + (dir / name).string());
    }
    return out;
}

int check_invariants(const brain::harness::SweepResult& r, std::uint32_t capacity) {
    int rc = 0;
    if (!r.all_conserved()) {
        std::cerr << "invariant violated: total assets changed during a run\n";
        rc = 2;
    }
    if (!r.all_within_capacity(capacity)) {
        std::cerr << "invariant violated: a block exceeded its transaction capacity\n";
        rc = 2;
    }
    return rc;
}

const char* axis_file_name(brain::harness::SweepAxis a) {
    switch (a) {
        case brain::harness::SweepAxis::Freq: return "freq";
        case brain::harness::SweepAxis::QuorumCommit: return "qc";
        case brain::harness::SweepAxis::Difficulty: return "difficulty";
        case brain::harness::SweepAxis::Timeout: return "timeout";
    }
    return "axis";
}

void print_summary(const brain::harness::SweepResult& r) {
    std::cout << "axis_value,mean_tps,mean_timeouts,mean_latency\n";
    for (const auto& p : r.points) {
        std::cout << p.axis_value << ',' << p.mean_tps() << ',' << p.mean_timeouts() << ',' << p.mean_latency()
                  << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for a two-phase on-chain inference protocol"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());

    Overrides run_o;
    auto* run = app.add_subcommand("run", "run one configuration for its repetitions");
    add_config_flags(run, run_o);
    run->add_option("--out", out_dir, "directory for CSV output");
    run->add_option("--workers", workers, "parallel simulations");

    Overrides sweep_o;
    std::string axis;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "sweep one axis");
    add_config_flags(sweep, sweep_o);
    sweep->add_option("--axis", axis, "freq, Q_C, d_I or q.timeout");
    sweep->add_option("--values", values, "axis values")->delimiter(',');
    sweep->add_option("--out", out_dir, "directory for CSV output");
    sweep->add_option("--workers", workers, "parallel simulations");

    Overrides cost_o;
    auto* cost = app.add_subcommand("cost", "per-request gas and fiat cost of one run");
    add_config_flags(cost, cost_o);
    cost->add_option("--out", out_dir, "directory for CSV output");

    brain::harness::FlDemoConfig fl;
    std::uint32_t fl_quorum = 11;
    auto* fl_cmd = app.add_subcommand("fl-demo", "federated training convergence run");
    fl_cmd->add_option("--nodes", fl.nodes, "number of nodes");
    fl_cmd->add_option("--rounds", fl.rounds, "accepted updates to reach");
    fl_cmd->add_option("--window", fl.wma_window, "WMA window n");
    fl_cmd->add_option("--dim", fl.dim, "model dimension");
    fl_cmd->add_option("--seed", fl.seed, "RNG seed");
    fl_cmd->add_option("--lazy", fl.lazy_scorers, "lazy scorers");
    fl_cmd->add_option("--lazy-bias", fl.lazy_bias, "lazy scorer bias in basis points");
    fl_cmd->add_option("--quorum", fl_quorum, "training Q_C and Q_R");
    fl_cmd->add_option("--out", out_dir, "directory for CSV output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentConfig cfg = build_config(run_o);
            cfg.axis.reset();
            const auto result = brain::harness::run_sweep(cfg, workers);
            auto out = open_out(out_dir, cfg.config_id + "_run.csv");
            brain::harness::write_csv(out, result.rows);
            print_summary(result);
            return check_invariants(result, cfg.chain.txs_per_block);
        }
        if (*sweep) {
            ExperimentConfig cfg = build_config(sweep_o);
            if (!axis.empty()) cfg.axis = brain::harness::parse_axis(axis);
            if (!values.empty()) cfg.values = values;
            if (!cfg.axis) throw std::invalid_argument("sweep needs --axis (or an axis in the config)");
            cfg.validate();
            const auto result = brain::harness::run_sweep(cfg, workers);
            auto out = open_out(out_dir, cfg.config_id + "_sweep_" + axis_file_name(*cfg.axis) + ".csv");
            brain::harness::write_csv(out, result.rows);
            print_summary(result);
            return check_invariants(result, cfg.chain.txs_per_block);
        }
        if (*cost) {
            ExperimentConfig cfg = build_config(cost_o);
            brain::harness::RunArtifacts artifacts;
            const auto r = brain::harness::run_once(cfg, cfg.seed, &artifacts);
            const auto report = brain::economics::run_cost_report(artifacts.gas, cfg.full_verify);
            auto out = open_out(out_dir, cfg.config_id + "_cost.csv");
            report.write_csv(out);
            std::cout << "total_gas=" << report.total_gas << " usd_eth=" << report.total_usd_eth
                      << " usd_polygon=" << report.total_usd_polygon << '\n';
            return r.conserved() ? 0 : 2;
        }
        if (*fl_cmd) {
            fl.params.quorum_commit_training = fl_quorum;
            fl.params.quorum_reveal_training = fl_quorum;
            const auto r = brain::harness::run_fl_demo(fl);
            auto out = open_out(out_dir, "fl_demo.csv");
            out << "round,holdout_loss\n";
            for (std::size_t i = 0; i < r.holdout_loss.size(); ++i) {
                out << i << ',' << r.holdout_loss[i] << '\n';
            }
            std::cout << "accepted=" << r.accepted << " rejected=" << r.rejected << " blocks=" << r.blocks
                      << " final_loss=" << r.holdout_loss.back() << " initial_loss=" << r.holdout_loss.front()
                      << " consistent=" << (r.consistent ? "yes" : "no") << '\n';
            return (r.consistent && r.conserved) ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
