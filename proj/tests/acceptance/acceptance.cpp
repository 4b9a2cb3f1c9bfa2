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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "brain/aafl.hpp"
#include "brain/economics.hpp"
#include "brain/harness.hpp"
#include "brain/sortition.hpp"
#include "contract_fixture.hpp"

using namespace brain;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---- 1: VRF ----------------------------------------------------------------------------

void vrf_suite() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    auto random_bytes = [&rng](std::size_t n) {
        Bytes b(n);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        return b;
    };

    int roundtrip_ok = 0;
    int mutations_rejected = 0;
    for (int i = 0; i < 1000; ++i) {
        Hash256 seed;
        const Bytes s = random_bytes(32);
        std::copy(s.begin(), s.end(), seed.bytes.begin());
        const auto kp = sortition::keygen(seed);
        const Bytes msg = random_bytes(1 + rng() % 64);
        const auto out = sortition::evaluate(kp.sk, msg);
        if (sortition::verify(kp.pk, msg, out.y, out.proof)) ++roundtrip_ok;

        // Flip one bit of the proof, the message or the output.
        Bytes proof = out.proof;
        Bytes m = msg;
        U256 y = out.y;
        switch (i % 3) {
            case 0: proof[rng() % proof.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8)); break;
            case 1: m[rng() % m.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8)); break;
            default: y.bytes[rng() % y.bytes.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        }
        if (!sortition::verify(kp.pk, m, y, proof)) ++mutations_rejected;
    }

    auto rate_in_ci = [&](unsigned k, double p, double& rate) {
        constexpr int kTrials = 10'000;
        const U256 d = U256::pow2(k);
        int elected = 0;
        for (int i = 0; i < kTrials; ++i) {
            const auto kp = sortition::keygen_for_index(static_cast<std::uint64_t>(i % 64));
            const Bytes msg = ByteWriter{}.put("trial").put_u64(k).put_u64(static_cast<std::uint64_t>(i)).bytes();
            if (sortition::is_elected(sortition::evaluate(kp.sk, msg).y, d)) ++elected;
        }
        rate = static_cast<double>(elected) / kTrials;
        const double half = 2.5758 * std::sqrt(p * (1 - p) / kTrials);
        return std::abs(rate - p) <= half;
    };
    double r255 = 0, r253 = 0;
    const bool ci255 = rate_in_ci(255, 0.5, r255);
    const bool ci253 = rate_in_ci(253, 0.125, r253);
    const double t = seconds_since(t0);
    report(1, roundtrip_ok == 1000 && mutations_rejected == 1000 && ci255 && ci253 && t < 10,
           fmt("roundtrip %d/1000, mutations rejected %d/1000, rate(2^255)=%.4f, rate(2^253)=%.4f, %.1fs",
               roundtrip_ok, mutations_rejected, r255, r253, t));
}

// ---- 2: WMA ----------------------------------------------------------------------------

void wma_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> weight(-5.0, 5.0);
    std::uniform_real_distribution<double> score(0.05, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint32_t n = std::array<std::uint32_t, 3>{2, 4, 8}[trial % 3];
        const std::size_t len = 1 + rng() % 50;
        aafl::History h;
        for (std::size_t r = 0; r < len; ++r) {
            aafl::ModelWeights w;
            for (int i = 0; i < 16; ++i) w.values.push_back(weight(rng));
            h.emplace_back(std::move(w), r == 0 ? 1.0 : score(rng));
        }
        aafl::WmaState s = aafl::wma_init(h[0].first, n);
        for (std::size_t r = 1; r < h.size(); ++r) s = aafl::wma_step(s, h[r].first, h[r].second);
        const auto direct = aafl::wma_direct(h, n);
        for (std::size_t i = 0; i < 16; ++i) {
            const double a = s.global.values[i];
            const double b = direct.values[i];
            const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
            worst = std::max(worst, std::abs(a - b) / scale);
        }
    }
    const double t = seconds_since(t0);
    report(2, worst <= 1e-9 && t < 5, fmt("max relative error %.3e, %.2fs", worst, t));
}

// ---- 3: federated demo -----------------------------------------------------------------

void fl_demo() {
    const auto t0 = Clock::now();
    harness::FlDemoConfig cfg;
    cfg.nodes = 21;
    cfg.dim = 16;
    cfg.rounds = 50;
    cfg.wma_window = 4;
    const auto r = harness::run_fl_demo(cfg);
    const double t = seconds_since(t0);
    const double first = r.holdout_loss.front();
    const double last = r.holdout_loss.back();
    report(3, r.accepted == 50 && last < 0.1 * first && r.consistent && t < 60,
           fmt("accepted %u in %llu blocks, loss %.4g -> %.4g, consistent=%s, %.1fs", r.accepted,
               static_cast<unsigned long long>(r.blocks), first, last, r.consistent ? "yes" : "no", t));
}

// ---- 4: median robustness --------------------------------------------------------------

void median_robustness() {
    const auto t0 = Clock::now();
    constexpr std::uint32_t kCommittee = 21;
    contract::HyperParams p = ContractFixture::everyone_elected({});
    p.quorum_commit_training = kCommittee;
    p.quorum_reveal_training = kCommittee;
    std::mt19937_64 rng(404);
    int ok = 0;
    int trials = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ContractFixture f(p, kCommittee + 1);  // node 0 proposes
        aafl::WeightStore store;
        aafl::ModelUpdate u;
        u.net = "lin";
        u.proposer = 0;
        u.ver = store.store(aafl::ModelWeights{{static_cast<double>(trial)}});
        ProposalId id = 0;
        if (!f.c.suggest_update(u, store, 1, &id).ok()) break;

        const std::uint32_t lazy = static_cast<std::uint32_t>(trial % 11);
        const std::int64_t base = 3000 + static_cast<std::int64_t>(rng() % 5000);
        const std::int64_t bias = 1000 + static_cast<std::int64_t>(rng() % 5000);
        std::vector<std::int64_t> scores(kCommittee + 1, 0);
        std::int64_t honest_min = 10'000, honest_max = 0;
        for (NodeId n = 1; n <= kCommittee; ++n) {
            const std::int64_t honest = base + static_cast<std::int64_t>(rng() % 1001) - 500;
            if (n <= lazy) {
                const std::int64_t sign = (n % 2 == 0) ? 1 : -1;
                scores[n] = std::clamp<std::int64_t>(base + sign * bias, 0, 10'000);
            } else {
                scores[n] = honest;
                honest_min = std::min(honest_min, honest);
                honest_max = std::max(honest_max, honest);
            }
        }
        bool valid = true;
        for (NodeId n = 1; n <= kCommittee && valid; ++n) {
            contract::ScoreCommitTx tx;
            tx.proposal_id = id;
            tx.node_id = n;
            tx.msg = sortition::build_msg(contract::proposal_digest(f.c.proposal(id)->update), f.c.training_seeds(), 2,
                                          p.epoch_training);
            tx.vrf = sortition::evaluate(f.keys[n].sk, tx.msg.serialize());
            tx.commit_hash =
                contract::commit_hash(contract::encode_score(scores[n]), ContractFixture::addr(n), ContractFixture::nonce(n));
            tx.seed_vrf = sortition::evaluate(
                f.keys[n].sk,
                sortition::seed_evolution_msg(f.c.training_seeds().latest(), f.c.training_seeds().round() + 1));
            valid = f.c.score_commit(tx, 2).ok();
        }
        for (NodeId n = 1; n <= kCommittee && valid; ++n) {
            valid = f.c
                        .score_reveal(contract::ScoreRevealTx{id, n, scores[n], ContractFixture::addr(n),
                                                              ContractFixture::nonce(n)},
                                      3)
                        .ok();
        }
        ++trials;
        const auto agreed = f.c.proposal(id)->agreed_score;
        if (valid && agreed && *agreed >= honest_min && *agreed <= honest_max) ++ok;
    }
    const double t = seconds_since(t0);
    report(4, trials == 100 && ok == 100 && t < 5,
           fmt("agreed score inside honest range in %d/%d trials (0..10 lazy of 21), %.2fs", ok, trials, t));
}

// ---- 5-9, 11: simulations --------------------------------------------------------------

struct Conservation {
    std::size_t runs = 0;
    std::size_t conserved = 0;
    std::size_t within_capacity = 0;

    void add(const harness::SweepResult& r, std::uint32_t capacity) {
        for (const auto& p : r.points) {
            for (const auto& run : p.runs) {
                ++runs;
                conserved += run.conserved() ? 1 : 0;
                within_capacity += run.max_block_fill <= capacity ? 1 : 0;
            }
        }
    }
};

harness::SweepResult sweep(harness::SweepAxis axis, std::vector<double> values,
                           const std::function<void(harness::ExperimentConfig&)>& tweak = {}) {
    harness::ExperimentConfig cfg;
    cfg.repetitions = 10;
    cfg.axis = axis;
    cfg.values = std::move(values);
    if (tweak) tweak(cfg);
    return harness::run_sweep(cfg, workers());
}

void no_inference_control() {
    harness::ExperimentConfig cfg;
    cfg.baseline = harness::Baseline::None;
    const auto r = harness::run_once(cfg, cfg.seed);
    report(5, r.tasks_per_second == 1000.0, fmt("tasks/s = %.6f", r.tasks_per_second));
}

Conservation simulations() {
    const auto t0 = Clock::now();
    Conservation cons;
    const std::uint32_t capacity = simchain::ChainParams{}.txs_per_block;

    const std::vector<double> freqs{0.001, 0.005, 0.01, 0.05, 0.0577, 0.1};
    const auto fs = sweep(harness::SweepAxis::Freq, freqs);
    cons.add(fs, capacity);
    const double t_freq = seconds_since(t0);

    // 6
    {
        const std::array<double, 3> reference{978.43, 901.42, 821.23};
        bool pass = t_freq < 600;
        std::ostringstream d;
        for (std::size_t i = 0; i < 3; ++i) {
            const double m = fs.points[i].mean_tps();
            const double oracle = harness::oracle_tasks_per_second(freqs[i], 11, 11);
            pass = pass && std::abs(m - reference[i]) <= 0.08 * reference[i] && std::abs(m - oracle) <= 0.02 * oracle;
            d << fmt("freq %.3f: %.2f (reference %.2f, oracle %.2f); ", freqs[i], m, reference[i], oracle);
        }
        report(6, pass, d.str() + fmt("%.0fs", t_freq));
    }

    // 7 and 8 use the default-frequency point.
    const harness::SweepPoint& def = fs.points[4];
    {
        harness::ExperimentConfig naive;
        naive.baseline = harness::Baseline::Naive;
        naive.repetitions = 10;
        const auto nr = harness::run_sweep(naive, workers());
        const double brain_tps = def.mean_tps();
        const double naive_tps = nr.points[0].mean_tps();
        const double ratio = brain_tps / naive_tps;
        report(7, brain_tps >= 420 && brain_tps <= 500 && naive_tps >= 0.85 && naive_tps <= 1.15 && ratio >= 400,
               fmt("BRAIN %.2f tasks/s, naive %.4f tasks/s, ratio %.1f", brain_tps, naive_tps, ratio));
    }
    {
        bool min_ok = true;
        std::vector<double> avgs;
        for (const auto& r : def.runs) {
            min_ok = min_ok && r.latency.min == 2;
            avgs.push_back(r.latency.avg);
        }
        const double mean = def.mean_latency();
        report(8, min_ok && mean >= 5.4 && mean <= 9.0,
               fmt("min latency 2 in every rep: %s; mean %.3f blocks (sd across reps %.3f)", min_ok ? "yes" : "no",
                   mean, harness::sample_stddev(avgs)));
    }

    // 9
    {
        bool tps_decreasing = true;
        bool timeouts_nondecreasing = true;
        for (std::size_t i = 1; i < fs.points.size(); ++i) {
            tps_decreasing = tps_decreasing && fs.points[i].mean_tps() < fs.points[i - 1].mean_tps();
            timeouts_nondecreasing =
                timeouts_nondecreasing && fs.points[i].mean_timeouts() >= fs.points[i - 1].mean_timeouts();
        }
        const double to_005 = fs.points[3].mean_timeouts();
        const double to_01 = fs.points[5].mean_timeouts();
        const bool sharp = to_01 >= 2.0 * std::max(to_005, 1.0);

        const auto ts = sweep(harness::SweepAxis::Timeout, {10, 15, 20, 25});
        cons.add(ts, capacity);
        const double t10 = ts.points.front().mean_timeouts();
        const double t25 = ts.points.back().mean_timeouts();
        const bool timeout_ratio = t10 >= 10.0 * t25;

        const auto qs = sweep(harness::SweepAxis::QuorumCommit, {10, 21}, [](harness::ExperimentConfig& c) {
            c.params.difficulty_inference = U256::pow2(253);
        });
        cons.add(qs, capacity);
        const double q10 = qs.points[0].mean_timeouts();
        const double q21 = qs.points[1].mean_timeouts();
        const bool quorum = q21 > 100 && q10 < 20;

        const double t = seconds_since(t0);
        report(9, tps_decreasing && timeouts_nondecreasing && sharp && timeout_ratio && quorum && t < 1200,
               fmt("tps decreasing: %s; timeouts non-decreasing: %s; timeouts at freq 0.05/0.1: %.2f/%.2f; "
                   "q.timeout 10/25: %.2f/%.2f; d=2^253 Q_C 10/21: %.2f/%.2f (need <20 / >100); %.0fs",
                   tps_decreasing ? "yes" : "no", timeouts_nondecreasing ? "yes" : "no", to_005, to_01, t10, t25,
                   q10, q21, t));
    }

    return cons;
}

// ---- 10: gas ---------------------------------------------------------------------------

void gas_and_fiat() {
    using economics::GasKind;
    using economics::PhaseId;
    const bool phases = economics::phase_gas(PhaseId::Request) == 91'699 &&
                        economics::phase_gas(PhaseId::Commit) == 296'471 &&
                        economics::phase_gas(PhaseId::Reveal) == 47'389;
    struct Row {
        GasKind k;
        double eth;
        double poly;
    };
    const Row rows[] = {
        {GasKind::Verify, 32.504, 0.077}, {GasKind::VerifyFast, 2.980, 0.007}, {GasKind::Commit, 0.904, 0.002},
        {GasKind::CommitH, 0.888, 0.002}, {GasKind::Reveal, 1.723, 0.004},     {GasKind::RevealH, 0.937, 0.002},
        {GasKind::Push, 1.015, 0.002},    {GasKind::Pop, 0.574, 0.001},        {GasKind::PushPrior, 1.813, 0.004},
        {GasKind::PopPrior, 1.995, 0.005},
    };
    double worst_eth = 0, worst_poly = 0;
    for (const auto& r : rows) {
        const auto gas = economics::GasTable::standard().avg(r.k);
        worst_eth = std::max(worst_eth, std::abs(economics::usd_cost(gas, economics::FiatParams::ethereum()) - r.eth));
        worst_poly =
            std::max(worst_poly, std::abs(economics::usd_cost(gas, economics::FiatParams::polygon()) - r.poly));
    }
    report(10, phases && worst_eth <= 0.01 && worst_poly <= 0.001,
           fmt("phase sums %s; worst USD error %.4f (ethereum), %.5f (polygon)", phases ? "exact" : "WRONG",
               worst_eth, worst_poly));
}

// ---- 12: fallback state machine ---------------------------------------------------------

contract::HyperParams quorum(std::uint32_t q) {
    contract::HyperParams p = ContractFixture::everyone_elected({});
    p.quorum_commit = q;
    p.quorum_reveal = q;
    return p;
}

bool a_fallback(std::string& why) {
    contract::HyperParams p = quorum(3);
    p.commit_timeout = 20;
    ContractFixture f(p, 3);
    const Asset total = f.c.total_assets();
    const auto q = ContractFixture::request(1, 10, 200, 1000, 2, 5);
    if (!f.c.request_inference(q, ContractFixture::kPayer, 1).ok()) return why = "request rejected", false;
    if (!f.c.commit(f.commit_tx(0, 1, 5, Bytes(4, 1)), 5).ok()) return why = "commit rejected", false;
    f.c.end_of_block(22);
    const Asset escrow = static_cast<Asset>(q.fee_limit) * q.fee_price + q.value;
    const Asset refund = static_cast<Asset>(q.fee_limit - q.input.size()) * q.fee_price + q.value;
    const bool ok = f.c.record(1)->phase == contract::Phase::Cancelled &&
                    f.c.balance(ContractFixture::kPayer) == ContractFixture::kPayerFunds - escrow + refund &&
                    f.c.treasury() == ContractFixture::kTreasury + (escrow - refund) && f.c.total_assets() == total;
    if (!ok) why = "a-fallback post-state";
    return ok;
}

bool b_one(std::string& why) {
    contract::HyperParams p = quorum(5);
    p.reveal_timeout = 5;
    p.fallback = contract::FallbackType::ProceedWithRevealed;
    ContractFixture f(p, 5);
    const Asset total = f.c.total_assets();
    const auto q = ContractFixture::request(1, 10, 200, 1000, 2, 5);
    if (!f.c.request_inference(q, ContractFixture::kPayer, 1).ok()) return why = "request rejected", false;
    const Bytes o(300, 4);
    f.commit_all(1, 2, 0, 5, o);
    for (NodeId n = 0; n < 3; ++n) {
        if (!f.c.reveal(f.reveal_tx(n, 1, o), 3).ok()) return why = "reveal rejected", false;
    }
    f.c.end_of_block(8);
    const auto* rec = f.c.record(1);
    const Asset fee = static_cast<Asset>(q.input.size() + o.size()) * q.fee_price;
    const Asset share = fee / 3;
    const bool ok = rec->phase == contract::Phase::Executed && rec->receipt && rec->receipt->partial &&
                    rec->receipt->output == o && rec->receipt->executor == 2 &&
                    f.c.balance(ContractFixture::addr(0)) == share + p.reward_reveal &&
                    f.c.balance(ContractFixture::addr(2)) == share + p.reward_reveal + p.reward_execute &&
                    f.c.balance(q.target) == q.value &&
                    f.c.balance(ContractFixture::kPayer) == ContractFixture::kPayerFunds - fee - q.value &&
                    f.c.deposit(3) == p.node_deposit - p.penalty_reveal &&
                    f.c.deposit(4) == p.node_deposit - p.penalty_reveal && f.c.total_assets() == total;
    if (!ok) why = "b-I post-state";
    return ok;
}

bool b_two(std::string& why) {
    contract::HyperParams p = quorum(5);
    p.reveal_timeout = 5;
    p.fallback = contract::FallbackType::Requeue;
    ContractFixture f(p, 5);
    const Asset total = f.c.total_assets();
    const auto q = ContractFixture::request(1, 10);
    if (!f.c.request_inference(q, ContractFixture::kPayer, 1).ok()) return why = "request rejected", false;
    const Bytes o(30, 4);
    f.commit_all(1, 2, 0, 5, o);
    if (!f.c.reveal(f.reveal_tx(0, 1, o), 3).ok()) return why = "reveal rejected", false;
    f.c.end_of_block(8);
    const auto* rec = f.c.record(1);
    bool ok = rec->phase == contract::Phase::Queued && rec->commits.empty() && rec->reveals.empty() &&
              rec->requeues == 1 && f.c.queued_priority(1) == kPriorityMax - 1 &&
              f.c.escrow(1) == static_cast<Asset>(q.fee_limit) * q.fee_price + q.value &&
              f.c.deposit(0) == p.node_deposit && f.c.total_assets() == total;
    for (NodeId n = 1; n < 5; ++n) ok = ok && f.c.deposit(n) == p.node_deposit - p.penalty_reveal;
    if (!ok) why = "b-II post-state";
    return ok;
}

bool non_revealer_slashing(std::string& why) {
    // One of three committee members stays silent until T_R expires.
    contract::HyperParams p = quorum(3);
    p.reveal_timeout = 5;
    ContractFixture f(p, 3);
    const Asset total = f.c.total_assets();
    const auto q = ContractFixture::request(1, 10, 200, 1000, 2, 5);
    if (!f.c.request_inference(q, ContractFixture::kPayer, 1).ok()) return why = "request rejected", false;
    const Bytes o(10, 9);
    f.commit_all(1, 2, 0, 3, o);
    for (NodeId n = 0; n < 2; ++n) {
        if (!f.c.reveal(f.reveal_tx(n, 1, o), 3).ok()) return why = "reveal rejected", false;
    }
    f.c.end_of_block(7);
    const bool before_expiry = f.c.deposit(2) == p.node_deposit && f.c.record(1)->phase == contract::Phase::Revealing;
    f.c.end_of_block(8);
    const Asset fee = static_cast<Asset>(q.input.size() + o.size()) * q.fee_price;
    const Asset treasury = ContractFixture::kTreasury + p.penalty_reveal + fee % 2 - 2 * p.reward_reveal -
                           p.reward_execute - 3 * p.reward_commit;
    const bool ok = before_expiry && f.c.record(1)->phase == contract::Phase::Executed &&
                    f.c.deposit(2) == p.node_deposit - p.penalty_reveal && f.c.deposit(0) == p.node_deposit &&
                    f.c.deposit(1) == p.node_deposit && f.c.treasury() == treasury && f.c.total_assets() == total;
    if (!ok) why = "non-revealer post-state";
    return ok;
}

void fallbacks() {
    std::string why;
    int passed = 0;
    std::string failed;
    for (auto* scenario : {a_fallback, b_one, b_two, non_revealer_slashing}) {
        bool ok = false;
        try {
            ok = scenario(why);
        } catch (const std::exception& e) {
            why = e.what();
        }
        if (ok) {
            ++passed;
        } else {
            failed += why + "; ";
        }
    }
    report(12, passed == 4, fmt("%d/4 scenarios exact (a-fallback, b-I, b-II, non-revealer slashing) %s", passed,
                                failed.c_str()));
}

}  // namespace

int main() {
    vrf_suite();
    wma_equivalence();
    fl_demo();
    median_robustness();
    no_inference_control();
    const Conservation cons = simulations();
    gas_and_fiat();
    report(11, cons.runs > 0 && cons.conserved == cons.runs && cons.within_capacity == cons.runs,
           fmt("%zu/%zu runs conserve total assets, %zu/%zu within block capacity", cons.conserved, cons.runs,
               cons.within_capacity, cons.runs));
    fallbacks();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
