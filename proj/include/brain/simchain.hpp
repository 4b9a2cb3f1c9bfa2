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
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "brain/aafl.hpp"
#include "brain/contract.hpp"
#include "brain/workload.hpp"

namespace brain::simchain {

struct ChainParams {
    double block_interval_s = 12.06;
    std::uint32_t txs_per_block = 155;
    double base_tx_exec_ms = 1.0;

    void validate() const;
};

enum class TxKind { Request, Commit, RevealExecute, Suggest, ScoreCommit, ScoreReveal, Plain };

const char* to_string(TxKind k) noexcept;

struct RequestPayload {
    InferenceRequest request;
    AccountId payer = 0;
};

struct SuggestPayload {
    aafl::ModelUpdate update;
};

using Payload = std::variant<std::monostate, RequestPayload, contract::CommitTx, contract::RevealTx,
                             SuggestPayload, contract::ScoreCommitTx, contract::ScoreRevealTx>;

struct Tx {
    TxKind kind = TxKind::Plain;
    std::uint64_t sender = 0;  // node id, or payer account for user transactions
    Payload payload;
    Height submitted_at_block = 0;
    double exec_time_ms = 1.0;
    std::uint64_t tick = 0;  // mempool arrival order, assigned on submit

    [[nodiscard]] Asset fee_price() const noexcept;
    [[nodiscard]] std::uint64_t subject() const noexcept;  // request or proposal id
};

// Two lanes: Requests ordered by feePrice (ties by arrival), everything else FIFO. The
// lanes interleave by arrival tick: each slot a Request arrived in is filled with the
// highest-paying pending Request. Plain transactions are held as counted runs.
class Mempool {
  public:
    // Assigns and returns the arrival tick.
    std::uint64_t submit(Tx tx);
    void submit_plain(std::uint64_t count);

    // Pops the next transaction; plain runs come out one transaction at a time.
    std::optional<Tx> pop();

    [[nodiscard]] std::size_t size() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    [[nodiscard]] bool only_plain() const noexcept { return requests_.empty() && fifo_.empty(); }
    [[nodiscard]] std::uint64_t plain_pending() const noexcept;
    // Commit transactions waiting for inclusion for one request. Nodes read this before
    // committing so a block carries no more commits than the quorum needs.
    [[nodiscard]] std::uint32_t pending_commits(RequestId id) const noexcept;

  private:
    struct RequestKey {
        Asset fee_price;
        std::uint64_t tick;
        bool operator<(const RequestKey& o) const noexcept {
            if (fee_price != o.fee_price) return fee_price > o.fee_price;
            return tick < o.tick;
        }
    };
    struct PlainRun {
        std::uint64_t tick;
        std::uint64_t count;
    };
    using FifoItem = std::variant<Tx, PlainRun>;

    [[nodiscard]] static std::uint64_t tick_of(const FifoItem& item) noexcept;

    std::map<RequestKey, Tx> requests_;
    std::set<std::uint64_t> request_slots_;
    std::map<RequestId, std::uint32_t> pending_commits_;
    std::deque<FifoItem> fifo_;
    std::uint64_t next_tick_ = 0;
};

struct Block {
    Height height = 0;
    std::vector<Tx> txs;
    std::uint64_t plain_txs = 0;  // plain transactions included besides `txs`
};

// One line per included non-plain transaction or contract event.
struct LogRecord {
    Height block = 0;
    std::string kind;  // tx kind, or "event:<name>"
    std::uint64_t request_id = 0;
    NodeId node_id = kNoNode;
    std::string outcome;
    Asset amount = 0;
};

struct EventLog {
    std::vector<LogRecord> records;
    std::uint64_t plain_txs = 0;
    std::uint64_t other_txs = 0;  // every included non-plain transaction, accepted or not
    double base_tx_exec_ms = 1.0;

    // Request inclusion and execution heights, keyed by request id.
    std::map<RequestId, Height> requested_at;
    std::map<RequestId, Height> executed_at;
    std::uint64_t timed_out = 0;  // q.timeout expiries and a-fallback cancellations
    Height last_block = 0;

    void write(std::ostream& os) const;
    [[nodiscard]] std::string to_string() const;
};

class Chain;

// Anything that reacts to chain state by submitting transactions: nodes and user feeds.
class Participant {
  public:
    virtual ~Participant() = default;

    // Called after block `h` is sealed; transactions submitted now are eligible for h+1.
    virtual void observe(const contract::BrainContract& state, Height h, Chain& chain) = 0;

    // Outcome of a transaction this participant submitted.
    virtual void on_included(const Tx& /*tx*/, const contract::TxResult& /*result*/, Height /*h*/) {}
};

class Chain {
  public:
    Chain(ChainParams params, contract::BrainContract& state, const aafl::WeightStore* store = nullptr);

    void submit(Tx tx, Participant* origin = nullptr);

    // Drains up to txs_per_block transactions, applies them in order, then runs the
    // end-of-block timeout sweep and lets participants react.
    Block produce_block();

    void add_participant(Participant* p) { participants_.push_back(p); }

    // Feeds the user stream: Plain runs and Requests arrive at their blocks.
    void load_stream(const workload::Stream& stream);

    // Runs until every streamed request has resolved and the mempool is drained, or
    // until `max_blocks` have been produced. Idle stretches are skipped in bulk.
    const EventLog& run(Height max_blocks);

    // Runs until `done(state)` holds after a block, or `max_blocks`.
    template <typename Pred>
    const EventLog& run_until(Pred done, Height max_blocks) {
        while (height_ < max_blocks && !done(state_)) {
            produce_block();
        }
        return log_;
    }

    [[nodiscard]] Height height() const noexcept { return height_; }
    [[nodiscard]] const ChainParams& params() const noexcept { return params_; }
    [[nodiscard]] const EventLog& log() const noexcept { return log_; }
    [[nodiscard]] const Mempool& mempool() const noexcept { return mempool_; }
    [[nodiscard]] std::size_t max_block_fill() const noexcept { return max_fill_; }

  private:
    contract::TxResult apply(const Tx& tx, Height h);
    void feed_users(Height h);
    bool all_resolved() const;
    bool contract_idle() const;
    void fast_forward();

    ChainParams params_;
    contract::BrainContract& state_;
    const aafl::WeightStore* store_;
    Mempool mempool_;
    std::map<std::uint64_t, Participant*> origins_;  // tick -> submitter
    std::vector<Participant*> participants_;
    Height height_ = 0;
    EventLog log_;
    std::size_t max_fill_ = 0;

    const workload::Stream* stream_ = nullptr;
    std::size_t next_request_ = 0;
    std::uint64_t next_user_tick_ = 0;
};

// Blocks needed for an off-chain computation of `seconds` when started right after a block:
// the result can be submitted no earlier than this many blocks later (at least one).
Height blocks_for(double seconds, double block_interval_s);

}  // namespace brain::simchain
