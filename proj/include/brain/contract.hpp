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
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "brain/aafl.hpp"
#include "brain/sortition.hpp"
#include "brain/types.hpp"

namespace brain::contract {

enum class FallbackType { ProceedWithRevealed, Requeue };  // b-I, b-II

struct HyperParams {
    Height epoch_inference = 8;  // E_I
    Height epoch_training = 8;   // E_T
    U256 difficulty_inference = U256::pow2(255);  // d_I
    U256 difficulty_training = U256::pow2(255);   // d_T
    unsigned finality = 2;                         // f
    std::uint32_t quorum_commit = 11;              // Q_C
    std::uint32_t quorum_reveal = 11;              // Q_R
    std::uint32_t quorum_commit_training = 11;
    std::uint32_t quorum_reveal_training = 11;
    Height commit_timeout = kNever;   // T_C
    Height reveal_timeout = kNever;   // T_R
    Height execute_timeout = kNever;  // T_E
    Height update_timeout = kNever;   // T_U

    Asset reward_commit = 0;   // R_C
    Asset reward_execute = 2;  // R_E
    Asset reward_update = 2;   // R_U
    Asset reward_reveal = 1;   // R_R
    Asset reward_suggest = 10; // R_S
    Asset penalty_commit = 50;   // P_C
    Asset penalty_reveal = 50;   // P_R
    Asset penalty_suggest = 100; // P_S

    std::int64_t score_threshold = 6000;  // basis points
    std::uint32_t wma_window = 4;         // n
    FallbackType fallback = FallbackType::ProceedWithRevealed;
    std::size_t training_ring_capacity = 64;
    Asset node_deposit = 1000;

    // Throws std::invalid_argument when an invariant fails for `node_count` nodes.
    void validate(std::size_t node_count) const;
};

enum class Phase { Queued, Revealing, Executed, Cancelled, TimedOut };

const char* to_string(Phase p) noexcept;

enum class Reject {
    None,
    InsufficientBalance,
    InputTooLarge,
    UnknownRequest,
    PhaseClosed,
    NotHead,
    UnknownNode,
    NodeEjected,
    Duplicate,
    WrongMessage,
    WrongEpoch,
    BadProof,
    NotElected,
    BadSeedProof,
    NotCommittee,
    WrongAddress,
    HashMismatch,
    Proposer,
    RingFull,
    VersionMismatch,
    ScoreOutOfRange,
};

const char* to_string(Reject r) noexcept;

enum class Status { Accepted, QuorumReached, Executed, Surplus, Rejected };

const char* to_string(Status s) noexcept;

struct TxResult {
    Status status = Status::Rejected;
    Reject reason = Reject::None;

    [[nodiscard]] bool ok() const noexcept { return status != Status::Rejected; }
    static TxResult rejected(Reject r) { return {Status::Rejected, r}; }
};

struct CommitEntry {
    RequestId request_id = kNoRequest;
    NodeId node_id = kNoNode;
    U256 y;
    Bytes proof;
    Hash256 commit_hash;
    Height at_block = 0;
};

struct RevealEntry {
    RequestId request_id = kNoRequest;
    NodeId node_id = kNoNode;
    Bytes output;
    AccountId addr = 0;
    Hash256 nonce;
};

// H(output || addr || r)
Hash256 commit_hash(ByteView output, AccountId addr, const Hash256& nonce);

struct CommitTx {
    RequestId request_id = kNoRequest;
    NodeId node_id = kNoNode;
    sortition::SortitionMsg msg;
    sortition::VrfOutput vrf;
    Hash256 commit_hash;
    // evaluate_sk(seed_{r-1} || r); consumed only by the quorum-completing commit.
    sortition::VrfOutput seed_vrf;
};

struct RevealTx {
    RequestId request_id = kNoRequest;
    NodeId node_id = kNoNode;
    Bytes output;
    AccountId addr = 0;
    Hash256 nonce;
};

struct ExecutionReceipt {
    RequestId request_id = kNoRequest;
    Height at_block = 0;
    Bytes output;
    NodeId executor = kNoNode;
    Asset fee_charged = 0;
    Asset refunded = 0;
    std::vector<NodeId> consensus_revealers;
    std::vector<NodeId> deviant_revealers;
    bool partial = false;    // executed through b-I with fewer than Q_R reveals
    bool over_limit = false; // |input| + |output| exceeded feeLimit; ExecuteOp skipped
};

struct RequestRecord {
    InferenceRequest request;
    AccountId payer = 0;
    Phase phase = Phase::Queued;
    Height head_since = kNever;  // h_start
    Height quorum_at = kNever;   // h_C
    Hash256 sortition_seed;      // seed_{r-f} in force when quorum was reached
    std::map<NodeId, CommitEntry> commits;  // K_C: the first Q_C committers
    std::vector<CommitEntry> surplus;       // same-block commits beyond Q_C
    std::map<NodeId, RevealEntry> reveals;  // K_R
    std::optional<ExecutionReceipt> receipt;
    std::uint32_t requeues = 0;
};

enum class EventKind {
    RequestQueued,
    PriorityPinned,
    QuorumReached,
    Executed,
    CommitFallback,   // a-fallback
    RequestTimedOut,  // q.timeout expiry
    RevealFallbackProceed,
    RevealFallbackRequeue,
    Penalized,
    NodeEjected,
    ProposalQueued,
    ScoreQuorumReached,
    UpdateAccepted,
    UpdateRejected,
    ProposalExpired,
};

const char* to_string(EventKind k) noexcept;

struct Event {
    EventKind kind;
    std::uint64_t subject = 0;  // request or proposal id
    NodeId node = kNoNode;
    Asset amount = 0;
};

// Gas metering hook; the economics module supplies the implementation.
enum class GasOp { PushPrior, PopPrior, Verify, Commit, Reveal, Push, Pop };
using GasHook = std::function<void(GasOp, std::uint64_t subject, bool training)>;

// ---- training --------------------------------------------------------------------------

enum class ProposalPhase { Queued, Revealing, Accepted, Rejected, Expired };

const char* to_string(ProposalPhase p) noexcept;

struct ScoreCommitTx {
    ProposalId proposal_id = 0;
    NodeId node_id = kNoNode;
    sortition::SortitionMsg msg;
    sortition::VrfOutput vrf;
    Hash256 commit_hash;
    sortition::VrfOutput seed_vrf;
};

struct ScoreRevealTx {
    ProposalId proposal_id = 0;
    NodeId node_id = kNoNode;
    std::int64_t score = 0;
    AccountId addr = 0;
    Hash256 nonce;
};

Bytes encode_score(std::int64_t score);

// q1 analogue for training sortition: H(id || ver).
Hash256 proposal_digest(const aafl::ModelUpdate& update);

struct ProposalRecord {
    aafl::ModelUpdate update;
    ProposalPhase phase = ProposalPhase::Queued;
    Height head_since = kNever;
    Height quorum_at = kNever;
    Hash256 sortition_seed;
    std::map<NodeId, CommitEntry> commits;
    std::map<NodeId, std::int64_t> scores;
    std::optional<std::int64_t> agreed_score;
};

struct AcceptedUpdate {
    ProposalId proposal_id = 0;
    Hash256 ver;
    std::int64_t score = 0;  // a_r in basis points
    std::uint64_t round = 0;
};

// Lower median; throws on empty input.
std::int64_t lower_median(std::vector<std::int64_t> values);

// Plurality over byte-equal outputs; ties go to the smallest H(output).
Bytes plurality(const std::vector<Bytes>& outputs);

// ---- contract --------------------------------------------------------------------------

struct NodeAccount {
    Bytes pk;
    AccountId addr = 0;
    bool ejected = false;
};

class BrainContract {
  public:
    BrainContract(HyperParams params, Hash256 genesis_seed);

    // Setup-time minting; total_assets() is constant after the last mint.
    void mint(AccountId account, Asset amount);
    void fund_treasury(Asset amount);

    // Moves the configured deposit from the node's account balance into its deposit.
    void register_node(NodeId node, Bytes pk, AccountId addr);

    void set_gas_hook(GasHook hook) { gas_hook_ = std::move(hook); }

    // Phase 1: escrow feeLimit * feePrice + value and push into the priority queue.
    TxResult request_inference(InferenceRequest request, AccountId payer, Height h_now);

    // Phase 2-a.
    TxResult commit(const CommitTx& tx, Height h_now);

    // Phase 2-b; the Q_R-th reveal executes in the same transaction (phase 2-c).
    TxResult reveal(const RevealTx& tx, Height h_now);

    // Training phase 1.
    TxResult suggest_update(aafl::ModelUpdate update, const aafl::WeightStore& store, Height h_now,
                            ProposalId* assigned = nullptr);
    TxResult score_commit(const ScoreCommitTx& tx, Height h_now);
    TxResult score_reveal(const ScoreRevealTx& tx, Height h_now);

    // Timeout sweep run after the last transaction of a block: T_C (a-fallback),
    // q.timeout expiry, T_R (b-I / b-II), and proposal expiry.
    void end_of_block(Height h_now);

    // Individual checks, exposed for scenario tests.
    bool check_commit_timeout(RequestId id, Height h_now);
    bool check_reveal_timeout(RequestId id, Height h_now);

    // ---- read-only views ----
    [[nodiscard]] std::optional<RequestId> head() const;
    [[nodiscard]] std::optional<ProposalId> training_head() const;
    [[nodiscard]] const RequestRecord* record(RequestId id) const;
    [[nodiscard]] const ProposalRecord* proposal(ProposalId id) const;
    [[nodiscard]] std::vector<RequestId> queue_order() const;
    [[nodiscard]] std::vector<RequestId> revealing() const;
    [[nodiscard]] std::vector<ProposalId> revealing_proposals() const;
    [[nodiscard]] int queued_priority(RequestId id) const;  // -1 when not queued
    [[nodiscard]] std::size_t training_queue_size() const noexcept { return training_ring_.size(); }
    [[nodiscard]] const std::vector<AcceptedUpdate>& accepted_updates() const noexcept {
        return accepted_;
    }
    [[nodiscard]] const sortition::SeedRing& seeds() const noexcept { return seeds_; }
    [[nodiscard]] const sortition::SeedRing& training_seeds() const noexcept { return training_seeds_; }
    [[nodiscard]] const HyperParams& params() const noexcept { return params_; }
    [[nodiscard]] Asset balance(AccountId a) const;
    [[nodiscard]] Asset deposit(NodeId n) const;
    [[nodiscard]] Asset treasury() const noexcept { return treasury_; }
    [[nodiscard]] Asset escrow(RequestId id) const;
    [[nodiscard]] Asset total_assets() const;
    [[nodiscard]] const NodeAccount* node(NodeId n) const;
    [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }

    // Events since the last drain, in emission order.
    std::vector<Event> drain_events();

    // Human-readable snapshot for debugging and state comparisons.
    void dump(std::ostream& os) const;
    [[nodiscard]] std::string snapshot() const;

  private:
    struct QueueKey {
        int priority;
        std::uint64_t seq;
        RequestId id;
        bool operator<(const QueueKey& o) const noexcept {
            if (priority != o.priority) return priority > o.priority;
            return seq < o.seq;
        }
    };

    void push_queue(RequestId id, int priority);
    void erase_queue(RequestId id);
    void refresh_head(Height h_now);
    void refresh_training_head(Height h_now);
    void slash(NodeId node, Asset amount);
    void pay_from_treasury(AccountId to, Asset amount);
    void emit(EventKind k, std::uint64_t subject, NodeId node = kNoNode, Asset amount = 0);
    void meter(GasOp op, std::uint64_t subject, bool training = false);

    // Pops the request out of 2-a and refunds all but the input fee portion.
    void cancel_request(RequestRecord& rec, Phase terminal, Height h_now);
    void execute(RequestRecord& rec, NodeId executor, Height h_now, bool partial);
    void finalize_training(ProposalRecord& rec, NodeId executor, Height h_now);

    TxResult check_vrf(NodeId node, const sortition::SortitionMsg& msg,
                       const sortition::VrfOutput& vrf, const U256& difficulty);

    HyperParams params_;
    sortition::SeedRing seeds_;
    sortition::SeedRing training_seeds_;

    std::set<QueueKey> queue_;
    std::map<RequestId, QueueKey> queue_index_;
    std::optional<RequestId> current_head_;
    std::uint64_t next_seq_ = 0;
    std::map<RequestId, RequestRecord> records_;
    std::set<std::pair<Height, RequestId>> expiry_;  // (submitted_at + timeout, id) for queued
    std::set<RequestId> revealing_;

    std::deque<ProposalId> training_ring_;
    std::map<ProposalId, ProposalRecord> proposals_;
    std::set<ProposalId> revealing_proposals_;
    std::optional<ProposalId> current_training_head_;
    ProposalId next_proposal_ = 1;
    std::vector<AcceptedUpdate> accepted_;

    std::map<AccountId, Asset> balances_;
    std::map<NodeId, Asset> deposits_;
    std::map<NodeId, NodeAccount> nodes_;
    std::map<RequestId, Asset> escrow_;
    Asset treasury_ = 0;

    std::vector<Event> events_;
    GasHook gas_hook_;
};

}  // namespace brain::contract
