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

#include "brain/contract.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace brain::contract {

namespace {

Hash256 training_genesis(const Hash256& genesis) {
    return sha256(ByteWriter{}.put("training").put(genesis).bytes());
}

}  // namespace

void HyperParams::validate(std::size_t node_count) const {
    if (epoch_inference == 0 || epoch_training == 0) {
        throw std::invalid_argument("epoch lengths must be positive");
    }
    if (quorum_reveal == 0 || quorum_reveal > quorum_commit || quorum_commit > node_count) {
        throw std::invalid_argument("quorums must satisfy 0 < Q_R <= Q_C <= node count");
    }
    if (quorum_reveal_training == 0 || quorum_reveal_training > quorum_commit_training ||
        quorum_commit_training > node_count) {
        throw std::invalid_argument("training quorums must satisfy 0 < Q_R <= Q_C <= node count");
    }
    if (wma_window < 2) {
        throw std::invalid_argument("WMA window n must be at least 2");
    }
    if (score_threshold < 0 || score_threshold > 10000) {
        throw std::invalid_argument("score threshold must lie in [0, 10000] basis points");
    }
    if (training_ring_capacity == 0) {
        throw std::invalid_argument("training ring capacity must be positive");
    }
    for (Asset a : {reward_commit, reward_execute, reward_update, reward_reveal, reward_suggest,
                    penalty_commit, penalty_reveal, penalty_suggest, node_deposit}) {
        if (a < 0) {
            throw std::invalid_argument("rewards, penalties and deposits must be non-negative");
        }
    }
}

const char* to_string(Phase p) noexcept {
    switch (p) {
        case Phase::Queued: return "queued";
        case Phase::Revealing: return "revealing";
        case Phase::Executed: return "executed";
        case Phase::Cancelled: return "cancelled";
        case Phase::TimedOut: return "timed_out";
    }
    return "?";
}

const char* to_string(Reject r) noexcept {
    switch (r) {
        case Reject::None: return "none";
        case Reject::InsufficientBalance: return "insufficient_balance";
        case Reject::InputTooLarge: return "input_too_large";
        case Reject::UnknownRequest: return "unknown_request";
        case Reject::PhaseClosed: return "phase_closed";
        case Reject::NotHead: return "not_head";
        case Reject::UnknownNode: return "unknown_node";
        case Reject::NodeEjected: return "node_ejected";
        case Reject::Duplicate: return "duplicate";
        case Reject::WrongMessage: return "wrong_message";
        case Reject::WrongEpoch: return "wrong_epoch";
        case Reject::BadProof: return "bad_proof";
        case Reject::NotElected: return "not_elected";
        case Reject::BadSeedProof: return "bad_seed_proof";
        case Reject::NotCommittee: return "not_committee";
        case Reject::WrongAddress: return "wrong_address";
        case Reject::HashMismatch: return "hash_mismatch";
        case Reject::Proposer: return "proposer";
        case Reject::RingFull: return "ring_full";
        case Reject::VersionMismatch: return "version_mismatch";
        case Reject::ScoreOutOfRange: return "score_out_of_range";
    }
    return "?";
}

const char* to_string(Status s) noexcept {
    switch (s) {
        case Status::Accepted: return "accepted";
        case Status::QuorumReached: return "quorum";
        case Status::Executed: return "executed";
        case Status::Surplus: return "surplus";
        case Status::Rejected: return "rejected";
    }
    return "?";
}

const char* to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::RequestQueued: return "request_queued";
        case EventKind::PriorityPinned: return "priority_pinned";
        case EventKind::QuorumReached: return "quorum_reached";
        case EventKind::Executed: return "executed";
        case EventKind::CommitFallback: return "a_fallback";
        case EventKind::RequestTimedOut: return "timed_out";
        case EventKind::RevealFallbackProceed: return "b1_fallback";
        case EventKind::RevealFallbackRequeue: return "b2_fallback";
        case EventKind::Penalized: return "penalized";
        case EventKind::NodeEjected: return "node_ejected";
        case EventKind::ProposalQueued: return "proposal_queued";
        case EventKind::ScoreQuorumReached: return "score_quorum";
        case EventKind::UpdateAccepted: return "update_accepted";
        case EventKind::UpdateRejected: return "update_rejected";
        case EventKind::ProposalExpired: return "proposal_expired";
    }
    return "?";
}

const char* to_string(ProposalPhase p) noexcept {
    switch (p) {
        case ProposalPhase::Queued: return "queued";
        case ProposalPhase::Revealing: return "revealing";
        case ProposalPhase::Accepted: return "accepted";
        case ProposalPhase::Rejected: return "rejected";
        case ProposalPhase::Expired: return "expired";
    }
    return "?";
}

Hash256 commit_hash(ByteView output, AccountId addr, const Hash256& nonce) {
    return sha256(ByteWriter{}.put_sized(output).put_u64(addr).put(nonce).bytes());
}

Bytes encode_score(std::int64_t score) {
    return ByteWriter{}.put_u64(static_cast<std::uint64_t>(score)).bytes();
}

Hash256 proposal_digest(const aafl::ModelUpdate& update) {
    return sha256(ByteWriter{}.put_u64(update.id).put(update.ver).bytes());
}

std::int64_t lower_median(std::vector<std::int64_t> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty score set");
    }
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    return values[mid];
}

Bytes plurality(const std::vector<Bytes>& outputs) {
    if (outputs.empty()) {
        throw std::invalid_argument("plurality of an empty output set");
    }
    std::map<Bytes, std::size_t> counts;
    for (const auto& o : outputs) {
        ++counts[o];
    }
    const Bytes* best = nullptr;
    std::size_t best_count = 0;
    Hash256 best_hash;
    for (const auto& [out, count] : counts) {
        const Hash256 h = sha256(out);
        if (best == nullptr || count > best_count || (count == best_count && h < best_hash)) {
            best = &out;
            best_count = count;
            best_hash = h;
        }
    }
    return *best;
}

// ---- BrainContract -------------------------------------------------------------------------

BrainContract::BrainContract(HyperParams params, Hash256 genesis_seed)
    : params_(std::move(params)),
      seeds_(genesis_seed, params_.finality),
      training_seeds_(training_genesis(genesis_seed), params_.finality) {}

void BrainContract::mint(AccountId account, Asset amount) {
    if (amount < 0) {
        throw std::invalid_argument("cannot mint a negative amount");
    }
    balances_[account] += amount;
}

void BrainContract::fund_treasury(Asset amount) {
    if (amount < 0) {
        throw std::invalid_argument("cannot fund the treasury with a negative amount");
    }
    treasury_ += amount;
}

void BrainContract::register_node(NodeId node, Bytes pk, AccountId addr) {
    if (nodes_.contains(node)) {
        throw std::invalid_argument("node registered twice");
    }
    Asset& bal = balances_[addr];
    if (bal < params_.node_deposit) {
        throw std::invalid_argument("node account cannot cover the deposit");
    }
    bal -= params_.node_deposit;
    deposits_[node] = params_.node_deposit;
    nodes_.emplace(node, NodeAccount{std::move(pk), addr, params_.node_deposit == 0});
}

void BrainContract::emit(EventKind k, std::uint64_t subject, NodeId node, Asset amount) {
    events_.push_back(Event{k, subject, node, amount});
}

std::vector<Event> BrainContract::drain_events() {
    std::vector<Event> out;
    out.swap(events_);
    return out;
}

void BrainContract::meter(GasOp op, std::uint64_t subject, bool training) {
    if (gas_hook_) {
        gas_hook_(op, subject, training);
    }
}

void BrainContract::slash(NodeId node, Asset amount) {
    auto it = deposits_.find(node);
    if (it == deposits_.end() || amount <= 0) {
        return;
    }
    const Asset taken = std::min(amount, it->second);
    it->second -= taken;
    treasury_ += taken;
    emit(EventKind::Penalized, 0, node, taken);
    if (it->second <= 0) {
        auto& acct = nodes_.at(node);
        if (!acct.ejected) {
            acct.ejected = true;
            emit(EventKind::NodeEjected, 0, node);
        }
    }
}

void BrainContract::pay_from_treasury(AccountId to, Asset amount) {
    if (amount <= 0) {
        return;
    }
    treasury_ -= amount;
    balances_[to] += amount;
}

void BrainContract::push_queue(RequestId id, int priority) {
    QueueKey key{priority, next_seq_++, id};
    queue_.insert(key);
    queue_index_[id] = key;
}

void BrainContract::erase_queue(RequestId id) {
    auto it = queue_index_.find(id);
    if (it == queue_index_.end()) {
        return;
    }
    queue_.erase(it->second);
    queue_index_.erase(it);
}

void BrainContract::refresh_head(Height h_now) {
    std::optional<RequestId> top;
    if (!queue_.empty()) {
        top = queue_.begin()->id;
    }
    if (top != current_head_) {
        current_head_ = top;
        if (top) {
            records_.at(*top).head_since = h_now;
        }
    }
}

void BrainContract::refresh_training_head(Height h_now) {
    std::optional<ProposalId> top;
    if (!training_ring_.empty()) {
        top = training_ring_.front();
    }
    if (top != current_training_head_) {
        current_training_head_ = top;
        if (top) {
            proposals_.at(*top).head_since = h_now;
        }
    }
}

TxResult BrainContract::request_inference(InferenceRequest request, AccountId payer, Height h_now) {
    if (request.input.size() > request.fee_limit) {
        return TxResult::rejected(Reject::InputTooLarge);
    }
    const Asset required = request.escrow_amount();
    if (balance(payer) < required) {
        return TxResult::rejected(Reject::InsufficientBalance);
    }
    if (records_.contains(request.id)) {
        return TxResult::rejected(Reject::Duplicate);
    }
    request.submitted_at = h_now;
    balances_[payer] -= required;
    escrow_[request.id] = required;

    const RequestId id = request.id;
    const int priority = request.priority;
    RequestRecord rec;
    rec.request = std::move(request);
    rec.payer = payer;
    const Height deadline = rec.request.timeout == kNever ? kNever : h_now + rec.request.timeout;
    records_.emplace(id, std::move(rec));
    push_queue(id, priority);
    if (deadline != kNever) {
        expiry_.emplace(deadline, id);
    }
    meter(GasOp::PushPrior, id);
    emit(EventKind::RequestQueued, id);
    refresh_head(h_now);
    return {Status::Accepted, Reject::None};
}

TxResult BrainContract::check_vrf(NodeId node, const sortition::SortitionMsg& msg,
                                  const sortition::VrfOutput& vrf, const U256& difficulty) {
    const auto& acct = nodes_.at(node);
    const Bytes bytes = msg.serialize();
    if (!sortition::verify(acct.pk, bytes, vrf.y, vrf.proof)) {
        slash(node, params_.penalty_commit);
        return TxResult::rejected(Reject::BadProof);
    }
    if (!sortition::is_elected(vrf.y, difficulty)) {
        slash(node, params_.penalty_commit);
        return TxResult::rejected(Reject::NotElected);
    }
    return {Status::Accepted, Reject::None};
}

TxResult BrainContract::commit(const CommitTx& tx, Height h_now) {
    auto rit = records_.find(tx.request_id);
    if (rit == records_.end()) {
        return TxResult::rejected(Reject::UnknownRequest);
    }
    RequestRecord& rec = rit->second;
    auto nit = nodes_.find(tx.node_id);
    if (nit == nodes_.end()) {
        return TxResult::rejected(Reject::UnknownNode);
    }
    if (nit->second.ejected) {
        return TxResult::rejected(Reject::NodeEjected);
    }

    // Commits landing in the block that completed the quorum are surplus: recorded and
    // rewarded, but outside K_C.
    const bool surplus = rec.phase == Phase::Revealing && rec.quorum_at == h_now;
    if (rec.phase != Phase::Queued && !surplus) {
        return TxResult::rejected(Reject::PhaseClosed);
    }
    if (!surplus && current_head_ != tx.request_id) {
        return TxResult::rejected(Reject::NotHead);
    }
    const bool already = rec.commits.contains(tx.node_id) ||
                         std::any_of(rec.surplus.begin(), rec.surplus.end(),
                                     [&](const CommitEntry& c) { return c.node_id == tx.node_id; });
    if (already) {
        return TxResult::rejected(Reject::Duplicate);
    }

    const Hash256& expected_seed = surplus ? rec.sortition_seed : seeds_.lookback();
    if (tx.msg.request_digest != rec.request.digest() || tx.msg.seed != expected_seed) {
        return TxResult::rejected(Reject::WrongMessage);
    }
    const Height first_epoch = sortition::epoch_of(rec.head_since, params_.epoch_inference);
    const Height last_epoch = sortition::epoch_of(h_now, params_.epoch_inference);
    if (tx.msg.epoch_index < first_epoch || tx.msg.epoch_index > last_epoch) {
        return TxResult::rejected(Reject::WrongEpoch);
    }

    meter(GasOp::Verify, tx.request_id);
    if (auto r = check_vrf(tx.node_id, tx.msg, tx.vrf, params_.difficulty_inference); !r.ok()) {
        return r;
    }

    const bool completes = !surplus && rec.commits.size() + 1 >= params_.quorum_commit;
    if (completes) {
        const Bytes seed_msg = sortition::seed_evolution_msg(seeds_.latest(), seeds_.round() + 1);
        if (!sortition::verify(nit->second.pk, seed_msg, tx.seed_vrf.y, tx.seed_vrf.proof)) {
            slash(tx.node_id, params_.penalty_commit);
            return TxResult::rejected(Reject::BadSeedProof);
        }
    }

    CommitEntry entry{tx.request_id, tx.node_id, tx.vrf.y, tx.vrf.proof, tx.commit_hash, h_now};
    meter(GasOp::Commit, tx.request_id);
    if (surplus) {
        rec.surplus.push_back(std::move(entry));
        return {Status::Surplus, Reject::None};
    }
    rec.commits.emplace(tx.node_id, std::move(entry));

    if (rec.commits.size() == 1) {
        erase_queue(tx.request_id);
        push_queue(tx.request_id, kPriorityMax);
        emit(EventKind::PriorityPinned, tx.request_id);
    }
    if (!completes) {
        return {Status::Accepted, Reject::None};
    }

    erase_queue(tx.request_id);
    meter(GasOp::PopPrior, tx.request_id);
    rec.phase = Phase::Revealing;
    rec.quorum_at = h_now;
    rec.sortition_seed = seeds_.lookback();
    seeds_.push(tx.seed_vrf.y);
    revealing_.insert(tx.request_id);
    emit(EventKind::QuorumReached, tx.request_id, tx.node_id);
    refresh_head(h_now);
    return {Status::QuorumReached, Reject::None};
}

TxResult BrainContract::reveal(const RevealTx& tx, Height h_now) {
    auto rit = records_.find(tx.request_id);
    if (rit == records_.end()) {
        return TxResult::rejected(Reject::UnknownRequest);
    }
    RequestRecord& rec = rit->second;
    if (rec.phase != Phase::Revealing) {
        return TxResult::rejected(Reject::PhaseClosed);
    }
    auto cit = rec.commits.find(tx.node_id);
    if (cit == rec.commits.end()) {
        return TxResult::rejected(Reject::NotCommittee);
    }
    if (rec.reveals.contains(tx.node_id)) {
        return TxResult::rejected(Reject::Duplicate);
    }
    if (tx.addr != nodes_.at(tx.node_id).addr) {
        return TxResult::rejected(Reject::WrongAddress);
    }
    if (commit_hash(tx.output, tx.addr, tx.nonce) != cit->second.commit_hash) {
        return TxResult::rejected(Reject::HashMismatch);
    }
    meter(GasOp::Reveal, tx.request_id);
    rec.reveals.emplace(tx.node_id,
                        RevealEntry{tx.request_id, tx.node_id, tx.output, tx.addr, tx.nonce});
    if (rec.reveals.size() >= params_.quorum_reveal) {
        execute(rec, tx.node_id, h_now, false);
        return {Status::Executed, Reject::None};
    }
    return {Status::Accepted, Reject::None};
}

void BrainContract::execute(RequestRecord& rec, NodeId executor, Height h_now, bool partial) {
    const InferenceRequest& q = rec.request;
    std::vector<Bytes> outputs;
    outputs.reserve(rec.reveals.size());
    for (const auto& [node, r] : rec.reveals) {
        outputs.push_back(r.output);
    }
    ExecutionReceipt receipt;
    receipt.request_id = q.id;
    receipt.at_block = h_now;
    receipt.output = plurality(outputs);
    receipt.executor = executor;
    receipt.partial = partial;
    for (const auto& [node, r] : rec.reveals) {
        (r.output == receipt.output ? receipt.consensus_revealers : receipt.deviant_revealers)
            .push_back(node);
    }

    Asset& held = escrow_.at(q.id);
    const Asset fee_budget = static_cast<Asset>(q.fee_limit) * q.fee_price;
    const std::uint64_t used = q.input.size() + receipt.output.size();
    Asset fee = 0;
    if (used > q.fee_limit) {
        // Over-limit results cancel the call; the whole fee budget is consumed.
        receipt.over_limit = true;
        fee = fee_budget;
        balances_[rec.payer] += q.value;
    } else {
        fee = static_cast<Asset>(used) * q.fee_price;
        balances_[q.target] += q.value;  // ExecuteOp: target.funcsig(output) with value
        balances_[rec.payer] += fee_budget - fee;
        receipt.refunded = fee_budget - fee;
    }
    receipt.fee_charged = fee;
    held -= fee_budget + q.value;

    // PostOp: fee shared by the consensus revealers, remainder to the treasury.
    const auto n_consensus = static_cast<Asset>(receipt.consensus_revealers.size());
    const Asset share = n_consensus > 0 ? fee / n_consensus : 0;
    for (NodeId n : receipt.consensus_revealers) {
        balances_[nodes_.at(n).addr] += share;
        pay_from_treasury(nodes_.at(n).addr, params_.reward_reveal);
    }
    treasury_ += fee - share * n_consensus;
    pay_from_treasury(nodes_.at(executor).addr, params_.reward_execute);
    for (const auto& [n, c] : rec.commits) {
        pay_from_treasury(nodes_.at(n).addr, params_.reward_commit);
    }
    for (const auto& c : rec.surplus) {
        pay_from_treasury(nodes_.at(c.node_id).addr, params_.reward_commit);
    }
    for (NodeId n : receipt.deviant_revealers) {
        slash(n, params_.penalty_reveal);
    }
    escrow_.erase(q.id);
    rec.phase = Phase::Executed;
    revealing_.erase(q.id);
    emit(EventKind::Executed, q.id, executor, fee);
    rec.receipt = std::move(receipt);
}

void BrainContract::cancel_request(RequestRecord& rec, Phase terminal, Height h_now) {
    const InferenceRequest& q = rec.request;
    const bool was_head = current_head_ == q.id;
    erase_queue(q.id);
    for (auto it = expiry_.begin(); it != expiry_.end();) {
        it = it->second == q.id ? expiry_.erase(it) : std::next(it);
    }
    revealing_.erase(q.id);
    rec.commits.clear();
    rec.reveals.clear();
    rec.phase = terminal;

    // Refund (feeLimit - |input|) * feePrice plus value; the input portion goes to the treasury.
    const Asset refund = static_cast<Asset>(q.fee_limit - q.input.size()) * q.fee_price + q.value;
    Asset& held = escrow_.at(q.id);
    balances_[rec.payer] += refund;
    treasury_ += held - refund;
    escrow_.erase(q.id);

    if (was_head) {
        seeds_.push(sortition::seed_hash_step(seeds_.latest(), seeds_.round() + 1));
    }
    refresh_head(h_now);
}

bool BrainContract::check_commit_timeout(RequestId id, Height h_now) {
    auto it = records_.find(id);
    if (it == records_.end() || params_.commit_timeout == kNever) {
        return false;
    }
    RequestRecord& rec = it->second;
    if (rec.phase != Phase::Queued || current_head_ != id || rec.head_since == kNever) {
        return false;
    }
    if (h_now - rec.head_since <= params_.commit_timeout) {
        return false;
    }
    cancel_request(rec, Phase::Cancelled, h_now);
    emit(EventKind::CommitFallback, id);
    return true;
}

bool BrainContract::check_reveal_timeout(RequestId id, Height h_now) {
    auto it = records_.find(id);
    if (it == records_.end() || params_.reveal_timeout == kNever) {
        return false;
    }
    RequestRecord& rec = it->second;
    if (rec.phase != Phase::Revealing || h_now - rec.quorum_at <= params_.reveal_timeout) {
        return false;
    }
    for (const auto& [node, c] : rec.commits) {
        if (!rec.reveals.contains(node)) {
            slash(node, params_.penalty_reveal);
        }
    }
    if (params_.fallback == FallbackType::ProceedWithRevealed) {
        emit(EventKind::RevealFallbackProceed, id);
        if (rec.reveals.empty()) {
            cancel_request(rec, Phase::Cancelled, h_now);
            return true;
        }
        // The last revealer carries the execution.
        NodeId executor = rec.reveals.begin()->first;
        Height latest = 0;
        for (const auto& [node, c] : rec.commits) {
            if (rec.reveals.contains(node) && c.at_block >= latest) {
                latest = c.at_block;
                executor = node;
            }
        }
        execute(rec, executor, h_now, true);
        return true;
    }
    revealing_.erase(id);
    rec.commits.clear();
    rec.reveals.clear();
    rec.surplus.clear();
    rec.phase = Phase::Queued;
    rec.quorum_at = kNever;
    rec.head_since = kNever;
    ++rec.requeues;
    push_queue(id, kPriorityRequeue);
    emit(EventKind::RevealFallbackRequeue, id);
    refresh_head(h_now);
    return true;
}

void BrainContract::end_of_block(Height h_now) {
    if (current_head_) {
        check_commit_timeout(*current_head_, h_now);
    }
    // q.timeout: requests still waiting for a commit quorum once their validity lapses.
    while (!expiry_.empty() && expiry_.begin()->first < h_now) {
        const RequestId id = expiry_.begin()->second;
        expiry_.erase(expiry_.begin());
        RequestRecord& rec = records_.at(id);
        if (rec.phase == Phase::Queued) {
            cancel_request(rec, Phase::TimedOut, h_now);
            emit(EventKind::RequestTimedOut, id);
        }
    }
    if (params_.reveal_timeout != kNever) {
        const std::vector<RequestId> open(revealing_.begin(), revealing_.end());
        for (RequestId id : open) {
            check_reveal_timeout(id, h_now);
        }
    }

    // Training: proposals expire while queued; reveal timeouts proceed with revealed scores.
    for (auto it = training_ring_.begin(); it != training_ring_.end();) {
        ProposalRecord& p = proposals_.at(*it);
        if (p.update.timeout != kNever && h_now - p.update.submitted_at > p.update.timeout &&
            p.commits.empty()) {
            p.phase = ProposalPhase::Expired;
            emit(EventKind::ProposalExpired, p.update.id);
            meter(GasOp::Pop, p.update.id, true);
            it = training_ring_.erase(it);
        } else {
            ++it;
        }
    }
    if (params_.update_timeout != kNever || params_.reveal_timeout != kNever) {
        const Height limit = std::min(params_.update_timeout, params_.reveal_timeout);
        const std::vector<ProposalId> open(revealing_proposals_.begin(), revealing_proposals_.end());
        for (ProposalId id : open) {
            ProposalRecord& p = proposals_.at(id);
            if (h_now - p.quorum_at > limit) {
                for (const auto& [node, c] : p.commits) {
                    if (!p.scores.contains(node)) {
                        slash(node, params_.penalty_reveal);
                    }
                }
                if (p.scores.empty()) {
                    p.phase = ProposalPhase::Expired;
                    revealing_proposals_.erase(id);
                    emit(EventKind::ProposalExpired, id);
                } else {
                    finalize_training(p, p.scores.rbegin()->first, h_now);
                }
            }
        }
    }
    refresh_training_head(h_now);
}

// ---- training ------------------------------------------------------------------------------

TxResult BrainContract::suggest_update(aafl::ModelUpdate update, const aafl::WeightStore& store,
                                       Height h_now, ProposalId* assigned) {
    auto nit = nodes_.find(update.proposer);
    if (nit == nodes_.end()) {
        return TxResult::rejected(Reject::UnknownNode);
    }
    if (nit->second.ejected) {
        return TxResult::rejected(Reject::NodeEjected);
    }
    const auto weights = store.fetch(update.ver);
    if (!weights || aafl::version_of(*weights) != update.ver) {
        return TxResult::rejected(Reject::VersionMismatch);
    }
    if (training_ring_.size() >= params_.training_ring_capacity) {
        return TxResult::rejected(Reject::RingFull);
    }
    update.id = next_proposal_++;
    update.submitted_at = h_now;
    ProposalRecord rec;
    rec.update = update;
    proposals_.emplace(update.id, std::move(rec));
    training_ring_.push_back(update.id);
    meter(GasOp::Push, update.id, true);
    emit(EventKind::ProposalQueued, update.id, update.proposer);
    if (assigned != nullptr) {
        *assigned = update.id;
    }
    refresh_training_head(h_now);
    return {Status::Accepted, Reject::None};
}

TxResult BrainContract::score_commit(const ScoreCommitTx& tx, Height h_now) {
    auto pit = proposals_.find(tx.proposal_id);
    if (pit == proposals_.end()) {
        return TxResult::rejected(Reject::UnknownRequest);
    }
    ProposalRecord& rec = pit->second;
    auto nit = nodes_.find(tx.node_id);
    if (nit == nodes_.end()) {
        return TxResult::rejected(Reject::UnknownNode);
    }
    if (nit->second.ejected) {
        return TxResult::rejected(Reject::NodeEjected);
    }
    if (tx.node_id == rec.update.proposer) {
        return TxResult::rejected(Reject::Proposer);
    }
    if (rec.phase != ProposalPhase::Queued) {
        return TxResult::rejected(Reject::PhaseClosed);
    }
    if (current_training_head_ != tx.proposal_id) {
        return TxResult::rejected(Reject::NotHead);
    }
    if (rec.commits.contains(tx.node_id)) {
        return TxResult::rejected(Reject::Duplicate);
    }
    if (tx.msg.request_digest != proposal_digest(rec.update) || tx.msg.seed != training_seeds_.lookback()) {
        return TxResult::rejected(Reject::WrongMessage);
    }
    const Height first_epoch = sortition::epoch_of(rec.head_since, params_.epoch_training);
    const Height last_epoch = sortition::epoch_of(h_now, params_.epoch_training);
    if (tx.msg.epoch_index < first_epoch || tx.msg.epoch_index > last_epoch) {
        return TxResult::rejected(Reject::WrongEpoch);
    }
    meter(GasOp::Verify, tx.proposal_id, true);
    if (auto r = check_vrf(tx.node_id, tx.msg, tx.vrf, params_.difficulty_training); !r.ok()) {
        return r;
    }
    const bool completes = rec.commits.size() + 1 >= params_.quorum_commit_training;
    if (completes) {
        const Bytes seed_msg =
            sortition::seed_evolution_msg(training_seeds_.latest(), training_seeds_.round() + 1);
        if (!sortition::verify(nit->second.pk, seed_msg, tx.seed_vrf.y, tx.seed_vrf.proof)) {
            slash(tx.node_id, params_.penalty_commit);
            return TxResult::rejected(Reject::BadSeedProof);
        }
    }
    meter(GasOp::Commit, tx.proposal_id, true);
    rec.commits.emplace(tx.node_id,
                        CommitEntry{tx.proposal_id, tx.node_id, tx.vrf.y, tx.vrf.proof, tx.commit_hash, h_now});
    if (!completes) {
        return {Status::Accepted, Reject::None};
    }
    training_ring_.pop_front();
    meter(GasOp::Pop, tx.proposal_id, true);
    rec.phase = ProposalPhase::Revealing;
    rec.quorum_at = h_now;
    rec.sortition_seed = training_seeds_.lookback();
    training_seeds_.push(tx.seed_vrf.y);
    revealing_proposals_.insert(tx.proposal_id);
    emit(EventKind::ScoreQuorumReached, tx.proposal_id, tx.node_id);
    refresh_training_head(h_now);
    return {Status::QuorumReached, Reject::None};
}

TxResult BrainContract::score_reveal(const ScoreRevealTx& tx, Height h_now) {
    auto pit = proposals_.find(tx.proposal_id);
    if (pit == proposals_.end()) {
        return TxResult::rejected(Reject::UnknownRequest);
    }
    ProposalRecord& rec = pit->second;
    if (rec.phase != ProposalPhase::Revealing) {
        return TxResult::rejected(Reject::PhaseClosed);
    }
    auto cit = rec.commits.find(tx.node_id);
    if (cit == rec.commits.end()) {
        return TxResult::rejected(Reject::NotCommittee);
    }
    if (rec.scores.contains(tx.node_id)) {
        return TxResult::rejected(Reject::Duplicate);
    }
    if (tx.addr != nodes_.at(tx.node_id).addr) {
        return TxResult::rejected(Reject::WrongAddress);
    }
    if (tx.score < 0 || tx.score > 10000) {
        return TxResult::rejected(Reject::ScoreOutOfRange);
    }
    if (commit_hash(encode_score(tx.score), tx.addr, tx.nonce) != cit->second.commit_hash) {
        return TxResult::rejected(Reject::HashMismatch);
    }
    meter(GasOp::Reveal, tx.proposal_id, true);
    rec.scores.emplace(tx.node_id, tx.score);
    if (rec.scores.size() >= params_.quorum_reveal_training) {
        finalize_training(rec, tx.node_id, h_now);
        return {Status::Executed, Reject::None};
    }
    return {Status::Accepted, Reject::None};
}

void BrainContract::finalize_training(ProposalRecord& rec, NodeId executor, Height /*h_now*/) {
    std::vector<std::int64_t> scores;
    scores.reserve(rec.scores.size());
    for (const auto& [node, s] : rec.scores) {
        scores.push_back(s);
    }
    const std::int64_t agreed = lower_median(std::move(scores));
    rec.agreed_score = agreed;
    revealing_proposals_.erase(rec.update.id);
    const AccountId proposer_addr = nodes_.at(rec.update.proposer).addr;
    if (agreed >= params_.score_threshold && agreed > 0) {
        rec.phase = ProposalPhase::Accepted;
        rec.update.round = accepted_.size() + 1;
        accepted_.push_back(AcceptedUpdate{rec.update.id, rec.update.ver, agreed, rec.update.round});
        pay_from_treasury(proposer_addr, params_.reward_suggest);
        emit(EventKind::UpdateAccepted, rec.update.id, rec.update.proposer, agreed);
    } else {
        rec.phase = ProposalPhase::Rejected;
        slash(rec.update.proposer, params_.penalty_suggest);
        emit(EventKind::UpdateRejected, rec.update.id, rec.update.proposer, agreed);
    }
    pay_from_treasury(nodes_.at(executor).addr, params_.reward_update);
}

// ---- views -----------------------------------------------------------------------------------

std::optional<RequestId> BrainContract::head() const { return current_head_; }

std::optional<ProposalId> BrainContract::training_head() const { return current_training_head_; }

const RequestRecord* BrainContract::record(RequestId id) const {
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

const ProposalRecord* BrainContract::proposal(ProposalId id) const {
    auto it = proposals_.find(id);
    return it == proposals_.end() ? nullptr : &it->second;
}

std::vector<RequestId> BrainContract::queue_order() const {
    std::vector<RequestId> out;
    out.reserve(queue_.size());
    for (const auto& k : queue_) {
        out.push_back(k.id);
    }
    return out;
}

std::vector<RequestId> BrainContract::revealing() const {
    return {revealing_.begin(), revealing_.end()};
}

std::vector<ProposalId> BrainContract::revealing_proposals() const {
    return {revealing_proposals_.begin(), revealing_proposals_.end()};
}

int BrainContract::queued_priority(RequestId id) const {
    auto it = queue_index_.find(id);
    return it == queue_index_.end() ? -1 : it->second.priority;
}

Asset BrainContract::balance(AccountId a) const {
    auto it = balances_.find(a);
    return it == balances_.end() ? 0 : it->second;
}

Asset BrainContract::deposit(NodeId n) const {
    auto it = deposits_.find(n);
    return it == deposits_.end() ? 0 : it->second;
}

Asset BrainContract::escrow(RequestId id) const {
    auto it = escrow_.find(id);
    return it == escrow_.end() ? 0 : it->second;
}

Asset BrainContract::total_assets() const {
    Asset total = treasury_;
    for (const auto& [a, v] : balances_) total += v;
    for (const auto& [n, v] : deposits_) total += v;
    for (const auto& [r, v] : escrow_) total += v;
    return total;
}

const NodeAccount* BrainContract::node(NodeId n) const {
    auto it = nodes_.find(n);
    return it == nodes_.end() ? nullptr : &it->second;
}

void BrainContract::dump(std::ostream& os) const {
    os << "seed_round " << seeds_.round() << " lookback " << seeds_.lookback().hex() << '\n';
    os << "treasury " << treasury_ << '\n';
    os << "queue";
    for (const auto& k : queue_) {
        os << ' ' << k.id << '@' << k.priority;
    }
    os << '\n';
    for (const auto& [id, rec] : records_) {
        os << "request " << id << ' ' << to_string(rec.phase) << " payer " << rec.payer
           << " head_since " << (rec.head_since == kNever ? -1 : static_cast<long long>(rec.head_since))
           << " quorum_at " << (rec.quorum_at == kNever ? -1 : static_cast<long long>(rec.quorum_at))
           << " commits " << rec.commits.size() << " surplus " << rec.surplus.size() << " reveals "
           << rec.reveals.size() << " escrow " << escrow(id) << '\n';
    }
    for (const auto& [id, p] : proposals_) {
        os << "proposal " << id << ' ' << to_string(p.phase) << " proposer " << p.update.proposer
           << " commits " << p.commits.size() << " scores " << p.scores.size() << '\n';
    }
    for (const auto& [a, v] : balances_) {
        os << "balance " << a << ' ' << v << '\n';
    }
    for (const auto& [n, v] : deposits_) {
        os << "deposit " << n << ' ' << v << (nodes_.at(n).ejected ? " ejected" : "") << '\n';
    }
}

std::string BrainContract::snapshot() const {
    std::ostringstream ss;
    dump(ss);
    return ss.str();
}

}  // namespace brain::contract
