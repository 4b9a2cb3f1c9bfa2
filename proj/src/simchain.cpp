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

#include "brain/simchain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace brain::simchain {

void ChainParams::validate() const {
    if (!(block_interval_s > 0.0) || txs_per_block == 0 || !(base_tx_exec_ms > 0.0)) {
        throw std::invalid_argument("chain parameters must be strictly positive");
    }
}

const char* to_string(TxKind k) noexcept {
    switch (k) {
        case TxKind::Request: return "request";
        case TxKind::Commit: return "commit";
        case TxKind::RevealExecute: return "reveal";
        case TxKind::Suggest: return "suggest";
        case TxKind::ScoreCommit: return "score_commit";
        case TxKind::ScoreReveal: return "score_reveal";
        case TxKind::Plain: return "plain";
    }
    return "?";
}

Height blocks_for(double seconds, double block_interval_s) {
    const double n = std::ceil(seconds / block_interval_s);
    return n < 1.0 ? 1 : static_cast<Height>(n);
}

Asset Tx::fee_price() const noexcept {
    if (const auto* r = std::get_if<RequestPayload>(&payload)) {
        return r->request.fee_price;
    }
    return 0;
}

std::uint64_t Tx::subject() const noexcept {
    return std::visit(
        [](const auto& p) -> std::uint64_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RequestPayload>) {
                return p.request.id;
            } else if constexpr (std::is_same_v<T, contract::CommitTx> ||
                                 std::is_same_v<T, contract::RevealTx>) {
                return p.request_id;
            } else if constexpr (std::is_same_v<T, SuggestPayload>) {
                return p.update.id;
            } else if constexpr (std::is_same_v<T, contract::ScoreCommitTx> ||
                                 std::is_same_v<T, contract::ScoreRevealTx>) {
                return p.proposal_id;
            } else {
                return 0;
            }
        },
        payload);
}

// ---- Mempool ---------------------------------------------------------------------------

std::uint64_t Mempool::tick_of(const FifoItem& item) noexcept {
    if (const auto* tx = std::get_if<Tx>(&item)) {
        return tx->tick;
    }
    return std::get<PlainRun>(item).tick;
}

std::uint64_t Mempool::submit(Tx tx) {
    if (tx.kind == TxKind::Plain) {
        const std::uint64_t tick = next_tick_;
        submit_plain(1);
        return tick;
    }
    tx.tick = next_tick_++;
    const std::uint64_t tick = tx.tick;
    if (tx.kind == TxKind::Request) {
        request_slots_.insert(tick);
        RequestKey key{tx.fee_price(), tick};
        requests_.emplace(key, std::move(tx));
    } else {
        if (tx.kind == TxKind::Commit) {
            ++pending_commits_[tx.subject()];
        }
        fifo_.emplace_back(std::move(tx));
    }
    return tick;
}

void Mempool::submit_plain(std::uint64_t count) {
    if (count == 0) {
        return;
    }
    if (!fifo_.empty()) {
        auto* run = std::get_if<PlainRun>(&fifo_.back());
        if (run != nullptr && run->tick + run->count == next_tick_) {  // no request in between
            run->count += count;
            next_tick_ += count;
            return;
        }
    }
    fifo_.emplace_back(PlainRun{next_tick_, count});
    next_tick_ += count;
}

std::optional<Tx> Mempool::pop() {
    const bool have_fifo = !fifo_.empty();
    const bool have_request = !requests_.empty();
    if (!have_fifo && !have_request) {
        return std::nullopt;
    }
    const bool take_request =
        have_request && (!have_fifo || *request_slots_.begin() < tick_of(fifo_.front()));
    if (take_request) {
        auto it = requests_.begin();
        Tx tx = std::move(it->second);
        requests_.erase(it);
        request_slots_.erase(request_slots_.begin());
        return tx;
    }
    FifoItem& front = fifo_.front();
    if (auto* run = std::get_if<PlainRun>(&front)) {
        Tx tx;
        tx.kind = TxKind::Plain;
        tx.tick = run->tick;
        ++run->tick;
        if (--run->count == 0) {
            fifo_.pop_front();
        }
        return tx;
    }
    Tx tx = std::move(std::get<Tx>(front));
    fifo_.pop_front();
    if (tx.kind == TxKind::Commit) {
        if (auto it = pending_commits_.find(tx.subject()); it != pending_commits_.end() && --it->second == 0) {
            pending_commits_.erase(it);
        }
    }
    return tx;
}

std::uint32_t Mempool::pending_commits(RequestId id) const noexcept {
    auto it = pending_commits_.find(id);
    return it == pending_commits_.end() ? 0 : it->second;
}

std::uint64_t Mempool::plain_pending() const noexcept {
    std::uint64_t n = 0;
    for (const auto& item : fifo_) {
        if (const auto* run = std::get_if<PlainRun>(&item)) {
            n += run->count;
        }
    }
    return n;
}

std::size_t Mempool::size() const noexcept {
    std::size_t n = requests_.size();
    for (const auto& item : fifo_) {
        if (const auto* run = std::get_if<PlainRun>(&item)) {
            n += run->count;
        } else {
            ++n;
        }
    }
    return n;
}

// ---- EventLog --------------------------------------------------------------------------

void EventLog::write(std::ostream& os) const {
    for (const auto& r : records) {
        os << r.block << '\t' << r.kind << '\t' << r.request_id << '\t';
        if (r.node_id == kNoNode) {
            os << '-';
        } else {
            os << r.node_id;
        }
        os << '\t' << r.outcome << '\t' << r.amount << '\n';
    }
    os << "plain_txs\t" << plain_txs << '\n';
}

std::string EventLog::to_string() const {
    std::ostringstream ss;
    write(ss);
    return ss.str();
}

// ---- Chain -----------------------------------------------------------------------------

Chain::Chain(ChainParams params, contract::BrainContract& state, const aafl::WeightStore* store)
    : params_(params), state_(state), store_(store) {
    params_.validate();
    log_.base_tx_exec_ms = params_.base_tx_exec_ms;
}

void Chain::submit(Tx tx, Participant* origin) {
    tx.exec_time_ms = params_.base_tx_exec_ms;
    const std::uint64_t tick = mempool_.submit(std::move(tx));
    if (origin != nullptr) {
        origins_[tick] = origin;
    }
}

void Chain::load_stream(const workload::Stream& stream) {
    if (stream.user_txs_per_block > params_.txs_per_block) {
        throw std::invalid_argument("user arrival rate exceeds block capacity");
    }
    stream_ = &stream;
    next_request_ = 0;
    next_user_tick_ = 0;
}

namespace {

// First user tick that arrives at or after block `b`.
std::uint64_t first_tick_of(const workload::Stream& s, Height b) {
    if (b <= 1) {
        return 0;
    }
    auto t = static_cast<std::uint64_t>(std::ceil(static_cast<double>(b - 1) * s.user_txs_per_block));
    while (t > 0 && s.block_of(t - 1) >= b) --t;
    while (s.block_of(t) < b) ++t;
    return t;
}

}  // namespace

void Chain::feed_users(Height h) {
    if (stream_ == nullptr) {
        return;
    }
    const std::uint64_t end = std::min(stream_->user_txs, first_tick_of(*stream_, h + 1));
    while (next_user_tick_ < end) {
        const bool have_request = next_request_ < stream_->requests.size();
        const std::uint64_t next_req_tick =
            have_request ? stream_->requests[next_request_].tick : stream_->user_txs;
        if (next_req_tick < end && next_req_tick == next_user_tick_) {
            const auto& a = stream_->requests[next_request_++];
            Tx tx;
            tx.kind = TxKind::Request;
            tx.sender = a.payer;
            tx.payload = RequestPayload{a.request, a.payer};
            tx.submitted_at_block = h;
            submit(std::move(tx));
            ++next_user_tick_;
            continue;
        }
        const std::uint64_t run_end = std::min(end, next_req_tick);
        mempool_.submit_plain(run_end - next_user_tick_);
        next_user_tick_ = run_end;
    }
}

contract::TxResult Chain::apply(const Tx& tx, Height h) {
    using contract::Reject;
    using contract::TxResult;
    return std::visit(
        [&](const auto& p) -> TxResult {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RequestPayload>) {
                return state_.request_inference(p.request, p.payer, h);
            } else if constexpr (std::is_same_v<T, contract::CommitTx>) {
                return state_.commit(p, h);
            } else if constexpr (std::is_same_v<T, contract::RevealTx>) {
                return state_.reveal(p, h);
            } else if constexpr (std::is_same_v<T, SuggestPayload>) {
                if (store_ == nullptr) {
                    return TxResult::rejected(Reject::VersionMismatch);
                }
                return state_.suggest_update(p.update, *store_, h);
            } else if constexpr (std::is_same_v<T, contract::ScoreCommitTx>) {
                return state_.score_commit(p, h);
            } else if constexpr (std::is_same_v<T, contract::ScoreRevealTx>) {
                return state_.score_reveal(p, h);
            } else {
                return TxResult{contract::Status::Accepted, Reject::None};
            }
        },
        tx.payload);
}

Block Chain::produce_block() {
    const Height h = ++height_;
    feed_users(h);

    Block block;
    block.height = h;
    auto drain_events = [&]() {
        for (const auto& e : state_.drain_events()) {
            log_.records.push_back(LogRecord{h, std::string("event:") + contract::to_string(e.kind),
                                             e.subject, e.node, "", e.amount});
            if (e.kind == contract::EventKind::Executed) {
                log_.executed_at.emplace(e.subject, h);
            } else if (e.kind == contract::EventKind::RequestTimedOut ||
                       e.kind == contract::EventKind::CommitFallback) {
                ++log_.timed_out;
            }
        }
    };

    std::size_t filled = 0;
    while (filled < params_.txs_per_block) {
        auto next = mempool_.pop();
        if (!next) {
            break;
        }
        ++filled;
        if (next->kind == TxKind::Plain) {
            ++block.plain_txs;
            continue;
        }
        Tx& tx = *next;
        const contract::TxResult result = apply(tx, h);
        ++log_.other_txs;
        const NodeId node = tx.kind == TxKind::Request ? kNoNode : static_cast<NodeId>(tx.sender);
        std::string outcome = contract::to_string(result.status);
        if (!result.ok()) {
            outcome += std::string(":") + contract::to_string(result.reason);
        }
        log_.records.push_back(LogRecord{h, to_string(tx.kind), tx.subject(), node, std::move(outcome), 0});
        if (tx.kind == TxKind::Request && result.ok()) {
            log_.requested_at.emplace(tx.subject(), h);
        }
        drain_events();
        if (auto it = origins_.find(tx.tick); it != origins_.end()) {
            Participant* origin = it->second;
            origins_.erase(it);
            origin->on_included(tx, result, h);
        }
        block.txs.push_back(std::move(tx));
    }
    log_.plain_txs += block.plain_txs;
    max_fill_ = std::max(max_fill_, filled);

    state_.end_of_block(h);
    drain_events();
    log_.last_block = h;

    for (Participant* p : participants_) {
        p->observe(state_, h, *this);
    }
    return block;
}

bool Chain::contract_idle() const {
    return !state_.head() && state_.revealing().empty() && state_.training_queue_size() == 0 &&
           state_.revealing_proposals().empty();
}

bool Chain::all_resolved() const {
    const bool stream_done = stream_ == nullptr || next_user_tick_ >= stream_->user_txs;
    return stream_done && mempool_.empty() && contract_idle();
}

void Chain::fast_forward() {
    if (stream_ == nullptr || !contract_idle() || !mempool_.only_plain()) {
        return;
    }
    if (next_request_ < stream_->requests.size()) {
        const Height target = stream_->block_of(stream_->requests[next_request_].tick);
        if (target <= height_ + 2) {
            return;
        }
        // Every user transaction before `target` is plain and capacity never binds.
        const std::uint64_t first = first_tick_of(*stream_, target);
        log_.plain_txs += mempool_.plain_pending() + (first - next_user_tick_);
        mempool_ = Mempool{};
        next_user_tick_ = first;
        height_ = target - 1;
        log_.last_block = height_;
        return;
    }
    if (next_user_tick_ < stream_->user_txs || !mempool_.empty()) {
        const Height last = stream_->user_txs == 0 ? height_ : stream_->block_of(stream_->user_txs - 1);
        log_.plain_txs += mempool_.plain_pending() + (stream_->user_txs - next_user_tick_);
        mempool_ = Mempool{};
        next_user_tick_ = stream_->user_txs;
        height_ = std::max(height_, last);
        log_.last_block = height_;
    }
}

const EventLog& Chain::run(Height max_blocks) {
    while (height_ < max_blocks && !all_resolved()) {
        fast_forward();
        if (all_resolved()) {
            break;
        }
        produce_block();
    }
    return log_;
}

}  // namespace brain::simchain
