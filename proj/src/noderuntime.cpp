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

#include "brain/noderuntime.hpp"

#include <algorithm>
#include <stdexcept>

namespace brain::node {

using simchain::Tx;
using simchain::TxKind;

const char* to_string(Behavior b) noexcept {
    switch (b) {
        case Behavior::Honest: return "honest";
        case Behavior::NonRevealer: return "non_revealer";
        case Behavior::DeviantRevealer: return "deviant_revealer";
        case Behavior::LazyScorer: return "lazy_scorer";
    }
    return "?";
}

Bytes run_inference(const InferenceRequest& q, std::uint64_t output_len) {
    const Hash256 base = sha256(ByteWriter{}
                                    .put(q.net)
                                    .put(q.ver)
                                    .put_sized(q.input)
                                    .put_u64(q.seed)
                                    .put_sized(q.args)
                                    .bytes());
    Bytes out;
    out.reserve(output_len);
    for (std::uint64_t counter = 0; out.size() < output_len; ++counter) {
        const Hash256 block = sha256(ByteWriter{}.put(base).put_u64(counter).bytes());
        const std::size_t take = std::min<std::size_t>(block.bytes.size(), output_len - out.size());
        out.insert(out.end(), block.bytes.begin(), block.bytes.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return out;
}

Node::Node(NodeConfig cfg, JobCatalog catalog, double block_interval_s,
           const TrainingContext* training, aafl::WeightStore* store)
    : cfg_(std::move(cfg)),
      catalog_(std::move(catalog)),
      block_interval_s_(block_interval_s),
      training_(training),
      store_(store) {
    if (training_ != nullptr) {
        train_data_ = aafl::make_dataset(training_->task, cfg_.local_dataset_seed, training_->train_samples);
        validation_data_ = aafl::make_dataset(training_->task, cfg_.local_dataset_seed ^ 0x9e3779b97f4a7c15ULL,
                                              training_->validation_samples);
    }
}

void Node::init_global(const aafl::ModelWeights& initial, std::uint32_t n) {
    wma_ = aafl::wma_init(initial, n);
    applied_updates_ = 0;
}

Hash256 Node::make_nonce(std::uint64_t subject, std::uint64_t salt) const {
    return sha256(ByteWriter{}.put(ByteView{cfg_.keypair.sk}).put_u64(subject).put_u64(salt).bytes());
}

void Node::observe(const contract::BrainContract& state, Height h, simchain::Chain& chain) {
    if (const auto* acct = state.node(cfg_.node_id); acct == nullptr || acct->ejected) {
        return;
    }
    observe_inference(state, h, chain);
    if (training_ != nullptr) {
        observe_training(state, h, chain);
    }
}

bool Node::on_new_epoch(const contract::BrainContract& state, Height h) {
    const auto head = state.head();
    if (!head) {
        return false;
    }
    const contract::RequestRecord* rec = state.record(*head);
    const auto& params = state.params();
    const Hash256& seed = state.seeds().lookback();
    if (auto it = tickets_.find(*head);
        it != tickets_.end() && it->second.tenure == rec->head_since && it->second.msg.seed == seed) {
        return true;
    }
    const std::uint64_t epoch = sortition::epoch_of(h, params.epoch_inference);
    const Attempt attempt{*head, rec->head_since, epoch, seed};
    if (last_attempt_ == attempt) {
        return false;
    }
    last_attempt_ = attempt;
    const auto spec = catalog_(*head);
    if (!spec) {
        return false;  // model not held: abstain
    }
    const auto msg = sortition::build_msg(rec->request.digest(), state.seeds(), h, params.epoch_inference);
    auto vrf = sortition::evaluate(cfg_.keypair.sk, msg.serialize());
    ++vrf_evaluations_;
    if (!sortition::is_elected(vrf.y, params.difficulty_inference)) {
        return false;
    }
    tickets_[*head] = Ticket{rec->head_since, msg, std::move(vrf)};
    if (!jobs_.contains(*head)) {
        PendingJob job;
        job.request_id = *head;
        job.elected_epoch = epoch;
        job.inference_done_at = h + simchain::blocks_for(spec->duration_s, block_interval_s_);
        job.output = run_inference(rec->request, spec->output_len);
        if (cfg_.behavior == Behavior::DeviantRevealer && !job.output.empty()) {
            job.output[0] ^= 0xff;
        }
        job.nonce = make_nonce(*head, 0);
        jobs_.emplace(*head, std::move(job));
    }
    return true;
}

void Node::observe_inference(const contract::BrainContract& state, Height h, simchain::Chain& chain) {
    if (const auto head = state.head()) {
        const contract::RequestRecord* rec = state.record(*head);
        if (!rec->commits.contains(cfg_.node_id) && !commit_in_flight_.contains(*head) &&
            on_new_epoch(state, h)) {
            const PendingJob& job = jobs_.at(*head);
            const std::size_t pending = rec->commits.size() + chain.mempool().pending_commits(*head);
            if (job.inference_done_at <= h + 1 && pending < state.params().quorum_commit) {
                const Ticket& ticket = tickets_.at(*head);
                contract::CommitTx c;
                c.request_id = *head;
                c.node_id = cfg_.node_id;
                c.msg = ticket.msg;
                c.vrf = ticket.vrf;
                c.commit_hash = contract::commit_hash(job.output, cfg_.addr, job.nonce);
                c.seed_vrf = sortition::evaluate(
                    cfg_.keypair.sk,
                    sortition::seed_evolution_msg(state.seeds().latest(), state.seeds().round() + 1));
                Tx tx;
                tx.kind = TxKind::Commit;
                tx.sender = cfg_.node_id;
                tx.payload = std::move(c);
                tx.submitted_at_block = h;
                commit_in_flight_.insert(*head);
                chain.submit(std::move(tx), this);
            }
        }
    }

    if (cfg_.behavior == Behavior::NonRevealer) {
        return;
    }
    for (RequestId id : state.revealing()) {
        const contract::RequestRecord* rec = state.record(id);
        if (!rec->commits.contains(cfg_.node_id) || rec->reveals.contains(cfg_.node_id) ||
            reveal_in_flight_.contains(id)) {
            continue;
        }
        const PendingJob& job = jobs_.at(id);
        contract::RevealTx r;
        r.request_id = id;
        r.node_id = cfg_.node_id;
        r.output = job.output;
        r.addr = cfg_.addr;
        r.nonce = job.nonce;
        Tx tx;
        tx.kind = TxKind::RevealExecute;
        tx.sender = cfg_.node_id;
        tx.payload = std::move(r);
        tx.submitted_at_block = h;
        reveal_in_flight_.insert(id);
        chain.submit(std::move(tx), this);
    }
}

std::optional<std::int64_t> Node::evaluate_model(const aafl::ModelUpdate& update) const {
    if (store_ == nullptr || !validation_data_) {
        return std::nullopt;
    }
    const auto weights = store_->fetch(update.ver);
    if (!weights) {
        return std::nullopt;
    }
    std::int64_t score = aafl::sign_accuracy_bp(*weights, *validation_data_);
    if (cfg_.behavior == Behavior::LazyScorer) {
        score = std::clamp<std::int64_t>(score + cfg_.score_bias, 0, 10000);
    }
    return score;
}

void Node::sync_global(const contract::BrainContract& state) {
    if (!wma_ || store_ == nullptr) {
        return;
    }
    const auto& accepted = state.accepted_updates();
    for (; applied_updates_ < accepted.size(); ++applied_updates_) {
        const auto& u = accepted[applied_updates_];
        const auto weights = store_->fetch(u.ver);
        if (!weights) {
            throw std::runtime_error("accepted update weights missing from the store");
        }
        wma_ = aafl::wma_step(*wma_, *weights, static_cast<double>(u.score) / 10000.0);
    }
}

Tx Node::make_proposal(const std::string& net, Height timeout) {
    if (training_ == nullptr || store_ == nullptr || !train_data_) {
        throw std::logic_error("proposals need a training context and a weight store");
    }
    aafl::ModelWeights start;
    if (wma_) {
        start = wma_->global;
    } else {
        start.values.assign(training_->task.w_star.size(), 0.0);
    }
    const aafl::ModelWeights trained =
        aafl::train_local(start, *train_data_, training_->local_steps, training_->learning_rate);
    aafl::ModelUpdate update;
    update.net = net;
    update.ver = store_->store(trained);
    update.proposer = cfg_.node_id;
    update.timeout = timeout;
    Tx tx;
    tx.kind = TxKind::Suggest;
    tx.sender = cfg_.node_id;
    tx.payload = simchain::SuggestPayload{std::move(update)};
    return tx;
}

void Node::observe_training(const contract::BrainContract& state, Height h, simchain::Chain& chain) {
    sync_global(state);
    const auto& params = state.params();

    if (const auto head = state.training_head()) {
        const contract::ProposalRecord* p = state.proposal(*head);
        const bool eligible = p->update.proposer != cfg_.node_id && !p->commits.contains(cfg_.node_id) &&
                              !score_commit_in_flight_.contains(*head);
        if (eligible) {
            const Hash256& seed = state.training_seeds().lookback();
            const std::uint64_t epoch = sortition::epoch_of(h, params.epoch_training);
            auto it = score_tickets_.find(*head);
            const bool valid = it != score_tickets_.end() && it->second.tenure == p->head_since &&
                               it->second.msg.seed == seed;
            const Attempt attempt{*head, p->head_since, epoch, seed};
            if (!valid && last_score_attempt_ != attempt) {
                last_score_attempt_ = attempt;
                const auto msg = sortition::build_msg(contract::proposal_digest(p->update),
                                                      state.training_seeds(), h, params.epoch_training);
                auto vrf = sortition::evaluate(cfg_.keypair.sk, msg.serialize());
                ++vrf_evaluations_;
                if (sortition::is_elected(vrf.y, params.difficulty_training)) {
                    it = score_tickets_.insert_or_assign(*head, Ticket{p->head_since, msg, std::move(vrf)}).first;
                }
            }
            it = score_tickets_.find(*head);
            if (it != score_tickets_.end() && it->second.tenure == p->head_since) {
                if (!score_commits_.contains(*head)) {
                    if (const auto score = evaluate_model(p->update)) {
                        score_commits_.emplace(*head, std::make_pair(*score, make_nonce(*head, 1)));
                    }
                }
                if (auto sc = score_commits_.find(*head); sc != score_commits_.end()) {
                    contract::ScoreCommitTx c;
                    c.proposal_id = *head;
                    c.node_id = cfg_.node_id;
                    c.msg = it->second.msg;
                    c.vrf = it->second.vrf;
                    c.commit_hash =
                        contract::commit_hash(contract::encode_score(sc->second.first), cfg_.addr, sc->second.second);
                    c.seed_vrf = sortition::evaluate(cfg_.keypair.sk,
                                                     sortition::seed_evolution_msg(state.training_seeds().latest(),
                                                                                   state.training_seeds().round() + 1));
                    Tx tx;
                    tx.kind = TxKind::ScoreCommit;
                    tx.sender = cfg_.node_id;
                    tx.payload = std::move(c);
                    tx.submitted_at_block = h;
                    score_commit_in_flight_.insert(*head);
                    chain.submit(std::move(tx), this);
                }
            }
        }
    }

    if (cfg_.behavior == Behavior::NonRevealer) {
        return;
    }
    for (ProposalId id : state.revealing_proposals()) {
        const contract::ProposalRecord* p = state.proposal(id);
        if (!p->commits.contains(cfg_.node_id) || p->scores.contains(cfg_.node_id) ||
            score_reveal_in_flight_.contains(id)) {
            continue;
        }
        const auto& [score, nonce] = score_commits_.at(id);
        contract::ScoreRevealTx r;
        r.proposal_id = id;
        r.node_id = cfg_.node_id;
        r.score = score;
        r.addr = cfg_.addr;
        r.nonce = nonce;
        Tx tx;
        tx.kind = TxKind::ScoreReveal;
        tx.sender = cfg_.node_id;
        tx.payload = std::move(r);
        tx.submitted_at_block = h;
        score_reveal_in_flight_.insert(id);
        chain.submit(std::move(tx), this);
    }
}

void Node::on_included(const Tx& tx, const contract::TxResult& result, Height /*h*/) {
    const std::uint64_t subject = tx.subject();
    switch (tx.kind) {
        case TxKind::Commit:
            commit_in_flight_.erase(subject);
            if (!result.ok()) {
                tickets_.erase(subject);
            }
            break;
        case TxKind::RevealExecute:
            reveal_in_flight_.erase(subject);
            if (result.ok()) {
                revealed_.insert(subject);
            }
            break;
        case TxKind::ScoreCommit:
            score_commit_in_flight_.erase(subject);
            if (!result.ok()) {
                score_tickets_.erase(subject);
            }
            break;
        case TxKind::ScoreReveal:
            score_reveal_in_flight_.erase(subject);
            if (result.ok()) {
                score_revealed_.insert(subject);
            }
            break;
        default:
            break;
    }
}

}  // namespace brain::node
