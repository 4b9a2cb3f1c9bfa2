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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "brain/aafl.hpp"
#include "brain/contract.hpp"
#include "brain/simchain.hpp"
#include "brain/sortition.hpp"

namespace brain::node {

enum class Behavior { Honest, NonRevealer, DeviantRevealer, LazyScorer };

const char* to_string(Behavior b) noexcept;

struct NodeConfig {
    NodeId node_id = 0;
    sortition::KeyPair keypair;
    AccountId addr = 0;
    Behavior behavior = Behavior::Honest;
    std::int64_t score_bias = 0;  // LazyScorer only, basis points
    std::uint64_t local_dataset_seed = 0;
};

// Off-chain facts about a request that every node shares: how long the model takes and
// how many output bytes it produces.
struct JobSpec {
    double duration_s = 0.0;
    std::uint64_t output_len = 32;
};
using JobCatalog = std::function<std::optional<JobSpec>(RequestId)>;

struct PendingJob {
    RequestId request_id = kNoRequest;
    std::uint64_t elected_epoch = 0;
    Height inference_done_at = 0;  // first block the commit may land in
    Bytes output;
    Hash256 nonce;
};

// Deterministic stand-in for q.net_{q.ver}(q.input, q.seed, q.args): H(net||ver||input||seed||args)
// expanded by counter hashing to `output_len` bytes.
Bytes run_inference(const InferenceRequest& q, std::uint64_t output_len);

// Local learning context for training committees and proposals.
struct TrainingContext {
    aafl::LinearTask task;
    std::size_t train_samples = 64;
    std::size_t validation_samples = 256;
    std::uint32_t local_steps = 20;
    double learning_rate = 0.05;
};

class Node : public simchain::Participant {
  public:
    Node(NodeConfig cfg, JobCatalog catalog, double block_interval_s,
         const TrainingContext* training = nullptr, aafl::WeightStore* store = nullptr);

    void observe(const contract::BrainContract& state, Height h, simchain::Chain& chain) override;
    void on_included(const simchain::Tx& tx, const contract::TxResult& result, Height h) override;

    // Sortition attempt for the current queue head at observed height h. Returns true when
    // the node holds a valid election ticket for the head afterwards.
    bool on_new_epoch(const contract::BrainContract& state, Height h);

    // Score of an update's weights on this node's validation set, in basis points.
    // Returns nullopt when the weights cannot be resolved.
    std::optional<std::int64_t> evaluate_model(const aafl::ModelUpdate& update) const;

    // Trains from the local global model on local data, stores the weights and returns the
    // Suggest transaction. Requires a training context and a weight store.
    simchain::Tx make_proposal(const std::string& net, Height timeout);

    // Applies every accepted update the contract recorded since the last call.
    void sync_global(const contract::BrainContract& state);

    [[nodiscard]] const NodeConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] NodeId id() const noexcept { return cfg_.node_id; }
    [[nodiscard]] const std::optional<aafl::WmaState>& wma() const noexcept { return wma_; }
    [[nodiscard]] std::size_t vrf_evaluations() const noexcept { return vrf_evaluations_; }
    [[nodiscard]] const std::map<RequestId, PendingJob>& jobs() const noexcept { return jobs_; }

    void init_global(const aafl::ModelWeights& initial, std::uint32_t n);

  private:
    struct Ticket {
        Height tenure = kNever;  // head_since of the request when the ticket was drawn
        sortition::SortitionMsg msg;
        sortition::VrfOutput vrf;
    };
    struct Attempt {
        std::uint64_t id = 0;
        Height tenure = kNever;
        std::uint64_t epoch = 0;
        Hash256 seed;
        bool operator==(const Attempt&) const = default;
    };

    void observe_inference(const contract::BrainContract& state, Height h, simchain::Chain& chain);
    void observe_training(const contract::BrainContract& state, Height h, simchain::Chain& chain);
    Hash256 make_nonce(std::uint64_t subject, std::uint64_t salt) const;

    NodeConfig cfg_;
    JobCatalog catalog_;
    double block_interval_s_;
    const TrainingContext* training_;
    aafl::WeightStore* store_;

    std::map<RequestId, PendingJob> jobs_;
    std::map<RequestId, Ticket> tickets_;
    std::optional<Attempt> last_attempt_;
    std::set<std::uint64_t> commit_in_flight_;
    std::set<std::uint64_t> reveal_in_flight_;
    std::set<RequestId> revealed_;

    // training
    std::map<ProposalId, Ticket> score_tickets_;
    std::optional<Attempt> last_score_attempt_;
    std::map<ProposalId, std::pair<std::int64_t, Hash256>> score_commits_;  // score, nonce
    std::set<ProposalId> score_commit_in_flight_;
    std::set<ProposalId> score_reveal_in_flight_;
    std::set<ProposalId> score_revealed_;
    std::optional<aafl::Dataset> train_data_;
    std::optional<aafl::Dataset> validation_data_;
    std::optional<aafl::WmaState> wma_;
    std::size_t applied_updates_ = 0;

    std::size_t vrf_evaluations_ = 0;
};

}  // namespace brain::node
