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

#include <stdexcept>
#include <vector>

#include "brain/contract.hpp"
#include "brain/sortition.hpp"

// Drives a BrainContract directly, bypassing the chain, for exact post-state scenarios.
struct ContractFixture {
    static constexpr brain::Asset kTreasury = 1'000'000;
    static constexpr brain::AccountId kPayer = 5000;
    static constexpr brain::Asset kPayerFunds = 1'000'000;

    brain::contract::HyperParams params;
    brain::contract::BrainContract c;
    std::vector<brain::sortition::KeyPair> keys;

    static brain::contract::HyperParams everyone_elected(brain::contract::HyperParams p) {
        p.difficulty_inference = brain::U256::max();
        p.difficulty_training = brain::U256::max();
        return p;
    }

    ContractFixture(brain::contract::HyperParams p, std::uint32_t nodes)
        : params(p), c(p, brain::sha256(brain::Bytes{0x42})) {
        c.fund_treasury(kTreasury);
        c.mint(kPayer, kPayerFunds);
        for (std::uint32_t i = 0; i < nodes; ++i) {
            keys.push_back(brain::sortition::keygen_for_index(i));
            c.mint(addr(i), p.node_deposit);
            c.register_node(i, keys.back().pk, addr(i));
        }
    }

    static brain::AccountId addr(brain::NodeId n) { return 100 + n; }

    static brain::InferenceRequest request(brain::RequestId id, int priority = 10, std::size_t input_len = 200,
                                           std::uint64_t fee_limit = 1000, brain::Asset fee_price = 2,
                                           brain::Asset value = 5, brain::Height timeout = brain::kNever) {
        brain::InferenceRequest q;
        q.id = id;
        q.net = "net";
        q.ver = brain::sha256(brain::Bytes{9});
        q.input.assign(input_len, static_cast<std::uint8_t>(id));
        q.target = 77;
        q.value = value;
        q.timeout = timeout;
        q.fee_price = fee_price;
        q.fee_limit = fee_limit;
        q.priority = priority;
        return q;
    }

    static brain::Hash256 nonce(brain::NodeId n) { return brain::sha256(brain::ByteWriter{}.put("r").put_u64(n).bytes()); }

    brain::contract::CommitTx commit_tx(brain::NodeId n, brain::RequestId id, brain::Height h,
                                        const brain::Bytes& output) const {
        brain::contract::CommitTx tx;
        tx.request_id = id;
        tx.node_id = n;
        tx.msg = brain::sortition::build_msg(c.record(id)->request.digest(), c.seeds(), h, params.epoch_inference);
        tx.vrf = brain::sortition::evaluate(keys[n].sk, tx.msg.serialize());
        tx.commit_hash = brain::contract::commit_hash(output, addr(n), nonce(n));
        tx.seed_vrf = brain::sortition::evaluate(
            keys[n].sk, brain::sortition::seed_evolution_msg(c.seeds().latest(), c.seeds().round() + 1));
        return tx;
    }

    brain::contract::RevealTx reveal_tx(brain::NodeId n, brain::RequestId id, const brain::Bytes& output) const {
        return brain::contract::RevealTx{id, n, output, addr(n), nonce(n)};
    }

    // Commits nodes [first, first + count) with `output` at height h.
    void commit_all(brain::RequestId id, brain::Height h, brain::NodeId first, std::uint32_t count,
                    const brain::Bytes& output) {
        for (brain::NodeId n = first; n < first + count; ++n) {
            if (!c.commit(commit_tx(n, id, h, output), h).ok()) {
                throw std::logic_error("fixture commit rejected");
            }
        }
    }
};
