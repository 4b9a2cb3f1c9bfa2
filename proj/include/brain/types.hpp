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
#include <limits>
#include <string>

#include "brain/hash.hpp"

namespace brain {

using Asset = std::int64_t;
using AccountId = std::uint32_t;
using NodeId = std::uint32_t;
using RequestId = std::uint64_t;
using ProposalId = std::uint64_t;
using Height = std::uint64_t;

inline constexpr RequestId kNoRequest = 0;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr Height kNever = std::numeric_limits<Height>::max();

// User priorities live in [0, kMaxUserPriority]; the contract reserves two levels above.
inline constexpr int kMaxUserPriority = 1000;
inline constexpr int kPriorityMax = kMaxUserPriority + 2;       // p_max, pinned at first commit
inline constexpr int kPriorityRequeue = kPriorityMax - 1;       // b-II requeue level

struct InferenceRequest {
    RequestId id = kNoRequest;
    std::string net;
    Hash256 ver;
    Bytes input;
    std::uint64_t seed = 0;
    Bytes args;
    AccountId target = 0;
    Bytes funcsig;
    Asset value = 0;
    Height timeout = 20;
    Asset fee_price = 1;
    std::uint64_t fee_limit = 0;
    int priority = 0;
    Height submitted_at = 0;

    [[nodiscard]] Asset escrow_amount() const noexcept {
        return static_cast<Asset>(fee_limit) * fee_price + value;
    }

    // q1 in the sortition message. Excludes submitted_at so the digest is known before inclusion.
    [[nodiscard]] Hash256 digest() const;
};

}  // namespace brain
