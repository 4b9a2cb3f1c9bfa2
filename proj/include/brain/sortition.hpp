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

#include "brain/hash.hpp"

namespace brain::sortition {

// Ed25519 key pair. pk is 32 bytes; sk is libsodium's 64-byte expanded form (seed || pk).
struct KeyPair {
    Bytes pk;
    Bytes sk;
};

// The VRF is sign-then-hash: proof is a deterministic signature over msg, y = H(proof).
// Verification is signature verification under pk followed by a hash check, the same
// contract a signature-recovery precompile gives an on-chain verifier.
struct VrfOutput {
    U256 y;
    Bytes proof;

    bool operator==(const VrfOutput&) const = default;
};

KeyPair keygen(const Hash256& seed);

// Convenience for simulations: node i derives its key from H("brain-node" || i).
KeyPair keygen_for_index(std::uint64_t index);

VrfOutput evaluate(ByteView sk, ByteView msg);

// Never throws; malformed inputs simply fail verification.
bool verify(ByteView pk, ByteView msg, const U256& y, ByteView proof) noexcept;

inline bool is_elected(const U256& y, const U256& difficulty) noexcept { return y <= difficulty; }

// msg = (q1 digest || seed_{r-f} || floor(h / E))
struct SortitionMsg {
    Hash256 request_digest;
    Hash256 seed;
    std::uint64_t epoch_index = 0;

    bool operator==(const SortitionMsg&) const = default;

    [[nodiscard]] Bytes serialize() const;
};

// Holds the most recent f+1 round seeds. Index 0 of lookback() is the newest.
class SeedRing {
  public:
    SeedRing(Hash256 genesis, unsigned finality);

    void push(const Hash256& seed);

    // seed_{r-f}; falls back to the oldest retained seed while the ring is underfull,
    // which is the genesis seed until f+1 rounds have completed.
    [[nodiscard]] const Hash256& lookback() const noexcept;
    [[nodiscard]] const Hash256& latest() const noexcept { return seeds_.back(); }
    [[nodiscard]] std::uint64_t round() const noexcept { return round_; }
    [[nodiscard]] unsigned finality() const noexcept { return finality_; }
    [[nodiscard]] std::size_t size() const noexcept { return seeds_.size(); }

  private:
    std::deque<Hash256> seeds_;
    unsigned finality_;
    std::uint64_t round_ = 0;
};

SortitionMsg build_msg(const Hash256& q1_digest, const SeedRing& ring, std::uint64_t height,
                       std::uint64_t epoch_length);

inline std::uint64_t epoch_of(std::uint64_t height, std::uint64_t epoch_length) noexcept {
    return height / epoch_length;
}

// Preimage for the seed evolution seed_r = evaluate_sk(seed_{r-1} || r).
Bytes seed_evolution_msg(const Hash256& previous, std::uint64_t round);

// a-fallback seed rule seed_r = H(seed_{r-1} || r).
Hash256 seed_hash_step(const Hash256& previous, std::uint64_t round);

}  // namespace brain::sortition
