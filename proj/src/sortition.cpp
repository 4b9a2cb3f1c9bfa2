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

#include "brain/sortition.hpp"

#include <sodium.h>

#include <stdexcept>

#include "sodium_init.hpp"

namespace brain::sortition {

KeyPair keygen(const Hash256& seed) {
    detail::ensure_sodium();
    KeyPair kp;
    kp.pk.resize(crypto_sign_PUBLICKEYBYTES);
    kp.sk.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), seed.bytes.data());
    return kp;
}

KeyPair keygen_for_index(std::uint64_t index) {
    return keygen(sha256(ByteWriter{}.put("brain-node").put_u64(index).bytes()));
}

VrfOutput evaluate(ByteView sk, ByteView msg) {
    detail::ensure_sodium();
    if (sk.size() != crypto_sign_SECRETKEYBYTES) {
        throw std::invalid_argument("secret key has wrong length");
    }
    VrfOutput out;
    out.proof.resize(crypto_sign_BYTES);
    crypto_sign_detached(out.proof.data(), nullptr, msg.data(), msg.size(), sk.data());
    out.y = sha256(out.proof);
    return out;
}

bool verify(ByteView pk, ByteView msg, const U256& y, ByteView proof) noexcept {
    if (pk.size() != crypto_sign_PUBLICKEYBYTES || proof.size() != crypto_sign_BYTES) {
        return false;
    }
    detail::ensure_sodium();
    if (crypto_sign_verify_detached(proof.data(), msg.data(), msg.size(), pk.data()) != 0) {
        return false;
    }
    return sha256(proof) == y;
}

Bytes SortitionMsg::serialize() const {
    return ByteWriter{}.put(request_digest).put(seed).put_u64(epoch_index).bytes();
}

SeedRing::SeedRing(Hash256 genesis, unsigned finality) : finality_(finality) {
    seeds_.push_back(genesis);
}

void SeedRing::push(const Hash256& seed) {
    seeds_.push_back(seed);
    ++round_;
    while (seeds_.size() > finality_ + 1) {
        seeds_.pop_front();
    }
}

const Hash256& SeedRing::lookback() const noexcept {
    // Full ring: front is seed_{r-f}. Underfull: front is genesis.
    return seeds_.front();
}

SortitionMsg build_msg(const Hash256& q1_digest, const SeedRing& ring, std::uint64_t height,
                       std::uint64_t epoch_length) {
    return SortitionMsg{q1_digest, ring.lookback(), epoch_of(height, epoch_length)};
}

Bytes seed_evolution_msg(const Hash256& previous, std::uint64_t round) {
    return ByteWriter{}.put(previous).put_u64(round).bytes();
}

Hash256 seed_hash_step(const Hash256& previous, std::uint64_t round) {
    return sha256(seed_evolution_msg(previous, round));
}

}  // namespace brain::sortition
