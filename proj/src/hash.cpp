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

#include "brain/hash.hpp"

#include <sodium.h>

#include <stdexcept>

#include "sodium_init.hpp"

namespace brain {

std::string Hash256::hex() const { return to_hex(view()); }

double Hash256::unit_fraction() const noexcept {
    std::uint64_t top = 0;
    for (int i = 0; i < 8; ++i) {
        top = (top << 8) | bytes[i];
    }
    return static_cast<double>(top) * 0x1p-64;
}

Hash256 Hash256::pow2(unsigned k) {
    if (k > 255) {
        throw std::invalid_argument("pow2 exponent out of range for 256-bit value");
    }
    Hash256 h;
    h.bytes[31 - k / 8] = static_cast<std::uint8_t>(1u << (k % 8));
    return h;
}

Hash256 Hash256::max() noexcept {
    Hash256 h;
    h.bytes.fill(0xff);
    return h;
}

Hash256 Hash256::from_u64(std::uint64_t v) noexcept {
    Hash256 h;
    for (int i = 0; i < 8; ++i) {
        h.bytes[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    return h;
}

Hash256 sha256(ByteView data) noexcept {
    detail::ensure_sodium();
    Hash256 out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

std::string to_hex(ByteView data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xf]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) {
        throw std::invalid_argument("odd-length hex string");
    }
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw std::invalid_argument("invalid hex digit");
        }
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

}  // namespace brain
