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

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// 256-bit value stored big-endian, so lexicographic byte order is numeric order.
struct Hash256 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Hash256&) const = default;

    [[nodiscard]] ByteView view() const noexcept { return {bytes.data(), bytes.size()}; }
    [[nodiscard]] std::string hex() const;

    // Fraction y / 2^256 from the top 64 bits; enough resolution for statistics.
    [[nodiscard]] double unit_fraction() const noexcept;

    // 2^k for k in [0, 255].
    static Hash256 pow2(unsigned k);
    static Hash256 max() noexcept;
    static Hash256 from_u64(std::uint64_t v) noexcept;
};

using U256 = Hash256;

// SHA-256, the project-wide H(.).
Hash256 sha256(ByteView data) noexcept;
inline Hash256 sha256(const Bytes& data) noexcept { return sha256(ByteView{data}); }

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

// Canonical concatenation used for every hash preimage and signed message.
class ByteWriter {
  public:
    ByteWriter& put(ByteView data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
        return *this;
    }
    ByteWriter& put(const Hash256& h) { return put(h.view()); }
    ByteWriter& put(std::string_view s) {
        buf_.insert(buf_.end(), s.begin(), s.end());
        return *this;
    }
    ByteWriter& put_u64(std::uint64_t v) {
        for (int i = 7; i >= 0; --i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
        return *this;
    }
    // Length-prefixed field, for variable-size members of a preimage.
    ByteWriter& put_sized(ByteView data) {
        put_u64(data.size());
        return put(data);
    }

    [[nodiscard]] const Bytes& bytes() const& noexcept { return buf_; }
    [[nodiscard]] Bytes bytes() && noexcept { return std::move(buf_); }

  private:
    Bytes buf_;
};

}  // namespace brain
