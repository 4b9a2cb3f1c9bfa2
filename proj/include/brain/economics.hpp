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
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "brain/contract.hpp"

namespace brain::economics {

enum class GasKind {
    Verify,
    VerifyFast,
    Commit,
    CommitH,
    Reveal,
    RevealH,
    Push,
    Pop,
    PushPrior,
    PopPrior,
};

inline constexpr std::size_t kGasKinds = 10;

const char* to_string(GasKind k) noexcept;

struct GasRow {
    std::uint64_t min = 0;
    std::uint64_t avg = 0;
    std::uint64_t max = 0;
};

// Measured gas per operation kind on an EVM chain.
class GasTable {
  public:
    static const GasTable& standard();

    [[nodiscard]] const GasRow& row(GasKind k) const noexcept { return rows_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] std::uint64_t avg(GasKind k) const noexcept { return row(k).avg; }

  private:
    std::array<GasRow, kGasKinds> rows_{};
};

enum class PhaseId { Request, Commit, Reveal };  // 1, 2-a, 2-b

const char* to_string(PhaseId p) noexcept;

// 1 = push_prior; 2-a = verify_fast + commit_H + pop_prior; 2-b = reveal_H.
std::uint64_t phase_gas(PhaseId phase, const GasTable& table = GasTable::standard());

struct FiatParams {
    std::string chain;
    double gas_price_gwei = 0.0;
    double token_usd = 0.0;

    // Token price solved from one observed (gas, usd) pair at the given gas price.
    static FiatParams derive(std::string chain, double gas_price_gwei, std::uint64_t gas, double usd);
    static const FiatParams& ethereum();
    static const FiatParams& polygon();
};

double usd_cost(std::uint64_t gas, const FiatParams& fiat);

// Records every metered contract operation. Attach with `hook()`.
class GasMeter {
  public:
    struct Entry {
        std::uint64_t subject;
        contract::GasOp op;
        bool training;
    };

    explicit GasMeter(bool full_verify = false) : full_verify_(full_verify) {}

    [[nodiscard]] contract::GasHook hook();

    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] bool full_verify() const noexcept { return full_verify_; }
    [[nodiscard]] std::uint64_t total_gas(const GasTable& table = GasTable::standard()) const;

  private:
    bool full_verify_;
    std::vector<Entry> entries_;
};

// Gas kind an operation is charged as. Commits and reveals use the hashed variants; VRF
// verification uses the signature-recovery path unless `full_verify` is set.
GasKind gas_kind(contract::GasOp op, bool full_verify);

struct CostLine {
    std::uint64_t request_id = 0;
    PhaseId phase = PhaseId::Request;
    std::uint64_t gas = 0;
    double usd_eth = 0.0;
    double usd_polygon = 0.0;
};

struct CostReport {
    std::vector<CostLine> lines;  // one per (request, phase) with nonzero gas
    std::uint64_t total_gas = 0;
    double total_usd_eth = 0.0;
    double total_usd_polygon = 0.0;

    void write_csv(std::ostream& os) const;
};

// Sums gas per request and phase. Training operations are reported under request id 0.
CostReport run_cost_report(const std::vector<GasMeter::Entry>& entries, bool full_verify = false,
                           const GasTable& table = GasTable::standard());

}  // namespace brain::economics
