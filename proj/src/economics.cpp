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

#include "brain/economics.hpp"

#include <iomanip>
#include <stdexcept>
#include <utility>

namespace brain::economics {

const char* to_string(GasKind k) noexcept {
    switch (k) {
        case GasKind::Verify: return "verify";
        case GasKind::VerifyFast: return "verify_fast";
        case GasKind::Commit: return "commit";
        case GasKind::CommitH: return "commit_H";
        case GasKind::Reveal: return "reveal";
        case GasKind::RevealH: return "reveal_H";
        case GasKind::Push: return "push";
        case GasKind::Pop: return "pop";
        case GasKind::PushPrior: return "push_prior";
        case GasKind::PopPrior: return "pop_prior";
    }
    return "?";
}

const char* to_string(PhaseId p) noexcept {
    switch (p) {
        case PhaseId::Request: return "1";
        case PhaseId::Commit: return "2-a";
        case PhaseId::Reveal: return "2-b";
    }
    return "?";
}

const GasTable& GasTable::standard() {
    static const GasTable table = [] {
        GasTable t;
        auto set = [&t](GasKind k, std::uint64_t min, std::uint64_t max, std::uint64_t avg) {
            t.rows_[static_cast<std::size_t>(k)] = GasRow{min, avg, max};
        };
        set(GasKind::Verify, 1'543'493, 1'862'450, 1'643'712);
        set(GasKind::VerifyFast, 106'360, 352'838, 150'715);
        set(GasKind::Commit, 44'825, 62'072, 45'732);
        set(GasKind::CommitH, 44'861, 44'897, 44'895);
        set(GasKind::Reveal, 27'831, 796'620, 87'124);
        set(GasKind::RevealH, 47'355, 47'391, 47'389);
        set(GasKind::Push, 51'324, 68'424, 51'345);
        set(GasKind::Pop, 29'013, 46'113, 29'034);
        set(GasKind::PushPrior, 84'353, 137'955, 91'699);
        set(GasKind::PopPrior, 34'909, 116'942, 100'861);
        return t;
    }();
    return table;
}

std::uint64_t phase_gas(PhaseId phase, const GasTable& table) {
    switch (phase) {
        case PhaseId::Request:
            return table.avg(GasKind::PushPrior);
        case PhaseId::Commit:
            return table.avg(GasKind::VerifyFast) + table.avg(GasKind::CommitH) + table.avg(GasKind::PopPrior);
        case PhaseId::Reveal:
            return table.avg(GasKind::RevealH);
    }
    return 0;
}

FiatParams FiatParams::derive(std::string chain, double gas_price_gwei, std::uint64_t gas, double usd) {
    if (!(gas_price_gwei > 0.0) || gas == 0 || !(usd > 0.0)) {
        throw std::invalid_argument("fiat derivation needs positive gas, gas price and USD");
    }
    const double token = usd / (static_cast<double>(gas) * gas_price_gwei * 1e-9);
    return FiatParams{std::move(chain), gas_price_gwei, token};
}

// Token prices solved from the full-verify row: $32.504 at 14 gwei, $0.077 at 51.6 gwei.
const FiatParams& FiatParams::ethereum() {
    static const FiatParams p = derive("ethereum", 14.0, GasTable::standard().avg(GasKind::Verify), 32.504);
    return p;
}

const FiatParams& FiatParams::polygon() {
    static const FiatParams p = derive("polygon", 51.6, GasTable::standard().avg(GasKind::Verify), 0.077);
    return p;
}

double usd_cost(std::uint64_t gas, const FiatParams& fiat) {
    return static_cast<double>(gas) * fiat.gas_price_gwei * 1e-9 * fiat.token_usd;
}

contract::GasHook GasMeter::hook() {
    return [this](contract::GasOp op, std::uint64_t subject, bool training) {
        entries_.push_back(Entry{subject, op, training});
    };
}

GasKind gas_kind(contract::GasOp op, bool full_verify) {
    switch (op) {
        case contract::GasOp::PushPrior: return GasKind::PushPrior;
        case contract::GasOp::PopPrior: return GasKind::PopPrior;
        case contract::GasOp::Verify: return full_verify ? GasKind::Verify : GasKind::VerifyFast;
        case contract::GasOp::Commit: return GasKind::CommitH;
        case contract::GasOp::Reveal: return GasKind::RevealH;
        case contract::GasOp::Push: return GasKind::Push;
        case contract::GasOp::Pop: return GasKind::Pop;
    }
    return GasKind::Verify;
}

namespace {

PhaseId phase_of(contract::GasOp op) {
    switch (op) {
        case contract::GasOp::PushPrior:
        case contract::GasOp::Push:
            return PhaseId::Request;
        case contract::GasOp::Verify:
        case contract::GasOp::Commit:
        case contract::GasOp::PopPrior:
        case contract::GasOp::Pop:
            return PhaseId::Commit;
        case contract::GasOp::Reveal:
            return PhaseId::Reveal;
    }
    return PhaseId::Request;
}

}  // namespace

std::uint64_t GasMeter::total_gas(const GasTable& table) const {
    std::uint64_t total = 0;
    for (const auto& e : entries_) {
        total += table.avg(gas_kind(e.op, full_verify_));
    }
    return total;
}

CostReport run_cost_report(const std::vector<GasMeter::Entry>& entries, bool full_verify, const GasTable& table) {
    std::map<std::pair<std::uint64_t, PhaseId>, std::uint64_t> sums;
    for (const auto& e : entries) {
        const std::uint64_t key = e.training ? 0 : e.subject;
        sums[{key, phase_of(e.op)}] += table.avg(gas_kind(e.op, full_verify));
    }
    CostReport report;
    const auto& eth = FiatParams::ethereum();
    const auto& poly = FiatParams::polygon();
    for (const auto& [key, gas] : sums) {
        CostLine line{key.first, key.second, gas, usd_cost(gas, eth), usd_cost(gas, poly)};
        report.total_gas += gas;
        report.lines.push_back(line);
    }
    report.total_usd_eth = usd_cost(report.total_gas, eth);
    report.total_usd_polygon = usd_cost(report.total_gas, poly);
    return report;
}

void CostReport::write_csv(std::ostream& os) const {
    os << "request_id,phase,gas,usd_eth,usd_polygon\n";
    os << std::fixed;
    for (const auto& l : lines) {
        os << l.request_id << ',' << to_string(l.phase) << ',' << l.gas << ',' << std::setprecision(6)
           << l.usd_eth << ',' << l.usd_polygon << '\n';
    }
    os << "total,all," << total_gas << ',' << total_usd_eth << ',' << total_usd_polygon << '\n';
    os.unsetf(std::ios::floatfield);
}

}  // namespace brain::economics
