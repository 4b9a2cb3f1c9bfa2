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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "brain/economics.hpp"
#include "contract_fixture.hpp"

using namespace brain;
using namespace brain::economics;

namespace {

// Published averages, restated here so the table is checked against them rather than itself.
constexpr std::uint64_t kPushPrior = 91'699;
constexpr std::uint64_t kVerifyFast = 150'715;
constexpr std::uint64_t kCommitH = 44'895;
constexpr std::uint64_t kPopPrior = 100'861;
constexpr std::uint64_t kRevealH = 47'389;
constexpr std::uint64_t kVerify = 1'643'712;

}  // namespace

TEST_CASE("phase sums") {
    CHECK(phase_gas(PhaseId::Request) == kPushPrior);
    CHECK(phase_gas(PhaseId::Commit) == kVerifyFast + kCommitH + kPopPrior);
    CHECK(phase_gas(PhaseId::Commit) == 296'471);
    CHECK(phase_gas(PhaseId::Reveal) == kRevealH);
    for (std::size_t k = 0; k < kGasKinds; ++k) {
        const auto& r = GasTable::standard().row(static_cast<GasKind>(k));
        CHECK(r.min <= r.avg);
        CHECK(r.avg <= r.max);
    }
}

TEST_CASE("fiat conversion reproduces the per-row dollar figures") {
    struct Row {
        GasKind k;
        double eth;
        double poly;
    };
    const Row rows[] = {
        {GasKind::Verify, 32.504, 0.077},   {GasKind::VerifyFast, 2.980, 0.007}, {GasKind::Commit, 0.904, 0.002},
        {GasKind::CommitH, 0.888, 0.002},   {GasKind::Reveal, 1.723, 0.004},     {GasKind::RevealH, 0.937, 0.002},
        {GasKind::Push, 1.015, 0.002},      {GasKind::Pop, 0.574, 0.001},        {GasKind::PushPrior, 1.813, 0.004},
        {GasKind::PopPrior, 1.995, 0.005},
    };
    for (const auto& r : rows) {
        CAPTURE(to_string(r.k));
        const auto gas = GasTable::standard().avg(r.k);
        CHECK(std::abs(usd_cost(gas, FiatParams::ethereum()) - r.eth) <= 0.01);
        CHECK(std::abs(usd_cost(gas, FiatParams::polygon()) - r.poly) <= 0.001);
    }
    CHECK(std::abs(usd_cost(phase_gas(PhaseId::Request), FiatParams::ethereum()) - 1.813) <= 0.01);
    CHECK(std::abs(usd_cost(phase_gas(PhaseId::Commit), FiatParams::ethereum()) - 5.863) <= 0.01);
    CHECK(std::abs(usd_cost(phase_gas(PhaseId::Reveal), FiatParams::ethereum()) - 0.937) <= 0.01);
    CHECK(std::abs(usd_cost(phase_gas(PhaseId::Commit), FiatParams::polygon()) - 0.014) <= 0.001);
}

TEST_CASE("derive rejects non-positive inputs") {
    CHECK_THROWS(FiatParams::derive("x", 0.0, 1, 1.0));
    CHECK_THROWS(FiatParams::derive("x", 1.0, 0, 1.0));
    CHECK_THROWS(FiatParams::derive("x", 1.0, 1, -1.0));
}

TEST_CASE("one request through the contract is itemized per phase") {
    ContractFixture f(ContractFixture::everyone_elected({}), 11);
    GasMeter meter;
    f.c.set_gas_hook(meter.hook());
    REQUIRE(f.c.request_inference(ContractFixture::request(1), ContractFixture::kPayer, 1).ok());
    const Bytes out{1, 2, 3};
    f.commit_all(1, 2, 0, 11, out);
    for (NodeId n = 0; n < 11; ++n) REQUIRE(f.c.reveal(f.reveal_tx(n, 1, out), 3).ok());

    const std::uint64_t expected = kPushPrior + 11 * (kVerifyFast + kCommitH) + kPopPrior + 11 * kRevealH;
    CHECK(meter.total_gas() == expected);

    const auto report = run_cost_report(meter.entries());
    CHECK(report.total_gas == expected);
    REQUIRE(report.lines.size() == 3);
    CHECK(report.lines[0].phase == PhaseId::Request);
    CHECK(report.lines[0].gas == kPushPrior);
    CHECK(report.lines[1].gas == 11 * (kVerifyFast + kCommitH) + kPopPrior);
    CHECK(report.lines[2].gas == 11 * kRevealH);

    const auto full = run_cost_report(meter.entries(), true);
    CHECK(full.total_gas == expected + 11 * (kVerify - kVerifyFast));
}

TEST_CASE("empty log costs nothing and cost is linear in entries") {
    CHECK(run_cost_report({}).total_gas == 0);
    CHECK(run_cost_report({}).lines.empty());

    std::vector<GasMeter::Entry> one{{1, contract::GasOp::Reveal, false}};
    std::vector<GasMeter::Entry> many;
    for (std::uint64_t i = 0; i < 7; ++i) many.push_back({1, contract::GasOp::Reveal, false});
    CHECK(run_cost_report(many).total_gas == 7 * run_cost_report(one).total_gas);
    CHECK(run_cost_report(many).total_usd_eth == doctest::Approx(7 * run_cost_report(one).total_usd_eth));

    std::vector<GasMeter::Entry> training{{42, contract::GasOp::Commit, true}};
    CHECK(run_cost_report(training).lines.at(0).request_id == 0);
}

TEST_CASE("cost csv layout") {
    std::vector<GasMeter::Entry> e{{3, contract::GasOp::PushPrior, false}};
    std::ostringstream os;
    run_cost_report(e).write_csv(os);
    std::istringstream is(os.str());
    std::string header, line, total;
    std::getline(is, header);
    std::getline(is, line);
    std::getline(is, total);
    CHECK(header == "request_id,phase,gas,usd_eth,usd_polygon");
    CHECK(line.rfind("3,1,91699,", 0) == 0);
    CHECK(total.rfind("total,all,91699,", 0) == 0);
}
