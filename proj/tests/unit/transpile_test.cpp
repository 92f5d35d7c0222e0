// Copyright 2026 The qdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <numbers>

#include "qdistill/error.hpp"
#include "qdistill/rng.hpp"
#include "qdistill/transpile.hpp"

namespace qdistill {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_params(int n, Rng& rng) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& x : p) x = rng.uniform(-kPi, kPi);
    return p;
}

int count(const Circuit& c, GateKind k) {
    int n = 0;
    for (const auto& op : c.ops()) n += op.kind == k;
    return n;
}

TEST(TranspileTest, C2KeepsItsCxCountOnIbm) {
    const auto c2 = build_template("c2", 4, 1);
    const auto lowered = lower(c2, "IBM");
    EXPECT_EQ(count(lowered, GateKind::CX), 3);
    for (const auto& op : lowered.ops()) EXPECT_TRUE(RuleRegistry::builtin().basis("IBM").contains(op.kind));
    EXPECT_EQ(lowered.n_params(), c2.n_params());
}

TEST(TranspileTest, SingleCxOnRigettiIsSevenGates) {
    Circuit cx(2);
    cx.add(GateKind::CX, {1, 0});
    const auto r = metrics(lower(cx, "RIGETTI"));
    EXPECT_EQ(r.total_gates, 7);
    EXPECT_EQ(r.gates_2q, 1);
    EXPECT_EQ(r.gates_1q, 6);
}

TEST(TranspileTest, LoweringIsIdempotent) {
    for (const auto& basis : {"IBM", "RIGETTI"}) {
        const auto once = lower(build_template("c6", 3, 2), basis);
        EXPECT_EQ(lower(once, basis), once);
    }
}

TEST(TranspileTest, MetricsExamples) {
    EXPECT_EQ(metrics(Circuit(3)).depth, 0);
    EXPECT_EQ(metrics(Circuit(3)).total_gates, 0);
    Circuit chain(4);
    chain.add(GateKind::CX, {1, 0}).add(GateKind::CX, {2, 1}).add(GateKind::CX, {3, 2});
    EXPECT_EQ(metrics(chain).depth, 3);
    Circuit par(2);
    par.add(GateKind::X, {0}).add(GateKind::X, {1});
    EXPECT_EQ(metrics(par).depth, 1);
}

TEST(TranspileTest, ReportInvariantsHoldForEveryTemplate) {
    for (const auto& id : TemplateRegistry::builtin().ids())
        for (const auto& basis : {"IBM", "RIGETTI"}) {
            const auto r = metrics(lower(build_template(id, 4, 1), basis), basis);
            EXPECT_EQ(r.total_gates, r.gates_1q + r.gates_2q) << id;
            EXPECT_LE(r.depth, r.total_gates) << id;
            EXPECT_GE(r.depth, 1) << id;
            EXPECT_EQ(r.basis, basis);
        }
}

TEST(TranspileTest, LoweringPreservesUnitaries) {
    Rng rng(12);
    for (const auto& id : TemplateRegistry::builtin().ids())
        for (const auto& basis : {"IBM", "RIGETTI"}) {
            const auto c = build_template(id, 3, 1);
            const auto lowered = lower(c, basis);
            for (int trial = 0; trial < 3; ++trial) {
                const auto p = random_params(c.n_params(), rng);
                EXPECT_GE(std::abs(hs_trace_overlap(unitary_of(lowered, p), unitary_of(c, p))), 8.0 - 1e-8)
                    << id << " " << basis;
            }
        }
}

TEST(TranspileTest, LayerScaling) {
    for (const auto& id : {"c2", "c6", "c9", "c15"})
        for (const auto& basis : {"IBM", "RIGETTI"}) {
            const auto one = metrics(lower(build_template(id, 4, 1), basis));
            for (int layers : {2, 3, 5}) {
                const auto many = metrics(lower(build_template(id, 4, layers), basis));
                EXPECT_EQ(many.total_gates, layers * one.total_gates) << id;
                EXPECT_LE(many.depth, layers * one.depth) << id;
            }
        }
}

TEST(TranspileTest, C1HasNoTwoQubitGates) {
    const auto rows = overhead_table({"c1"}, {"IBM"}, 4);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].report.gates_2q, 0);
}

TEST(TranspileTest, OverheadTableCoversTemplatesTimesBases) {
    const auto ids = TemplateRegistry::builtin().ids();
    const auto rows = overhead_table(ids, {"IBM", "RIGETTI"}, 4);
    EXPECT_EQ(rows.size(), 2 * ids.size());
    const auto csv = overhead_csv(rows, "unit test");
    EXPECT_EQ(csv.rfind("# unit test\ntemplate,basis,depth,total,g1q,g2q\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(rows.size()) + 2);
}

TEST(TranspileTest, MergedRotationsKeepUnitaryAndNeverGrow) {
    Rng rng(5);
    for (const auto& id : TemplateRegistry::builtin().ids())
        for (const auto& basis : {"IBM", "RIGETTI"}) {
            const auto c = build_template(id, 3, 2);
            const auto bound = bind_params(lower(c, basis), random_params(c.n_params(), rng));
            const auto merged = merge_rotations(bound, RuleRegistry::builtin().basis(basis));
            EXPECT_LE(merged.ops().size(), bound.ops().size()) << id;
            EXPECT_TRUE(equal_up_to_phase(unitary_of(merged), unitary_of(bound), 1e-9)) << id << " " << basis;
            for (const auto& op : merged.ops()) EXPECT_TRUE(RuleRegistry::builtin().basis(basis).contains(op.kind));
        }
}

TEST(TranspileTest, MergingFusesRotationRuns) {
    Circuit c(1);
    c.add(GateKind::RZ, {0}, Angle::literal(0.3)).add(GateKind::RZ, {0}, Angle::literal(0.4));
    c.add(GateKind::SX, {0}).add(GateKind::SX, {0});
    const auto merged = merge_rotations(BoundCircuit(c), RuleRegistry::builtin().basis("IBM"));
    EXPECT_LT(merged.ops().size(), c.size());
    EXPECT_TRUE(equal_up_to_phase(unitary_of(merged), unitary_of(BoundCircuit(c)), 1e-12));
}

TEST(TranspileTest, UnknownBasisIsUsageError) {
    EXPECT_THROW(lower(build_template("c2", 2, 1), "NOPE"), UsageError);
}

}  // namespace
}  // namespace qdistill
