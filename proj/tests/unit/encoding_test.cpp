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

#include <cmath>
#include <numbers>

#include "qdistill/encoding.hpp"
#include "qdistill/error.hpp"
#include "qdistill/log.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {
namespace {

constexpr double kPi = std::numbers::pi;

StateVector encoded(std::vector<double> f, const EncodingScheme& s, bool check = true) {
    return simulate(encode(f, s, check), StateVector::basis(s.n_qubits));
}

TEST(EncodingTest, ZeroFeaturesGiveUniformSuperposition) {
    const auto psi = encoded({0, 0, 0, 0}, {EncodingMode::ONE_PER_QUBIT, 4});
    for (std::size_t i = 0; i < psi.dim(); ++i) EXPECT_NEAR(std::abs(psi[i] - cplx(0.25)), 0.0, 1e-15);
}

TEST(EncodingTest, OneToOneHasZeroZExpectation) {
    for (double f : {-3.0, -1.0, 0.2, 2.9}) EXPECT_NEAR(expectation_z(encoded({f}, {EncodingMode::ONE_PER_QUBIT, 1}), 0), 0.0, 1e-15);
}

TEST(EncodingTest, TwoToOneMatchesHandProduct) {
    const auto psi = encoded({0.0, kPi}, {EncodingMode::TWO_PER_QUBIT, 1});
    const auto m = matmul(gate_matrix(GateKind::RY, kPi), matmul(gate_matrix(GateKind::RZ, 0.0), gate_matrix(GateKind::H)));
    const auto expected = apply(m, StateVector::basis(1));
    EXPECT_NEAR(std::abs(psi[0] - expected[0]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(psi[1] - expected[1]), 0.0, 1e-15);
}

TEST(EncodingTest, FastStateMatchesCircuit) {
    Rng rng(2);
    for (auto mode : {EncodingMode::ONE_PER_QUBIT, EncodingMode::TWO_PER_QUBIT}) {
        const EncodingScheme s{mode, 3};
        std::vector<double> f(static_cast<std::size_t>(s.capacity()));
        for (auto& x : f) x = rng.uniform(-kPi, kPi);
        std::vector<cplx> amps(8);
        encode_state(f, s, amps);
        const auto psi = encoded(f, s);
        for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(amps[i] - psi[i]), 0.0, 1e-14);
    }
}

TEST(EncodingTest, ContractViolationsThrow) {
    EXPECT_THROW(encode(std::vector<double>{0.1}, {EncodingMode::ONE_PER_QUBIT, 2}), UsageError);
    EXPECT_THROW(encode(std::vector<double>{0.1, 0.2, 0.3}, {EncodingMode::TWO_PER_QUBIT, 2}), UsageError);
    EXPECT_THROW(encode(std::vector<double>{4.0}, {EncodingMode::ONE_PER_QUBIT, 1}), UsageError);
    EXPECT_NO_THROW(encode(std::vector<double>{4.0}, {EncodingMode::ONE_PER_QUBIT, 1}, false));
}

TEST(EncodingTest, EncodingIsDeterministicAndParameterFree) {
    const EncodingScheme s{EncodingMode::TWO_PER_QUBIT, 2};
    const std::vector<double> f{0.1, -0.2, 0.3, 1.4};
    const auto a = encode(f, s), b = encode(f, s);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.circuit().n_params(), 0);
}

TEST(EncodingTest, TwoPiPeriodicity) {
    for (auto mode : {EncodingMode::ONE_PER_QUBIT, EncodingMode::TWO_PER_QUBIT}) {
        const EncodingScheme s{mode, 2};
        std::vector<double> f{0.3, -1.1, 2.0, 0.7};
        f.resize(static_cast<std::size_t>(s.capacity()));
        auto g = f;
        for (auto& x : g) x += 2 * kPi;
        EXPECT_NEAR(fidelity(encoded(f, s), encoded(g, s, false)), 1.0, 1e-12);
    }
}

TEST(EncodingTest, ModeNames) {
    EXPECT_EQ(encoding_mode_name(EncodingMode::ONE_PER_QUBIT), "1:1");
    EXPECT_EQ(parse_encoding_mode("2:1"), EncodingMode::TWO_PER_QUBIT);
    EXPECT_THROW(parse_encoding_mode("3:1"), UsageError);
}

TEST(ScalerTest, MinMaxOntoSymmetricRange) {
    const FeatureMatrix train{{0.0}, {5.0}, {10.0}};
    const auto s = fit_scaler(train);
    EXPECT_DOUBLE_EQ(s.apply(std::vector<double>{0.0})[0], -kPi);
    EXPECT_NEAR(s.apply(std::vector<double>{5.0})[0], 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(s.apply(std::vector<double>{10.0})[0], kPi);
    EXPECT_DOUBLE_EQ(s.apply(std::vector<double>{12.0})[0], kPi);
    EXPECT_DOUBLE_EQ(s.apply(std::vector<double>{-1.0})[0], -kPi);
}

TEST(ScalerTest, FitsOnlySelectedRows) {
    const FeatureMatrix m{{0.0}, {10.0}, {100.0}};
    const std::vector<std::size_t> rows{0, 1};
    const auto s = fit_scaler(m, rows);
    EXPECT_EQ(s.max[0], 10.0);
}

TEST(ScalerTest, ConstantFeatureMapsToZeroWithWarning) {
    std::vector<std::string> warnings;
    set_warning_sink([&](std::string_view w) { warnings.emplace_back(w); });
    const auto s = fit_scaler(FeatureMatrix{{3.0, 1.0}, {3.0, 2.0}});
    set_warning_sink({});
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_EQ(s.apply(std::vector<double>{3.0, 1.5})[0], 0.0);
    EXPECT_EQ(s.apply(std::vector<double>{7.0, 1.5})[0], 0.0);
}

TEST(ScalerTest, JsonRoundTrip) {
    const auto s = fit_scaler(FeatureMatrix{{0.1, -2.0}, {0.7, 5.5}, {0.3, 1.0}});
    EXPECT_EQ(scaler_from_json(scaler_to_json(s)), s);
    EXPECT_THROW(scaler_from_json("{\"min\": [1]}"), DataError);
}

}  // namespace
}  // namespace qdistill
