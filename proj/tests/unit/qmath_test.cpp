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

#include "qdistill/error.hpp"
#include "qdistill/qmath.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {
namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

ComplexMatrix pauli_x() { return {{0, 1}, {1, 0}}; }
ComplexMatrix hadamard() { return {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}}; }

TEST(QmathTest, MatmulIdentityAndInvolutions) {
    const auto i2 = ComplexMatrix::identity(2);
    EXPECT_EQ(max_abs_diff(matmul(i2, pauli_x()), pauli_x()), 0.0);
    EXPECT_EQ(max_abs_diff(matmul(pauli_x(), pauli_x()), i2), 0.0);
    EXPECT_LE(max_abs_diff(matmul(hadamard(), hadamard()), i2), 1e-12);
}

TEST(QmathTest, MatmulDimensionMismatchThrows) {
    EXPECT_THROW(matmul(ComplexMatrix::identity(2), ComplexMatrix::identity(4)), UsageError);
    EXPECT_THROW(ComplexMatrix(0), UsageError);
}

TEST(QmathTest, KronExpandsByHand) {
    EXPECT_EQ(max_abs_diff(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)), ComplexMatrix::identity(4)), 0.0);
    const auto xi = kron(pauli_x(), ComplexMatrix::identity(2));
    ComplexMatrix expected(4);
    expected(0, 2) = expected(1, 3) = expected(2, 0) = expected(3, 1) = 1.0;
    EXPECT_EQ(max_abs_diff(xi, expected), 0.0);
}

TEST(QmathTest, KronRespectsMaxDim) {
    EXPECT_THROW(kron(ComplexMatrix::identity(64), ComplexMatrix::identity(128)), UsageError);
    EXPECT_NO_THROW(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2), 4));
    EXPECT_THROW(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(4), 4), UsageError);
}

TEST(QmathTest, KronOfUnitariesIsUnitaryAndAssociative) {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_unitary(2, rng), b = random_unitary(2, rng), c = random_unitary(4, rng);
        EXPECT_TRUE(kron(a, b).is_unitary(1e-12));
        EXPECT_LE(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))), 1e-12);
    }
}

TEST(QmathTest, TraceOverlapExamples) {
    const auto i2 = ComplexMatrix::identity(2);
    EXPECT_EQ(std::abs(hs_trace_overlap(i2, pauli_x())), 0.0);
    const cplx phase = std::polar(1.0, std::numbers::pi / 4);
    EXPECT_LE(std::abs(hs_trace_overlap(i2, i2 * phase) - 2.0 * phase), 1e-15);
    Rng rng(3);
    for (std::size_t dim : {2u, 4u, 8u, 16u, 64u}) {
        const auto u = random_unitary(dim, rng);
        EXPECT_TRUE(u.is_unitary());
        EXPECT_NEAR(std::abs(hs_trace_overlap(u, u)), static_cast<double>(dim), 1e-9);
        EXPECT_LE(std::abs(hs_trace_overlap(u, random_unitary(dim, rng))), dim + 1e-9);
    }
    EXPECT_THROW(hs_trace_overlap(i2, ComplexMatrix::identity(4)), UsageError);
}

TEST(QmathTest, NormDifferences) {
    const auto i2 = ComplexMatrix::identity(2);
    EXPECT_EQ(l1_norm_diff(i2, i2), 0.0);
    EXPECT_EQ(l2_norm_diff(i2, i2), 0.0);
    EXPECT_DOUBLE_EQ(l1_norm_diff(i2, pauli_x()), 4.0);
    EXPECT_DOUBLE_EQ(l2_norm_diff(i2, pauli_x()), 2.0);
    EXPECT_THROW(l1_norm_diff(i2, ComplexMatrix::identity(4)), UsageError);

    Rng rng(5);
    const auto u = random_unitary(8, rng), v = random_unitary(8, rng);
    double squares = 0.0;
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) squares += std::norm(u(r, c) - v(r, c));
    EXPECT_NEAR(l2_norm_diff(u, v) * l2_norm_diff(u, v), squares, 1e-12);
}

TEST(QmathTest, FidelityExamples) {
    const auto zero = StateVector::basis(1, 0), one = StateVector::basis(1, 1);
    const StateVector plus({kInvSqrt2, kInvSqrt2});
    EXPECT_DOUBLE_EQ(fidelity(zero, zero), 1.0);
    EXPECT_DOUBLE_EQ(fidelity(zero, one), 0.0);
    EXPECT_NEAR(fidelity(zero, plus), 0.5, 1e-15);
    EXPECT_THROW(fidelity(zero, StateVector::basis(2)), UsageError);
}

TEST(QmathTest, FidelitySymmetricAndPhaseInvariant) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = random_unitary(8, rng);
        const auto a = apply(u, StateVector::basis(3, 0));
        const auto b = apply(u, StateVector::basis(3, 1 + rng.below(7)));
        const auto c = apply(random_unitary(8, rng), StateVector::basis(3, 0));
        EXPECT_DOUBLE_EQ(fidelity(a, c), fidelity(c, a));
        StateVector rotated = c;
        for (auto& x : rotated.amplitudes()) x *= std::polar(1.0, 0.7);
        EXPECT_NEAR(fidelity(a, rotated), fidelity(a, c), 1e-12);
        EXPECT_NEAR(fidelity(a, b), 0.0, 1e-12);
    }
}

TEST(QmathTest, BasisStateProperties) {
    const auto s = StateVector::basis(3, 5);
    EXPECT_EQ(s.dim(), 8u);
    EXPECT_EQ(s.n_qubits(), 3);
    EXPECT_EQ(s[5], cplx(1.0));
    EXPECT_DOUBLE_EQ(s.norm_squared(), 1.0);
    EXPECT_THROW(StateVector::basis(2, 4), UsageError);
}

}  // namespace
}  // namespace qdistill
