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
#include "qdistill/optimize.hpp"

namespace qdistill {
namespace {

constexpr double kPi = std::numbers::pi;

Box cube(std::size_t n, double lo, double hi, bool periodic = false) {
    return Box{std::vector<double>(n, lo), std::vector<double>(n, hi), periodic};
}

double sphere(std::span<const double> x, double shift = 0.3) {
    double s = 0;
    for (double v : x) s += (v - shift) * (v - shift);
    return s;
}

double rastrigin(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2 * kPi * v);
    return s;
}

TEST(BoxTest, ClipAndWrap) {
    std::vector<double> x{-5.0, 0.5, 7.0};
    cube(3, -1, 1).project(x);
    EXPECT_EQ(x, (std::vector<double>{-1.0, 0.5, 1.0}));
    std::vector<double> y{kPi + 0.5, -kPi - 0.25, 0.1};
    cube(3, -kPi, kPi, true).project(y);
    EXPECT_NEAR(y[0], -kPi + 0.5, 1e-12);
    EXPECT_NEAR(y[1], kPi - 0.25, 1e-12);
    EXPECT_EQ(y[2], 0.1);
    EXPECT_THROW(cube(2, 1, -1).validate(), UsageError);
    EXPECT_THROW((Box{{0.0}, {1.0, 2.0}}).validate(), UsageError);
}

TEST(NelderMeadTest, ConvergesOnSphere) {
    const std::vector<double> x0{2.0, -1.0, 0.0};
    const auto r = nelder_mead([](std::span<const double> x) { return sphere(x); }, x0, cube(3, -5, 5));
    EXPECT_LT(r.fun, 1e-10);
    for (double v : r.x) EXPECT_NEAR(v, 0.3, 1e-4);
    EXPECT_LE(r.evaluations, 1000);
}

TEST(NelderMeadTest, RespectsEvaluationCap) {
    int calls = 0;
    NelderMeadOptions opt;
    opt.max_evaluations = 37;
    const std::vector<double> x0{2.0, -1.0, 0.0, 1.0};
    const auto r = nelder_mead([&](std::span<const double> x) { ++calls; return sphere(x); }, x0, cube(4, -5, 5), opt);
    EXPECT_EQ(calls, r.evaluations);
    EXPECT_LE(calls, 37);
}

TEST(NelderMeadTest, BoundaryMinimumIsReachedByClipping) {
    const std::vector<double> x0{0.0, 0.0};
    const auto r = nelder_mead([](std::span<const double> x) { return sphere(x, 3.0); }, x0, cube(2, -1, 1));
    EXPECT_NEAR(r.x[0], 1.0, 1e-6);
    EXPECT_NEAR(r.x[1], 1.0, 1e-6);
}

TEST(NelderMeadTest, PeriodicObjectiveAcrossTheSeam) {
    // Minimum at the seam x = pi; the simplex must be able to step across it.
    const auto f = [](std::span<const double> x) { return 1.0 + std::cos(x[0]) + 1.0 + std::cos(x[1]); };
    const std::vector<double> x0{2.9, -2.9};
    const auto r = nelder_mead(f, x0, cube(2, -kPi, kPi, true));
    EXPECT_LT(r.fun, 1e-10);
    for (double v : r.x) {
        EXPECT_GE(v, -kPi);
        EXPECT_LE(v, kPi);
    }
}

TEST(DualAnnealingTest, FindsRastriginGlobalMinimum) {
    DualAnnealingOptions opt;
    opt.max_evaluations = 4000;
    opt.seed = 3;
    const auto r = dual_annealing(rastrigin, cube(3, -5.12, 5.12), opt);
    EXPECT_LT(r.fun, 1e-6);
    for (double v : r.x) EXPECT_NEAR(v, 0.0, 1e-3);
}

TEST(DualAnnealingTest, NeverExceedsBudget) {
    for (int budget : {1, 5, 50, 333}) {
        int calls = 0;
        DualAnnealingOptions opt;
        opt.max_evaluations = budget;
        const auto r = dual_annealing([&](std::span<const double> x) { ++calls; return rastrigin(x); },
                                      cube(4, -5.12, 5.12), opt);
        EXPECT_LE(calls, budget);
        EXPECT_EQ(calls, r.evaluations);
    }
}

TEST(DualAnnealingTest, DeterministicPerSeed) {
    DualAnnealingOptions opt;
    opt.max_evaluations = 800;
    opt.seed = 11;
    const auto a = dual_annealing(rastrigin, cube(3, -5.12, 5.12), opt);
    const auto b = dual_annealing(rastrigin, cube(3, -5.12, 5.12), opt);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.fun, b.fun);
    opt.seed = 12;
    EXPECT_NE(dual_annealing(rastrigin, cube(3, -5.12, 5.12), opt).x, a.x);
}

TEST(DualAnnealingTest, ImprovementsAreMonotoneAndEndAtResult) {
    DualAnnealingOptions opt;
    opt.max_evaluations = 600;
    std::vector<AnnealingTrace> trace;
    const auto r = dual_annealing(rastrigin, cube(5, -5.12, 5.12), opt, &trace);
    ASSERT_FALSE(trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) {
        EXPECT_LT(trace[i].fun, trace[i - 1].fun);
        EXPECT_GT(trace[i].evaluation, trace[i - 1].evaluation);
    }
    EXPECT_EQ(trace.back().fun, r.fun);
    EXPECT_EQ(rastrigin(r.x), r.fun);
}

TEST(DualAnnealingTest, WorksWithoutLocalSearch) {
    DualAnnealingOptions opt;
    opt.local_search = false;
    opt.max_evaluations = 3000;
    const auto r = dual_annealing([](std::span<const double> x) { return sphere(x); }, cube(2, -2, 2), opt);
    EXPECT_LT(r.fun, 1e-2);
}

TEST(DualAnnealingTest, OptionValidation) {
    DualAnnealingOptions opt;
    opt.visit = 1.0;
    EXPECT_THROW(opt.validate(), UsageError);
    opt = {};
    opt.visit = 3.5;
    EXPECT_THROW(opt.validate(), UsageError);
    opt = {};
    opt.accept = 0.0;
    EXPECT_THROW(opt.validate(), UsageError);
    opt = {};
    opt.restart_temp_ratio = 1.0;
    EXPECT_THROW(opt.validate(), UsageError);
    EXPECT_NO_THROW(DualAnnealingOptions{}.validate());
    EXPECT_THROW(dual_annealing(rastrigin, Box{}, DualAnnealingOptions{}), UsageError);
}

}  // namespace
}  // namespace qdistill
