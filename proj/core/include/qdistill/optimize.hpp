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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qdistill {

using Objective = std::function<double(std::span<const double>)>;

/// Box [lower_i, upper_i] per coordinate. Periodic boxes wrap points instead of clipping.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;
    bool periodic = false;

    std::size_t dim() const { return lower.size(); }
    void validate() const;
    /// Wraps (periodic) or clips `x` into the box.
    void project(std::span<double> x) const;
};

struct OptimizeResult {
    std::vector<double> x;
    double fun = 0.0;
    int evaluations = 0;
};

struct NelderMeadOptions {
    int max_evaluations = 1000;
    double initial_step = 0.25;  // simplex edge along each axis
    double xatol = 1e-8;
    double fatol = 1e-12;
    /// Gao-Han dimension-dependent coefficients instead of the classic (1, 2, 0.5, 0.5).
    bool adaptive = true;
};

/// Downhill simplex started at x0. Every trial point is projected into `box` first.
OptimizeResult nelder_mead(const Objective& f, std::span<const double> x0, const Box& box,
                           const NelderMeadOptions& options = {});

/// Generalized simulated annealing with a distorted Cauchy-Lorentz visiting distribution.
struct DualAnnealingOptions {
    double initial_temp = 5230.0;
    double restart_temp_ratio = 2e-5;
    double visit = 2.62;
    double accept = -5.0;
    int max_iterations = 1000;
    int max_evaluations = 1000;
    std::uint64_t seed = 0;
    bool local_search = true;
    NelderMeadOptions local;  // max_evaluations is capped by the remaining budget

    void validate() const;
};

struct AnnealingTrace {
    int evaluation;
    double fun;
};

/// Minimizes f over box; never evaluates f more than options.max_evaluations times.
/// When `improvements` is given, every new best value is appended to it.
OptimizeResult dual_annealing(const Objective& f, const Box& box, const DualAnnealingOptions& options,
                              std::vector<AnnealingTrace>* improvements = nullptr);

}  // namespace qdistill
