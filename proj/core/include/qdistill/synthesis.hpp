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
#include <span>
#include <string>
#include <vector>

#include "qdistill/circuit.hpp"
#include "qdistill/optimize.hpp"
#include "qdistill/qmath.hpp"
#include "qdistill/qnn.hpp"

namespace qdistill {

/// 1 - |Tr(U^dagger V)| / N: zero iff V equals U up to global phase.
double hs_distance(const ComplexMatrix& u, const ComplexMatrix& v);

struct AnnealConfig {
    double initial_temp = 5230.0;
    double restart_temp_ratio = 2e-5;
    double visit = 2.62;
    double accept = -5.0;
    std::uint64_t seed = 0;
    /// Final Nelder-Mead polish from the best point, beyond the budget.
    bool local_polish = true;
    int polish_allowance = 200;
    /// Nelder-Mead runs inside the annealing loop (within the budget).
    bool local_search = true;
    double initial_simplex_step = 0.25;
    double converged_threshold = 0.05;

    void validate() const;
};

struct SynthesisProblem {
    ComplexMatrix teacher;  // frozen target U
    Circuit student;        // V(theta)
    Box bounds;             // per parameter, periodic [-pi, pi] by default
    int budget = 1000;      // objective evaluations

    /// Default bounds [-pi, pi] for every student slot.
    static SynthesisProblem make(ComplexMatrix teacher, Circuit student, int budget = 1000);
    void validate() const;
};

struct SynthesisResult {
    std::vector<double> theta;
    double distance = 1.0;
    int evaluations = 0;
    cplx trace{};  // Tr(U^dagger V(theta))
    bool converged = false;
    std::uint64_t seed = 0;
    std::vector<AnnealingTrace> trace_of_best;  // (evaluation, distance) at each improvement
};

/// Distance of the student at `theta` against the teacher.
double synthesis_cost(const SynthesisProblem& problem, std::span<const double> theta);

/// Dual annealing over the student parameters, then optional polish. Evaluations never
/// exceed budget + polish_allowance.
SynthesisResult synthesize(const SynthesisProblem& problem, const AnnealConfig& config);

/// Independent chains, one per seed; the best distance wins, ties to the earlier seed.
/// `all` receives per-seed results in seed order when given.
SynthesisResult synthesize_best(const SynthesisProblem& problem, const AnnealConfig& config,
                                std::span<const std::uint64_t> seeds, int jobs = 1,
                                std::vector<SynthesisResult>* all = nullptr);

struct DistillResult {
    HybridModel student;
    SynthesisResult best;
    std::vector<SynthesisResult> per_seed;
};

/// Freezes the teacher PQC, synthesizes a student PQC to match its unitary, and returns a
/// model with the teacher's encoder, scaler and dense head around the student PQC.
DistillResult distill(const HybridModel& teacher, const std::string& student_template, int student_layers,
                      const AnnealConfig& config, std::span<const std::uint64_t> seeds, int budget = 1000,
                      int jobs = 1, const TemplateRegistry& templates = TemplateRegistry::builtin());

/// JSON record of a distillation run.
std::string distill_record_json(const std::string& teacher_ref, const std::string& student_template,
                                int student_layers, int budget, const DistillResult& result);

/// Fidelity |<0|U_a^dagger U_b|0>|^2 between a random deep circuit and its synthesized
/// shallow approximation, for one instance.
struct FidelityInstance {
    double fidelity = 0.0;
    double distance = 1.0;
    int evaluations = 0;
};

FidelityInstance fidelity_instance(const std::string& template_id, int n_qubits, int deep_layers, int shallow_layers,
                                   int budget, std::uint64_t seed, const AnnealConfig& config = {},
                                   const TemplateRegistry& templates = TemplateRegistry::builtin());

}  // namespace qdistill
