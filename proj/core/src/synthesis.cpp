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

#include "qdistill/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json_io.hpp"
#include "qdistill/error.hpp"
#include "qdistill/log.hpp"
#include "qdistill/parallel.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

namespace {

constexpr double kPi = std::numbers::pi;

cplx overlap_at(const SynthesisProblem& p, std::span<const double> theta) {
    thread_local ComplexMatrix v;
    unitary_of(p.student, theta, v);
    return hs_trace_overlap(p.teacher, v);
}

double distance_from_overlap(cplx t, std::size_t dim) {
    return std::clamp(1.0 - std::abs(t) / static_cast<double>(dim), 0.0, 1.0);
}

}  // namespace

double hs_distance(const ComplexMatrix& u, const ComplexMatrix& v) {
    return distance_from_overlap(hs_trace_overlap(u, v), u.dim());
}

void AnnealConfig::validate() const {
    DualAnnealingOptions o;
    o.initial_temp = initial_temp;
    o.restart_temp_ratio = restart_temp_ratio;
    o.visit = visit;
    o.accept = accept;
    o.validate();
    if (polish_allowance < 0) throw UsageError("anneal: polish allowance must be >= 0");
    if (!(initial_simplex_step > 0.0)) throw UsageError("anneal: simplex step must be > 0");
}

SynthesisProblem SynthesisProblem::make(ComplexMatrix teacher, Circuit student, int budget) {
    SynthesisProblem p;
    const auto n = static_cast<std::size_t>(student.n_params());
    p.bounds = Box{std::vector<double>(n, -kPi), std::vector<double>(n, kPi), true};
    p.teacher = std::move(teacher);
    p.student = std::move(student);
    p.budget = budget;
    p.validate();
    return p;
}

void SynthesisProblem::validate() const {
    if (teacher.dim() != (std::size_t{1} << student.n_qubits())) {
        throw UsageError("synthesis: teacher is " + std::to_string(teacher.dim()) + "-dimensional but student acts on " +
                         std::to_string(student.n_qubits()) + " qubits");
    }
    if (bounds.dim() != static_cast<std::size_t>(student.n_params())) {
        throw UsageError("synthesis: bounds length != student parameter count");
    }
    bounds.validate();
    if (budget < 1) throw UsageError("synthesis: budget must be >= 1");
}

double synthesis_cost(const SynthesisProblem& problem, std::span<const double> theta) {
    return distance_from_overlap(overlap_at(problem, theta), problem.teacher.dim());
}

SynthesisResult synthesize(const SynthesisProblem& problem, const AnnealConfig& config) {
    problem.validate();
    config.validate();
    SynthesisResult r;
    r.seed = config.seed;
    const auto n = static_cast<std::size_t>(problem.student.n_params());
    if (n == 0) {
        r.trace = overlap_at(problem, {});
        r.distance = distance_from_overlap(r.trace, problem.teacher.dim());
        r.evaluations = 1;
        r.trace_of_best.push_back({1, r.distance});
        r.converged = r.distance <= config.converged_threshold;
        return r;
    }
    if (problem.budget < 10 * static_cast<int>(n)) {
        warn("synthesis: budget " + std::to_string(problem.budget) + " is below 10 x " + std::to_string(n) +
             " parameters");
    }
    const Objective cost = [&](std::span<const double> th) { return synthesis_cost(problem, th); };

    DualAnnealingOptions da;
    da.initial_temp = config.initial_temp;
    da.restart_temp_ratio = config.restart_temp_ratio;
    da.visit = config.visit;
    da.accept = config.accept;
    da.seed = config.seed;
    da.max_evaluations = problem.budget;
    da.local_search = config.local_search;
    da.local.max_evaluations = 0;
    da.local.initial_step = config.initial_simplex_step;
    OptimizeResult best = dual_annealing(cost, problem.bounds, da, &r.trace_of_best);

    if (config.local_polish && config.polish_allowance > 0) {
        NelderMeadOptions nm;
        nm.max_evaluations = config.polish_allowance;
        nm.initial_step = config.initial_simplex_step;
        const int offset = best.evaluations;
        double running = best.fun;
        int calls = 0;
        const Objective counted = [&](std::span<const double> th) {
            ++calls;
            const double v = cost(th);
            if (v < running) {
                running = v;
                r.trace_of_best.push_back({offset + calls, v});
            }
            return v;
        };
        const OptimizeResult polished = nelder_mead(counted, best.x, problem.bounds, nm);
        best.evaluations += polished.evaluations;
        if (polished.fun < best.fun) {
            best.fun = polished.fun;
            best.x = polished.x;
        }
    }
    r.theta = best.x;
    r.evaluations = best.evaluations;
    r.trace = overlap_at(problem, r.theta);
    r.distance = distance_from_overlap(r.trace, problem.teacher.dim());
    r.converged = r.distance <= config.converged_threshold;
    return r;
}

SynthesisResult synthesize_best(const SynthesisProblem& problem, const AnnealConfig& config,
                                std::span<const std::uint64_t> seeds, int jobs, std::vector<SynthesisResult>* all) {
    if (seeds.empty()) throw UsageError("synthesis: at least one seed required");
    std::vector<SynthesisResult> results(seeds.size());
    parallel_for(seeds.size(), jobs, [&](std::size_t i) {
        AnnealConfig c = config;
        c.seed = seeds[i];
        results[i] = synthesize(problem, c);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        const auto& a = results[i];
        const auto& b = results[best];
        if (a.distance < b.distance || (a.distance == b.distance && a.seed < b.seed)) best = i;
    }
    SynthesisResult out = results[best];
    if (all) *all = std::move(results);
    return out;
}

DistillResult distill(const HybridModel& teacher, const std::string& student_template, int student_layers,
                      const AnnealConfig& config, std::span<const std::uint64_t> seeds, int budget, int jobs,
                      const TemplateRegistry& templates) {
    teacher.validate();
    Circuit student_pqc = templates.build(student_template, teacher.n_qubits(), student_layers);
    if (student_pqc.n_qubits() != teacher.pqc.n_qubits()) throw UsageError("distill: qubit count mismatch");
    // The teacher's parameters are frozen into a fixed target unitary.
    const ComplexMatrix target = unitary_of(teacher.pqc, teacher.theta);
    const auto problem = SynthesisProblem::make(target, student_pqc, budget);

    DistillResult d;
    d.best = synthesize_best(problem, config, seeds, jobs, &d.per_seed);
    d.student = teacher;
    d.student.template_id = student_template;
    d.student.layers = student_layers;
    d.student.pqc = std::move(student_pqc);
    d.student.theta = d.best.theta;
    return d;
}

std::string distill_record_json(const std::string& teacher_ref, const std::string& student_template,
                                int student_layers, int budget, const DistillResult& result) {
    using detail::json;
    auto run_json = [](const SynthesisResult& r) {
        json trace = json::array();
        for (const auto& t : r.trace_of_best) trace.push_back(json::array({t.evaluation, t.fun}));
        return json{{"seed", r.seed},
                    {"distance", r.distance},
                    {"evaluations", r.evaluations},
                    {"converged", r.converged},
                    {"trace_re", r.trace.real()},
                    {"trace_im", r.trace.imag()},
                    {"theta", r.theta},
                    {"distance_trace", trace}};
    };
    json runs = json::array();
    for (const auto& r : result.per_seed) runs.push_back(run_json(r));
    json j{{"format", "qdistill-synthesis"},
           {"version", 1},
           {"teacher", teacher_ref},
           {"student_template", student_template},
           {"student_layers", student_layers},
           {"budget", budget},
           {"best_seed", result.best.seed},
           {"final_distance", result.best.distance},
           {"evaluations", result.best.evaluations},
           {"runs", runs}};
    return j.dump(2) + "\n";
}

FidelityInstance fidelity_instance(const std::string& template_id, int n_qubits, int deep_layers, int shallow_layers,
                                   int budget, std::uint64_t seed, const AnnealConfig& config,
                                   const TemplateRegistry& templates) {
    Rng rng(seed);
    const Circuit deep = templates.build(template_id, n_qubits, deep_layers);
    std::vector<double> p(static_cast<std::size_t>(deep.n_params()));
    for (auto& x : p) x = rng.uniform(-kPi, kPi);
    const ComplexMatrix ua = unitary_of(deep, p);
    const auto problem = SynthesisProblem::make(ua, templates.build(template_id, n_qubits, shallow_layers), budget);
    AnnealConfig c = config;
    c.seed = rng.next_u64();
    const SynthesisResult r = synthesize(problem, c);
    const ComplexMatrix ub = unitary_of(problem.student, r.theta);
    cplx amp = 0.0;
    for (std::size_t i = 0; i < ua.dim(); ++i) amp += std::conj(ua(i, 0)) * ub(i, 0);
    return {std::min(1.0, std::norm(amp)), r.distance, r.evaluations};
}

}  // namespace qdistill
