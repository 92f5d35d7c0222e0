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

#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdistill/gates.hpp"
#include "qdistill/qmath.hpp"

namespace qdistill {

/// Ordered gate list over n qubits with symbolic parameter slots 0..n_params-1.
class Circuit {
   public:
    Circuit() = default;
    explicit Circuit(int n_qubits, int n_params = 0);

    int n_qubits() const { return n_qubits_; }
    int n_params() const { return n_params_; }
    const std::vector<GateOp>& ops() const { return ops_; }
    std::size_t size() const { return ops_.size(); }
    bool empty() const { return ops_.empty(); }

    /// Appends a gate; symbolic slots beyond n_params grow the slot count.
    Circuit& add(GateKind kind, std::initializer_list<int> qubits, Angle angle = {});
    Circuit& add(const GateOp& op);
    /// Appends a fresh parameter slot as the gate's angle and returns the slot index.
    int add_param(GateKind kind, std::initializer_list<int> qubits);
    /// Appends every op of `other` with its slots shifted by this circuit's n_params.
    Circuit& append(const Circuit& other);

    /// Throws if an op is out of range or slots have gaps.
    void validate() const;

    bool operator==(const Circuit&) const = default;

   private:
    int n_qubits_ = 0;
    int n_params_ = 0;
    std::vector<GateOp> ops_;
};

/// A circuit whose angles are all literals.
class BoundCircuit {
   public:
    BoundCircuit() = default;
    /// Throws if `c` still has free slots.
    explicit BoundCircuit(Circuit c);

    const Circuit& circuit() const { return circuit_; }
    int n_qubits() const { return circuit_.n_qubits(); }
    const std::vector<GateOp>& ops() const { return circuit_.ops(); }

    bool operator==(const BoundCircuit&) const = default;

   private:
    Circuit circuit_;
};

BoundCircuit bind_params(const Circuit& circuit, std::span<const double> values);

/// 2^n x 2^n unitary; the earliest op is the rightmost factor.
ComplexMatrix unitary_of(const BoundCircuit& bound);
ComplexMatrix unitary_of(const Circuit& circuit, std::span<const double> params);
/// Allocation-free form for hot loops; `out` is resized as needed.
void unitary_of(const Circuit& circuit, std::span<const double> params, ComplexMatrix& out);

StateVector simulate(const BoundCircuit& bound, const StateVector& input);
StateVector simulate(const Circuit& circuit, std::span<const double> params, const StateVector& input);
/// In-place form: evolves `amps` by the circuit.
void simulate_inplace(const Circuit& circuit, std::span<const double> params, std::span<cplx> amps);

/// <Z> on `qubit` for the state.
double expectation_z(const StateVector& state, int qubit);
double expectation_z(const BoundCircuit& bound, const StateVector& input, int qubit);
/// <Z> for every qubit.
std::vector<double> z_expectations(std::span<const cplx> amps, int n_qubits);

/// Line-oriented text form: "qubits N", optional "params P", then "GATE q0[,q1] [angle|@slot]".
/// Affine slot references are written "@slot*coef+offset".
std::string to_text(const Circuit& circuit);
Circuit circuit_from_text(std::string_view text);

// ---------------------------------------------------------------------------------------
// Parametric-layer templates

struct TemplateStep {
    GateKind kind;
    std::string pattern;  // all | inner for 1q; ladder | ring | ring_reverse | all_to_all | pairs | bridges for 2q
};

/// One parametric-layer architecture described as data.
struct TemplateSpec {
    std::string id;
    std::vector<TemplateStep> steps;

    /// Closed-form per-layer parameter count for n qubits.
    int params_per_layer(int n_qubits) const;
    /// Closed-form per-layer two-qubit gate count for n qubits.
    int entanglers_per_layer(int n_qubits) const;
};

/// Qubit operands a placement pattern expands to, in emission order.
std::vector<std::vector<int>> pattern_operands(std::string_view pattern, int n_qubits);

class TemplateRegistry {
   public:
    /// c1..c19, with the shipped layer definitions.
    static const TemplateRegistry& builtin();

    /// "template ID" ... "GATE pattern" ... "end" blocks; '#' starts a comment.
    void load_config(std::string_view text);
    void load_config_file(const std::string& path);

    const TemplateSpec& get(std::string_view id) const;
    bool contains(std::string_view id) const { return specs_.find(id) != specs_.end(); }
    /// Registered ids in natural order (c1, c2, ..., c19, then others).
    std::vector<std::string> ids() const;

    Circuit build(std::string_view id, int n_qubits, int layers) const;

   private:
    std::map<std::string, TemplateSpec, std::less<>> specs_;
};

Circuit build_template(std::string_view id, int n_qubits, int layers);

/// Text of the shipped template catalog (also installed as templates.cfg).
std::string_view builtin_template_config();

}  // namespace qdistill
