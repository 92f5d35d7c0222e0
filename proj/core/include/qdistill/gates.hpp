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

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdistill/qmath.hpp"

namespace qdistill {

enum class GateKind { ID, X, SX, H, RX, RY, RZ, CX, CZ, CRX, CRY, CRZ };

inline constexpr std::array kAllGateKinds = {GateKind::ID, GateKind::X,   GateKind::SX,  GateKind::H,
                                             GateKind::RX, GateKind::RY,  GateKind::RZ,  GateKind::CX,
                                             GateKind::CZ, GateKind::CRX, GateKind::CRY, GateKind::CRZ};

int arity(GateKind kind);
bool is_parameterized(GateKind kind);
bool is_controlled_rotation(GateKind kind);
std::string_view gate_name(GateKind kind);
std::optional<GateKind> parse_gate_kind(std::string_view name);

/// Rotation angle of a gate: a literal, or coef * params[slot] + offset.
struct Angle {
    int slot = -1;
    double coef = 0.0;
    double offset = 0.0;

    static Angle literal(double value) { return Angle{-1, 0.0, value}; }
    static Angle param(int slot, double coef = 1.0, double offset = 0.0) { return Angle{slot, coef, offset}; }

    bool is_symbolic() const { return slot >= 0; }
    double eval(std::span<const double> params) const;

    bool operator==(const Angle&) const = default;
};

/// Affine function of a source gate's angle; how rewrite rules derive replacement angles.
struct AngleExpr {
    double coef = 0.0;
    double offset = 0.0;

    /// Parses e.g. "theta/2", "-theta/2", "theta+pi", "pi/2", "0.25*theta - pi".
    static AngleExpr parse(std::string_view text);
    Angle apply(const Angle& source) const;
};

/// One gate application. For two-qubit gates qubits[0] is the control (for symmetric CZ
/// simply the first operand); it is the more significant bit of the 4x4 local matrix.
struct GateOp {
    GateKind kind = GateKind::ID;
    std::array<int, 2> qubits{0, -1};
    Angle angle{};

    bool operator==(const GateOp&) const = default;
};

/// Standard matrix; angle must be supplied iff the gate is parameterized.
ComplexMatrix gate_matrix(GateKind kind, std::optional<double> angle = std::nullopt);

struct BasisSet {
    std::string id;
    std::set<GateKind> gates;

    bool contains(GateKind k) const { return gates.contains(k); }
};

struct RuleStep {
    GateKind kind;
    std::array<int, 2> roles{0, -1};  // indices into the source gate's operands
    AngleExpr angle;
};

struct DecompositionRule {
    GateKind source;
    std::string target_basis;  // "*" applies to any basis
    std::vector<RuleStep> replacement;
};

/// Basis sets and rewrite rules. Built once, then read-only.
class RuleRegistry {
   public:
    /// IBM {ID,RZ,SX,X,CX} and RIGETTI {RX,RZ,CZ} with the shipped rewrite rules.
    static const RuleRegistry& builtin();

    RuleRegistry() = default;

    /// Config text: "basis NAME G..." and "rule SRC BASIS : GATE roles [angle] ; ..." lines.
    void load_config(std::string_view text);
    void load_config_file(const std::string& path);

    void add_basis(BasisSet basis);
    /// Verifies the replacement against the source matrix at sampled angles before adding.
    void add_rule(DecompositionRule rule);

    const BasisSet& basis(std::string_view id) const;
    bool has_basis(std::string_view id) const;
    std::vector<std::string> basis_ids() const;
    const std::vector<DecompositionRule>& rules() const { return rules_; }

    /// Rewrites one gate (operands given as roles 0/1) into gates of `basis`, up to global phase.
    std::vector<GateOp> decompose(GateKind kind, const Angle& angle, const BasisSet& basis) const;

   private:
    bool expand(const GateOp& op, const BasisSet& basis, unsigned active, std::vector<GateOp>& out) const;

    std::map<std::string, BasisSet, std::less<>> bases_;
    std::vector<DecompositionRule> rules_;
};

/// Applies a 2x2 (one qubit) or 4x4 (two qubits, qubits[0] most significant) matrix to a
/// 2^n amplitude vector in place.
void apply_matrix(std::span<cplx> amps, const ComplexMatrix& m, std::array<int, 2> qubits);

/// Composed unitary of a gate sequence on `n_qubits` (earliest op acts first).
ComplexMatrix sequence_unitary(std::span<const GateOp> ops, int n_qubits, std::span<const double> params = {});

/// |Tr(A^dagger B)| >= dim - tol.
bool equal_up_to_phase(const ComplexMatrix& a, const ComplexMatrix& b, double tol = 1e-9);

}  // namespace qdistill
