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

#include "qdistill/transpile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qdistill/error.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-12;

// Angle folded into (-pi, pi].
double wrap(double a) {
    a = std::remainder(a, 2 * kPi);
    return a <= -kPi ? a + 2 * kPi : a;
}

bool is_zero_angle(double a) { return std::abs(wrap(a)) < kAngleTol; }

struct ZyzAngles {
    double phi, theta, lambda;
};

// U = e^{ia} RZ(phi) RY(theta) RZ(lambda).
ZyzAngles zyz(const ComplexMatrix& u) {
    const cplx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const cplx scale = 1.0 / std::sqrt(det);
    const cplx a = u(1, 1) * scale;  // e^{i(phi+lambda)/2} cos(theta/2)
    const cplx b = u(1, 0) * scale;  // e^{i(phi-lambda)/2} sin(theta/2)
    const double theta = 2.0 * std::atan2(std::abs(b), std::abs(a));
    const double sum = std::abs(a) > kAngleTol ? 2.0 * std::arg(a) : 0.0;
    const double diff = std::abs(b) > kAngleTol ? 2.0 * std::arg(b) : 0.0;
    return {(sum + diff) / 2, theta, (sum - diff) / 2};
}

void emit_rz(Circuit& out, int q, double a) {
    if (!is_zero_angle(a)) out.add(GateKind::RZ, {q}, Angle::literal(wrap(a)));
}

void emit_euler(Circuit& out, int q, const ComplexMatrix& u, const BasisSet& basis) {
    const auto [phi, theta, lambda] = zyz(u);
    const bool has_rz = basis.contains(GateKind::RZ);
    if (has_rz && is_zero_angle(theta)) {
        emit_rz(out, q, phi + lambda);
        return;
    }
    if (has_rz && basis.contains(GateKind::RX)) {
        // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2)
        emit_rz(out, q, lambda - kPi / 2);
        out.add(GateKind::RX, {q}, Angle::literal(wrap(theta)));
        emit_rz(out, q, phi + kPi / 2);
        return;
    }
    if (has_rz && basis.contains(GateKind::SX)) {
        if (std::abs(theta - kPi / 2) < kAngleTol) {
            emit_rz(out, q, lambda - kPi / 2);
            out.add(GateKind::SX, {q});
            emit_rz(out, q, phi + kPi / 2);
        } else if (basis.contains(GateKind::X) && std::abs(theta - kPi) < kAngleTol) {
            emit_rz(out, q, lambda - kPi / 2);
            out.add(GateKind::X, {q});
            emit_rz(out, q, phi + kPi / 2);
        } else {
            emit_rz(out, q, lambda);
            out.add(GateKind::SX, {q});
            emit_rz(out, q, theta + kPi);
            out.add(GateKind::SX, {q});
            emit_rz(out, q, phi + kPi);
        }
        return;
    }
    throw UsageError("merge_rotations: basis '" + basis.id + "' has no supported Euler form");
}

}  // namespace

Circuit lower(const Circuit& circuit, const BasisSet& basis, const RuleRegistry& rules) {
    Circuit out(circuit.n_qubits(), circuit.n_params());
    for (const auto& op : circuit.ops()) {
        for (GateOp g : rules.decompose(op.kind, op.angle, basis)) {
            g.qubits[0] = op.qubits[static_cast<std::size_t>(g.qubits[0])];
            if (arity(g.kind) == 2) g.qubits[1] = op.qubits[static_cast<std::size_t>(g.qubits[1])];
            out.add(g);
        }
    }
    return out;
}

Circuit lower(const Circuit& circuit, std::string_view basis_id, const RuleRegistry& rules) {
    return lower(circuit, rules.basis(basis_id), rules);
}

CompileReport metrics(const Circuit& circuit, std::string_view basis_id) {
    CompileReport r;
    r.basis = std::string(basis_id);
    std::vector<int> free_at(static_cast<std::size_t>(std::max(circuit.n_qubits(), 0)), 0);
    for (const auto& op : circuit.ops()) {
        const int a = arity(op.kind);
        int moment = 0;
        for (int k = 0; k < a; ++k) moment = std::max(moment, free_at[static_cast<std::size_t>(op.qubits[k])]);
        for (int k = 0; k < a; ++k) free_at[static_cast<std::size_t>(op.qubits[k])] = moment + 1;
        r.depth = std::max(r.depth, moment + 1);
        ++(a == 2 ? r.gates_2q : r.gates_1q);
    }
    r.total_gates = r.gates_1q + r.gates_2q;
    return r;
}

BoundCircuit merge_rotations(const BoundCircuit& bound, const BasisSet& basis) {
    const int n = bound.n_qubits();
    Circuit out(n);
    std::vector<ComplexMatrix> pending(static_cast<std::size_t>(n));
    std::vector<std::vector<GateOp>> run(static_cast<std::size_t>(n));
    auto flush = [&](int q) {
        auto& m = pending[static_cast<std::size_t>(q)];
        auto& ops = run[static_cast<std::size_t>(q)];
        if (m.dim() == 0) return;
        Circuit euler(n);
        emit_euler(euler, q, m, basis);
        // Keep the original run when resynthesis would not shorten it.
        if (euler.size() < ops.size()) {
            for (const auto& g : euler.ops()) out.add(g);
        } else {
            for (const auto& g : ops) out.add(g);
        }
        m = ComplexMatrix();
        ops.clear();
    };
    for (const auto& op : bound.ops()) {
        if (!basis.contains(op.kind)) {
            throw UsageError("merge_rotations: " + std::string(gate_name(op.kind)) + " is not in basis '" + basis.id + "'");
        }
        if (arity(op.kind) == 2) {
            flush(op.qubits[0]);
            flush(op.qubits[1]);
            out.add(op);
            continue;
        }
        auto& m = pending[static_cast<std::size_t>(op.qubits[0])];
        const auto g = is_parameterized(op.kind) ? gate_matrix(op.kind, op.angle.offset) : gate_matrix(op.kind);
        m = m.dim() == 0 ? g : matmul(g, m);
        run[static_cast<std::size_t>(op.qubits[0])].push_back(op);
    }
    for (int q = 0; q < n; ++q) flush(q);
    return BoundCircuit(std::move(out));
}

std::vector<OverheadRow> overhead_table(const std::vector<std::string>& template_ids,
                                        const std::vector<std::string>& basis_ids, int n_qubits,
                                        const OverheadOptions& options, const TemplateRegistry& templates,
                                        const RuleRegistry& rules) {
    std::vector<OverheadRow> rows;
    for (const auto& id : template_ids) {
        const Circuit c = templates.build(id, n_qubits, 1);
        for (const auto& b : basis_ids) {
            const BasisSet& basis = rules.basis(b);
            Circuit lowered = lower(c, basis, rules);
            if (options.merge_rotations) {
                Rng rng(options.seed);
                std::vector<double> p(static_cast<std::size_t>(lowered.n_params()));
                for (auto& x : p) x = rng.uniform(-kPi, kPi);
                lowered = merge_rotations(bind_params(lowered, p), basis).circuit();
            }
            rows.push_back({id, metrics(lowered, b)});
        }
    }
    return rows;
}

std::string overhead_csv(const std::vector<OverheadRow>& rows, std::string_view provenance) {
    std::ostringstream out;
    out << "# " << provenance << "\n";
    out << "template,basis,depth,total,g1q,g2q\n";
    for (const auto& r : rows) {
        out << r.template_id << ',' << r.report.basis << ',' << r.report.depth << ',' << r.report.total_gates << ','
            << r.report.gates_1q << ',' << r.report.gates_2q << "\n";
    }
    return out.str();
}

}  // namespace qdistill
