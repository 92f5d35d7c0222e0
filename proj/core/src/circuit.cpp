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

#include "qdistill/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "qdistill/error.hpp"

namespace qdistill {

namespace {

constexpr std::string_view kBuiltinTemplates = R"(# Parametric-layer catalog. One block per template; each line is "GATE pattern".
# 1q patterns:  all | inner (qubits 1..n-2)
# 2q patterns (control -> target):
#   ladder        (n-1 -> n-2), ..., (1 -> 0)
#   ring          (n-1 -> 0), (n-2 -> n-1), ..., (0 -> 1)
#   ring_reverse  (n-1 -> n-2), (0 -> n-1), (1 -> 0), ..., (n-2 -> n-3)
#   all_to_all    for c = n-1..0, for t = n-1..0, t != c: (c -> t)
#   pairs         (1 -> 0), (3 -> 2), ...
#   bridges       (2 -> 1), (4 -> 3), ...

template c1
  RX all
  RZ all
end

template c2
  RX all
  RZ all
  CX ladder
end

template c3
  RX all
  RZ all
  CRZ ladder
end

template c4
  RX all
  RZ all
  CRX ladder
end

template c5
  RX all
  RZ all
  CRZ all_to_all
  RX all
  RZ all
end

template c6
  RX all
  RZ all
  CRX all_to_all
  RX all
  RZ all
end

template c7
  RX all
  RZ all
  CRZ pairs
  RX all
  RZ all
  CRZ bridges
end

template c8
  RX all
  RZ all
  CRX pairs
  RX all
  RZ all
  CRX bridges
end

template c9
  H all
  CZ ladder
  RX all
end

template c10
  RY all
  CZ ring
  RY all
end

template c11
  RY all
  RZ all
  CX pairs
  RY inner
  RZ inner
  CX bridges
end

template c12
  RY all
  RZ all
  CZ pairs
  RY inner
  RZ inner
  CZ bridges
end

template c13
  RY all
  CRZ ring
  RY all
  CRZ ring_reverse
end

template c14
  RY all
  CRX ring
  RY all
  CRX ring_reverse
end

template c15
  RY all
  CX ring
end

template c16
  RX all
  RZ all
  CRZ pairs
  CRZ bridges
end

template c17
  RX all
  RZ all
  CRX pairs
  CRX bridges
end

template c18
  RX all
  RZ all
  CRZ ring
end

template c19
  RX all
  RZ all
  CRX ring
end
)";

void check_qubit(int q, int n) {
    if (q < 0 || q >= n) {
        throw UsageError("qubit index " + std::to_string(q) + " out of range for " + std::to_string(n) + " qubits");
    }
}

// Row-wise left multiplication U <- G U for a gate acting on the row index.
void apply_left(ComplexMatrix& u, const ComplexMatrix& g, std::array<int, 2> qubits) {
    const std::size_t n = u.dim();
    auto data = u.data();
    if (g.dim() == 2) {
        const std::size_t bit = std::size_t{1} << qubits[0];
        const cplx g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
        const bool diagonal = g01 == cplx{} && g10 == cplx{};
        for (std::size_t r0 = 0; r0 < n; ++r0) {
            if (r0 & bit) continue;
            cplx* a = &data[r0 * n];
            cplx* b = &data[(r0 | bit) * n];
            if (diagonal) {
                for (std::size_t c = 0; c < n; ++c) {
                    a[c] *= g00;
                    b[c] *= g11;
                }
            } else {
                for (std::size_t c = 0; c < n; ++c) {
                    const cplx x = a[c], y = b[c];
                    a[c] = g00 * x + g01 * y;
                    b[c] = g10 * x + g11 * y;
                }
            }
        }
        return;
    }
    const std::size_t hi = std::size_t{1} << qubits[0];
    const std::size_t lo = std::size_t{1} << qubits[1];
    for (std::size_t base = 0; base < n; ++base) {
        if (base & (hi | lo)) continue;
        cplx* rows[4] = {&data[base * n], &data[(base | lo) * n], &data[(base | hi) * n], &data[(base | hi | lo) * n]};
        for (std::size_t c = 0; c < n; ++c) {
            const cplx v[4] = {rows[0][c], rows[1][c], rows[2][c], rows[3][c]};
            for (int r = 0; r < 4; ++r) {
                cplx s = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const cplx gk = g(r, k);
                    if (gk != cplx{}) s += gk * v[k];
                }
                rows[r][c] = s;
            }
        }
    }
}

ComplexMatrix op_matrix(const GateOp& op, std::span<const double> params) {
    return is_parameterized(op.kind) ? gate_matrix(op.kind, op.angle.eval(params)) : gate_matrix(op.kind);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int natural_key(const std::string& id) {
    if (id.size() > 1 && id[0] == 'c' && std::all_of(id.begin() + 1, id.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        return std::stoi(id.substr(1));
    }
    return 1 << 20;
}

}  // namespace

Circuit::Circuit(int n_qubits, int n_params) : n_qubits_(n_qubits), n_params_(n_params) {
    if (n_qubits < 1) throw UsageError("Circuit: n_qubits must be >= 1");
    if (n_params < 0) throw UsageError("Circuit: n_params must be >= 0");
}

Circuit& Circuit::add(GateKind kind, std::initializer_list<int> qubits, Angle angle) {
    GateOp op{kind, {-1, -1}, is_parameterized(kind) ? angle : Angle{}};
    if (static_cast<int>(qubits.size()) != arity(kind)) {
        throw UsageError(std::string(gate_name(kind)) + " takes " + std::to_string(arity(kind)) + " qubit(s)");
    }
    std::copy(qubits.begin(), qubits.end(), op.qubits.begin());
    return add(op);
}

Circuit& Circuit::add(const GateOp& op) {
    for (int k = 0; k < arity(op.kind); ++k) check_qubit(op.qubits[k], n_qubits_);
    if (arity(op.kind) == 2 && op.qubits[0] == op.qubits[1]) {
        throw UsageError(std::string(gate_name(op.kind)) + ": control and target must differ");
    }
    GateOp stored = op;
    if (arity(op.kind) == 1) stored.qubits[1] = -1;
    if (!is_parameterized(op.kind)) stored.angle = Angle{};
    if (stored.angle.is_symbolic()) n_params_ = std::max(n_params_, stored.angle.slot + 1);
    ops_.push_back(stored);
    return *this;
}

int Circuit::add_param(GateKind kind, std::initializer_list<int> qubits) {
    const int slot = n_params_;
    add(kind, qubits, Angle::param(slot));
    return slot;
}

Circuit& Circuit::append(const Circuit& other) {
    if (other.n_qubits_ != n_qubits_) throw UsageError("Circuit::append: qubit count mismatch");
    const int shift = n_params_;
    for (GateOp op : other.ops_) {
        if (op.angle.is_symbolic()) op.angle.slot += shift;
        add(op);
    }
    n_params_ = shift + other.n_params_;
    return *this;
}

void Circuit::validate() const {
    std::vector<bool> used(static_cast<std::size_t>(n_params_), false);
    for (const auto& op : ops_) {
        for (int k = 0; k < arity(op.kind); ++k) check_qubit(op.qubits[k], n_qubits_);
        if (arity(op.kind) == 2 && op.qubits[0] == op.qubits[1]) throw UsageError("two-qubit op on one qubit");
        if (op.angle.is_symbolic()) {
            if (op.angle.slot >= n_params_) throw UsageError("slot out of range");
            used[static_cast<std::size_t>(op.angle.slot)] = true;
        }
    }
    if (std::find(used.begin(), used.end(), false) != used.end()) {
        throw UsageError("Circuit: parameter slots have gaps");
    }
}

BoundCircuit::BoundCircuit(Circuit c) : circuit_(std::move(c)) {
    if (circuit_.n_params() != 0) throw UsageError("BoundCircuit: circuit has free parameters");
}

BoundCircuit bind_params(const Circuit& circuit, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(circuit.n_params())) {
        throw UsageError("bind: expected " + std::to_string(circuit.n_params()) + " values, got " +
                         std::to_string(values.size()));
    }
    Circuit out(circuit.n_qubits());
    for (const auto& op : circuit.ops()) {
        GateOp b = op;
        if (op.angle.is_symbolic()) b.angle = Angle::literal(op.angle.eval(values));
        out.add(b);
    }
    return BoundCircuit(std::move(out));
}

void unitary_of(const Circuit& circuit, std::span<const double> params, ComplexMatrix& out) {
    const std::size_t dim = std::size_t{1} << circuit.n_qubits();
    if (out.dim() != dim) out = ComplexMatrix(dim);
    auto d = out.data();
    std::fill(d.begin(), d.end(), cplx{});
    for (std::size_t i = 0; i < dim; ++i) out(i, i) = 1.0;
    for (const auto& op : circuit.ops()) apply_left(out, op_matrix(op, params), op.qubits);
}

ComplexMatrix unitary_of(const Circuit& circuit, std::span<const double> params) {
    ComplexMatrix u;
    unitary_of(circuit, params, u);
    return u;
}

ComplexMatrix unitary_of(const BoundCircuit& bound) { return unitary_of(bound.circuit(), {}); }

void simulate_inplace(const Circuit& circuit, std::span<const double> params, std::span<cplx> amps) {
    if (amps.size() != (std::size_t{1} << circuit.n_qubits())) {
        throw UsageError("simulate: state dimension does not match circuit");
    }
    for (const auto& op : circuit.ops()) apply_matrix(amps, op_matrix(op, params), op.qubits);
}

StateVector simulate(const Circuit& circuit, std::span<const double> params, const StateVector& input) {
    StateVector out = input;
    simulate_inplace(circuit, params, out.amplitudes());
    return out;
}

StateVector simulate(const BoundCircuit& bound, const StateVector& input) { return simulate(bound.circuit(), {}, input); }

double expectation_z(const StateVector& state, int qubit) {
    check_qubit(qubit, state.n_qubits());
    const std::size_t bit = std::size_t{1} << qubit;
    double z = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) z += (i & bit ? -1.0 : 1.0) * std::norm(state[i]);
    return z;
}

double expectation_z(const BoundCircuit& bound, const StateVector& input, int qubit) {
    check_qubit(qubit, bound.n_qubits());
    return expectation_z(simulate(bound, input), qubit);
}

std::vector<double> z_expectations(std::span<const cplx> amps, int n_qubits) {
    std::vector<double> z(static_cast<std::size_t>(n_qubits), 0.0);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        for (int q = 0; q < n_qubits; ++q) z[static_cast<std::size_t>(q)] += (i >> q & 1u) ? -p : p;
    }
    return z;
}

std::string to_text(const Circuit& circuit) {
    std::ostringstream out;
    out << "qubits " << circuit.n_qubits() << "\n";
    if (circuit.n_params() > 0) out << "params " << circuit.n_params() << "\n";
    for (const auto& op : circuit.ops()) {
        out << gate_name(op.kind) << ' ' << op.qubits[0];
        if (arity(op.kind) == 2) out << ',' << op.qubits[1];
        if (is_parameterized(op.kind)) {
            const Angle& a = op.angle;
            if (!a.is_symbolic()) {
                out << ' ' << format_double(a.offset);
            } else {
                out << " @" << a.slot;
                if (a.coef != 1.0) out << '*' << format_double(a.coef);
                if (a.offset != 0.0) out << (a.offset > 0 ? "+" : "") << format_double(a.offset);
            }
        }
        out << "\n";
    }
    return out.str();
}

Circuit circuit_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    Circuit c;
    bool have_header = false;
    int declared_params = 0;
    int lineno = 0;
    auto fail = [&](const std::string& why) -> DataError {
        return DataError("circuit text line " + std::to_string(lineno) + ": " + why);
    };
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        const std::string line = raw.substr(0, raw.find('#'));
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "qubits") {
            int n = 0;
            if (have_header || !(ls >> n) || n < 1) throw fail("bad 'qubits' directive");
            c = Circuit(n);
            have_header = true;
            continue;
        }
        if (!have_header) throw fail("expected 'qubits N' first");
        if (head == "params") {
            if (!(ls >> declared_params) || declared_params < 0) throw fail("bad 'params' directive");
            continue;
        }
        auto kind = parse_gate_kind(head);
        if (!kind) throw fail("unknown gate '" + head + "'");
        std::string qs;
        if (!(ls >> qs)) throw fail("missing qubit operands");
        GateOp op{*kind, {-1, -1}, {}};
        const auto comma = qs.find(',');
        try {
            op.qubits[0] = std::stoi(qs.substr(0, comma));
            if (comma != std::string::npos) op.qubits[1] = std::stoi(qs.substr(comma + 1));
        } catch (const std::exception&) {
            throw fail("bad qubit operands '" + qs + "'");
        }
        if ((comma != std::string::npos) != (arity(*kind) == 2)) throw fail("wrong operand count for " + head);
        std::string angle;
        ls >> angle;
        if (is_parameterized(*kind)) {
            if (angle.empty()) throw fail("missing angle for " + head);
            try {
                if (angle[0] == '@') {
                    // @slot[*coef][(+|-)offset]
                    std::size_t pos = 1;
                    const int slot = std::stoi(angle.substr(pos), &pos);
                    pos += 1;
                    double coef = 1.0, offset = 0.0;
                    if (pos < angle.size() && angle[pos] == '*') {
                        std::size_t used = 0;
                        coef = std::stod(angle.substr(pos + 1), &used);
                        pos += 1 + used;
                    }
                    if (pos < angle.size()) {
                        std::size_t used = 0;
                        offset = std::stod(angle.substr(pos), &used);
                        pos += used;
                    }
                    if (pos != angle.size() || slot < 0) throw fail("bad slot reference '" + angle + "'");
                    op.angle = Angle::param(slot, coef, offset);
                } else {
                    std::size_t used = 0;
                    op.angle = Angle::literal(std::stod(angle, &used));
                    if (used != angle.size()) throw fail("bad angle '" + angle + "'");
                }
            } catch (const DataError&) {
                throw;
            } catch (const std::exception&) {
                throw fail("bad angle '" + angle + "'");
            }
        } else if (!angle.empty()) {
            throw fail(head + " takes no angle");
        }
        try {
            c.add(op);
        } catch (const UsageError& e) {
            throw fail(e.what());
        }
    }
    if (!have_header) throw DataError("circuit text: missing 'qubits N'");
    if (declared_params > c.n_params()) {
        Circuit padded(c.n_qubits(), declared_params);
        for (const auto& op : c.ops()) padded.add(op);
        c = padded;
    }
    return c;
}

std::vector<std::vector<int>> pattern_operands(std::string_view pattern, int n) {
    std::vector<std::vector<int>> out;
    if (pattern == "all") {
        for (int q = 0; q < n; ++q) out.push_back({q});
    } else if (pattern == "inner") {
        for (int q = 1; q + 1 < n; ++q) out.push_back({q});
    } else if (pattern == "ladder") {
        for (int i = n - 1; i >= 1; --i) out.push_back({i, i - 1});
    } else if (pattern == "ring") {
        for (int i = n - 1; i >= 0; --i) out.push_back({i, (i + 1) % n});
    } else if (pattern == "ring_reverse") {
        out.push_back({n - 1, n - 2});
        for (int i = 0; i + 1 < n; ++i) out.push_back({i, (i - 1 + n) % n});
    } else if (pattern == "all_to_all") {
        for (int c = n - 1; c >= 0; --c)
            for (int t = n - 1; t >= 0; --t)
                if (t != c) out.push_back({c, t});
    } else if (pattern == "pairs") {
        for (int i = 1; i < n; i += 2) out.push_back({i, i - 1});
    } else if (pattern == "bridges") {
        for (int i = 2; i < n; i += 2) out.push_back({i, i - 1});
    } else {
        throw DataError("unknown placement pattern '" + std::string(pattern) + "'");
    }
    return out;
}

namespace {

int pattern_size(std::string_view pattern, int n) {
    if (pattern == "all") return n;
    if (pattern == "inner") return std::max(0, n - 2);
    if (pattern == "ladder") return n - 1;
    if (pattern == "ring" || pattern == "ring_reverse") return n;
    if (pattern == "all_to_all") return n * (n - 1);
    if (pattern == "pairs") return n / 2;
    if (pattern == "bridges") return (n - 1) / 2;
    throw DataError("unknown placement pattern '" + std::string(pattern) + "'");
}

}  // namespace

int TemplateSpec::params_per_layer(int n) const {
    int count = 0;
    for (const auto& s : steps)
        if (is_parameterized(s.kind)) count += pattern_size(s.pattern, n);
    return count;
}

int TemplateSpec::entanglers_per_layer(int n) const {
    int count = 0;
    for (const auto& s : steps)
        if (arity(s.kind) == 2) count += pattern_size(s.pattern, n);
    return count;
}

const TemplateRegistry& TemplateRegistry::builtin() {
    static const TemplateRegistry registry = [] {
        TemplateRegistry r;
        r.load_config(kBuiltinTemplates);
        return r;
    }();
    return registry;
}

std::string_view builtin_template_config() { return kBuiltinTemplates; }

void TemplateRegistry::load_config(std::string_view text) {
    std::istringstream in{std::string(text)};
    int lineno = 0;
    std::optional<TemplateSpec> open;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        std::istringstream ls(raw.substr(0, raw.find('#')));
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty()) continue;
        auto fail = [&](const std::string& why) {
            return DataError("template config line " + std::to_string(lineno) + ": " + why);
        };
        if (toks[0] == "template") {
            if (open || toks.size() != 2) throw fail("bad 'template' line");
            open = TemplateSpec{toks[1], {}};
        } else if (toks[0] == "end") {
            if (!open) throw fail("'end' without 'template'");
            if (open->steps.empty()) throw fail("template '" + open->id + "' has no steps");
            specs_[open->id] = std::move(*open);
            open.reset();
        } else {
            if (!open || toks.size() != 2) throw fail("expected 'GATE pattern' inside a template block");
            auto kind = parse_gate_kind(toks[0]);
            if (!kind) throw fail("unknown gate '" + toks[0] + "'");
            const bool two = toks[1] != "all" && toks[1] != "inner";
            pattern_size(toks[1], 4);
            if (two != (arity(*kind) == 2)) throw fail("pattern '" + toks[1] + "' does not fit " + toks[0]);
            open->steps.push_back({*kind, toks[1]});
        }
    }
    if (open) throw DataError("template config: block '" + open->id + "' not closed");
}

void TemplateRegistry::load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open template config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    load_config(ss.str());
}

const TemplateSpec& TemplateRegistry::get(std::string_view id) const {
    auto it = specs_.find(id);
    if (it == specs_.end()) {
        std::string known;
        for (const auto& k : ids()) known += (known.empty() ? "" : ", ") + k;
        throw UsageError("unknown template '" + std::string(id) + "' (registered: " + known + ")");
    }
    return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : specs_) out.push_back(k);
    std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
        const int ka = natural_key(a), kb = natural_key(b);
        return ka != kb ? ka < kb : a < b;
    });
    return out;
}

Circuit TemplateRegistry::build(std::string_view id, int n_qubits, int layers) const {
    const TemplateSpec& spec = get(id);
    if (n_qubits < 2) throw UsageError("build_template: n_qubits must be >= 2");
    if (layers < 1) throw UsageError("build_template: layers must be >= 1");
    Circuit c(n_qubits);
    for (int l = 0; l < layers; ++l) {
        for (const auto& step : spec.steps) {
            for (const auto& qs : pattern_operands(step.pattern, n_qubits)) {
                GateOp op{step.kind, {qs[0], qs.size() > 1 ? qs[1] : -1}, {}};
                if (is_parameterized(step.kind)) op.angle = Angle::param(c.n_params());
                c.add(op);
            }
        }
    }
    return c;
}

Circuit build_template(std::string_view id, int n_qubits, int layers) {
    return TemplateRegistry::builtin().build(id, n_qubits, layers);
}

}  // namespace qdistill
