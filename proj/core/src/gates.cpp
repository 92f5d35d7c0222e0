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

#include "qdistill/gates.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qdistill/error.hpp"

namespace qdistill {

namespace {

constexpr double kPi = std::numbers::pi;

// Shipped basis sets and rewrite rules. Steps run left to right in time order; operand
// roles index the source gate's qubits (0 = control/first, 1 = target/second).
constexpr std::string_view kBuiltinRules = R"(
basis IBM ID RZ SX X CX
basis RIGETTI RX RZ CZ

rule H   IBM : RZ 0 pi/2 ; SX 0 ; RZ 0 pi/2
rule RX  IBM : RZ 0 pi/2 ; SX 0 ; RZ 0 theta+pi ; SX 0 ; RZ 0 pi/2
rule RY  IBM : SX 0 ; RZ 0 theta+pi ; SX 0 ; RZ 0 pi
rule CZ  IBM : H 1 ; CX 0 1 ; H 1

rule H   RIGETTI : RZ 0 pi/2 ; RX 0 pi/2 ; RZ 0 pi/2
rule RY  RIGETTI : RZ 0 -pi/2 ; RX 0 theta ; RZ 0 pi/2
rule X   RIGETTI : RX 0 pi
rule SX  RIGETTI : RX 0 pi/2
rule ID  RIGETTI :
rule CX  RIGETTI : H 1 ; CZ 0 1 ; H 1

rule CRZ * : RZ 1 theta/2 ; CX 0 1 ; RZ 1 -theta/2 ; CX 0 1
rule CRY * : RY 1 theta/2 ; CX 0 1 ; RY 1 -theta/2 ; CX 0 1
rule CRX * : H 1 ; RZ 1 theta/2 ; CX 0 1 ; RZ 1 -theta/2 ; CX 0 1 ; H 1
rule CX  * : H 1 ; CZ 0 1 ; H 1
rule CZ  * : H 1 ; CX 0 1 ; H 1
rule ID  * :
rule X   * : RX 0 pi
rule SX  * : RX 0 pi/2
rule H   * : RY 0 pi/2 ; RX 0 pi
rule RX  * : H 0 ; RZ 0 theta ; H 0
rule RY  * : RZ 0 -pi/2 ; RX 0 theta ; RZ 0 pi/2
rule RZ  * : H 0 ; RX 0 theta ; H 0
)";

struct AffineParser {
    std::string_view s;
    std::size_t pos = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw DataError("angle expression '" + std::string(s) + "': " + why);
    }

    AngleExpr expr() {
        AngleExpr v = term();
        while (true) {
            if (eat('+')) {
                AngleExpr r = term();
                v = {v.coef + r.coef, v.offset + r.offset};
            } else if (eat('-')) {
                AngleExpr r = term();
                v = {v.coef - r.coef, v.offset - r.offset};
            } else {
                return v;
            }
        }
    }
    AngleExpr term() {
        AngleExpr v = factor();
        while (true) {
            if (eat('*')) {
                AngleExpr r = factor();
                if (v.coef != 0.0 && r.coef != 0.0) fail("not affine in theta");
                v = v.coef != 0.0 ? AngleExpr{v.coef * r.offset, v.offset * r.offset}
                                  : AngleExpr{r.coef * v.offset, r.offset * v.offset};
            } else if (eat('/')) {
                AngleExpr r = factor();
                if (r.coef != 0.0 || r.offset == 0.0) fail("division by theta or zero");
                v = {v.coef / r.offset, v.offset / r.offset};
            } else {
                return v;
            }
        }
    }
    AngleExpr factor() {
        if (eat('-')) {
            AngleExpr v = factor();
            return {-v.coef, -v.offset};
        }
        if (eat('(')) {
            AngleExpr v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        skip();
        if (s.substr(pos, 5) == "theta") {
            pos += 5;
            return {1.0, 0.0};
        }
        if (s.substr(pos, 2) == "pi") {
            pos += 2;
            return {0.0, kPi};
        }
        const std::size_t start = pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                                  s[pos] == 'e' || s[pos] == 'E' ||
                                  ((s[pos] == '-' || s[pos] == '+') && pos > start &&
                                   (s[pos - 1] == 'e' || s[pos - 1] == 'E')))) {
            ++pos;
        }
        if (start == pos) fail("unexpected token");
        try {
            return {0.0, std::stod(std::string(s.substr(start, pos - start)))};
        } catch (const std::exception&) {
            fail("bad number");
        }
    }
};

std::vector<std::string> split_ws(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

std::string trim(std::string_view v) {
    std::size_t a = 0, b = v.size();
    while (a < b && std::isspace(static_cast<unsigned char>(v[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(v[b - 1]))) --b;
    return std::string(v.substr(a, b - a));
}

GateKind require_kind(std::string_view name) {
    auto k = parse_gate_kind(name);
    if (!k) throw DataError("unknown gate '" + std::string(name) + "'");
    return *k;
}

}  // namespace

int arity(GateKind kind) {
    switch (kind) {
        case GateKind::CX:
        case GateKind::CZ:
        case GateKind::CRX:
        case GateKind::CRY:
        case GateKind::CRZ:
            return 2;
        default:
            return 1;
    }
}

bool is_parameterized(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::CRX:
        case GateKind::CRY:
        case GateKind::CRZ:
            return true;
        default:
            return false;
    }
}

bool is_controlled_rotation(GateKind kind) {
    return kind == GateKind::CRX || kind == GateKind::CRY || kind == GateKind::CRZ;
}

std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::ID: return "ID";
        case GateKind::X: return "X";
        case GateKind::SX: return "SX";
        case GateKind::H: return "H";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::CX: return "CX";
        case GateKind::CZ: return "CZ";
        case GateKind::CRX: return "CRX";
        case GateKind::CRY: return "CRY";
        case GateKind::CRZ: return "CRZ";
    }
    return "?";
}

std::optional<GateKind> parse_gate_kind(std::string_view name) {
    std::string upper(name);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "CNOT") return GateKind::CX;
    for (GateKind k : kAllGateKinds) {
        if (gate_name(k) == upper) return k;
    }
    return std::nullopt;
}

double Angle::eval(std::span<const double> params) const {
    if (slot < 0) return offset;
    if (static_cast<std::size_t>(slot) >= params.size()) {
        throw UsageError("Angle: parameter slot " + std::to_string(slot) + " is unbound");
    }
    return coef * params[static_cast<std::size_t>(slot)] + offset;
}

AngleExpr AngleExpr::parse(std::string_view text) {
    AffineParser p{text};
    AngleExpr v = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing characters");
    return v;
}

Angle AngleExpr::apply(const Angle& source) const {
    if (coef == 0.0) return Angle::literal(offset);
    if (!source.is_symbolic()) return Angle::literal(coef * source.offset + offset);
    return Angle{source.slot, coef * source.coef, coef * source.offset + offset};
}

ComplexMatrix gate_matrix(GateKind kind, std::optional<double> angle) {
    if (is_parameterized(kind) != angle.has_value()) {
        throw UsageError(std::string("gate_matrix: ") + std::string(gate_name(kind)) +
                         (angle ? " takes no angle" : " requires an angle"));
    }
    const cplx i{0.0, 1.0};
    const double t = angle.value_or(0.0);
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    const double r = 1.0 / std::numbers::sqrt2;

    auto controlled = [](const ComplexMatrix& u) {
        ComplexMatrix m = ComplexMatrix::identity(4);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) m(2 + a, 2 + b) = u(a, b);
        return m;
    };

    switch (kind) {
        case GateKind::ID: return ComplexMatrix::identity(2);
        case GateKind::X: return {{0.0, 1.0}, {1.0, 0.0}};
        case GateKind::SX: return {{0.5 * (1.0 + i), 0.5 * (1.0 - i)}, {0.5 * (1.0 - i), 0.5 * (1.0 + i)}};
        case GateKind::H: return {{r, r}, {r, -r}};
        case GateKind::RX: return {{c, -i * s}, {-i * s, c}};
        case GateKind::RY: return {{c, -s}, {s, c}};
        case GateKind::RZ: return {{std::exp(-i * (t / 2)), 0.0}, {0.0, std::exp(i * (t / 2))}};
        case GateKind::CX: {
            ComplexMatrix m(4);
            m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
            return m;
        }
        case GateKind::CZ: {
            ComplexMatrix m = ComplexMatrix::identity(4);
            m(3, 3) = -1.0;
            return m;
        }
        case GateKind::CRX: return controlled(gate_matrix(GateKind::RX, t));
        case GateKind::CRY: return controlled(gate_matrix(GateKind::RY, t));
        case GateKind::CRZ: return controlled(gate_matrix(GateKind::RZ, t));
    }
    throw UsageError("gate_matrix: unknown gate");
}

void apply_matrix(std::span<cplx> amps, const ComplexMatrix& m, std::array<int, 2> qubits) {
    const std::size_t n = amps.size();
    if (m.dim() == 2) {
        const std::size_t bit = std::size_t{1} << qubits[0];
        const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
        for (std::size_t i0 = 0; i0 < n; ++i0) {
            if (i0 & bit) continue;
            const std::size_t i1 = i0 | bit;
            const cplx a0 = amps[i0], a1 = amps[i1];
            amps[i0] = m00 * a0 + m01 * a1;
            amps[i1] = m10 * a0 + m11 * a1;
        }
        return;
    }
    const std::size_t hi = std::size_t{1} << qubits[0];
    const std::size_t lo = std::size_t{1} << qubits[1];
    for (std::size_t base = 0; base < n; ++base) {
        if (base & (hi | lo)) continue;
        const std::size_t idx[4] = {base, base | lo, base | hi, base | hi | lo};
        cplx v[4];
        for (int k = 0; k < 4; ++k) v[k] = amps[idx[k]];
        for (int r = 0; r < 4; ++r) {
            cplx s = 0.0;
            for (int k = 0; k < 4; ++k) s += m(r, k) * v[k];
            amps[idx[r]] = s;
        }
    }
}

ComplexMatrix sequence_unitary(std::span<const GateOp> ops, int n_qubits, std::span<const double> params) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    // Evolve each basis column; column c of U is U|c>.
    ComplexMatrix u = ComplexMatrix::identity(dim);
    std::vector<cplx> col(dim);
    std::vector<ComplexMatrix> mats;
    mats.reserve(ops.size());
    for (const auto& op : ops) {
        mats.push_back(is_parameterized(op.kind) ? gate_matrix(op.kind, op.angle.eval(params))
                                                 : gate_matrix(op.kind));
    }
    for (std::size_t c = 0; c < dim; ++c) {
        std::fill(col.begin(), col.end(), cplx{});
        col[c] = 1.0;
        for (std::size_t g = 0; g < ops.size(); ++g) apply_matrix(col, mats[g], ops[g].qubits);
        for (std::size_t r = 0; r < dim; ++r) u(r, c) = col[r];
    }
    return u;
}

bool equal_up_to_phase(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    if (a.dim() != b.dim()) return false;
    return std::abs(hs_trace_overlap(a, b)) >= static_cast<double>(a.dim()) - tol;
}

const RuleRegistry& RuleRegistry::builtin() {
    static const RuleRegistry registry = [] {
        RuleRegistry r;
        r.load_config(kBuiltinRules);
        return r;
    }();
    return registry;
}

void RuleRegistry::add_basis(BasisSet basis) {
    if (basis.id.empty() || basis.id == "*") throw DataError("basis: invalid id");
    bases_[basis.id] = std::move(basis);
}

void RuleRegistry::add_rule(DecompositionRule rule) {
    const int n = arity(rule.source);
    for (const auto& step : rule.replacement) {
        for (int k = 0; k < arity(step.kind); ++k) {
            if (step.roles[k] < 0 || step.roles[k] >= n) {
                throw DataError("rule for " + std::string(gate_name(rule.source)) + ": operand role out of range");
            }
        }
        if (arity(step.kind) == 2 && step.roles[0] == step.roles[1]) {
            throw DataError("rule for " + std::string(gate_name(rule.source)) + ": repeated operand");
        }
        if (!is_parameterized(step.kind) && (step.angle.coef != 0.0 || step.angle.offset != 0.0)) {
            throw DataError("rule for " + std::string(gate_name(rule.source)) + ": angle on fixed gate " +
                            std::string(gate_name(step.kind)));
        }
    }

    const std::vector<double> samples =
        is_parameterized(rule.source) ? std::vector<double>{0.0, 0.3, -1.1, 2.5, kPi, -2.9} : std::vector<double>{0.0};
    for (double theta : samples) {
        std::vector<GateOp> ops;
        for (const auto& step : rule.replacement) {
            GateOp op{step.kind, {step.roles[0], arity(step.kind) == 2 ? step.roles[1] : -1},
                      step.angle.apply(Angle::literal(theta))};
            // Local convention: role 0 is the most significant qubit of the source matrix.
            for (int k = 0; k < arity(step.kind); ++k) op.qubits[k] = n - 1 - op.qubits[k];
            ops.push_back(op);
        }
        const ComplexMatrix src = is_parameterized(rule.source) ? gate_matrix(rule.source, theta) : gate_matrix(rule.source);
        if (!equal_up_to_phase(sequence_unitary(ops, n), src, 1e-9)) {
            throw DataError("rule for " + std::string(gate_name(rule.source)) + " -> " + rule.target_basis +
                            " does not reproduce the source unitary");
        }
    }
    rules_.push_back(std::move(rule));
}

void RuleRegistry::load_config(std::string_view text) {
    std::istringstream in{std::string(text)};
    int lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        try {
            auto toks = split_ws(line);
            if (toks[0] == "basis") {
                if (toks.size() < 3) throw DataError("basis needs a name and at least one gate");
                BasisSet b{toks[1], {}};
                for (std::size_t i = 2; i < toks.size(); ++i) b.gates.insert(require_kind(toks[i]));
                add_basis(std::move(b));
            } else if (toks[0] == "rule") {
                const auto colon = line.find(':');
                if (colon == std::string::npos) throw DataError("rule needs ':' before its replacement");
                auto head = split_ws(line.substr(0, colon));
                if (head.size() != 3) throw DataError("rule header is 'rule SRC BASIS :'");
                DecompositionRule rule{require_kind(head[1]), head[2], {}};
                std::string body = line.substr(colon + 1);
                std::size_t start = 0;
                while (start <= body.size()) {
                    std::size_t end = body.find(';', start);
                    if (end == std::string::npos) end = body.size();
                    auto step_toks = split_ws(std::string_view(body).substr(start, end - start));
                    start = end + 1;
                    if (step_toks.empty()) continue;
                    RuleStep step{require_kind(step_toks[0]), {0, -1}, {}};
                    const int na = arity(step.kind);
                    if (step_toks.size() < static_cast<std::size_t>(1 + na)) throw DataError("missing operand roles");
                    for (int k = 0; k < na; ++k) step.roles[k] = std::stoi(step_toks[1 + k]);
                    std::string expr;
                    for (std::size_t t = 1 + na; t < step_toks.size(); ++t) expr += step_toks[t];
                    if (is_parameterized(step.kind)) {
                        if (expr.empty()) throw DataError("missing angle for " + step_toks[0]);
                        step.angle = AngleExpr::parse(expr);
                    } else if (!expr.empty()) {
                        throw DataError("unexpected angle for " + step_toks[0]);
                    }
                    rule.replacement.push_back(step);
                }
                if (rule.target_basis != "*" && !has_basis(rule.target_basis)) {
                    throw DataError("rule targets unknown basis '" + rule.target_basis + "'");
                }
                add_rule(std::move(rule));
            } else {
                throw DataError("unknown directive '" + toks[0] + "'");
            }
        } catch (const DataError& e) {
            throw DataError("gate config line " + std::to_string(lineno) + ": " + e.what());
        } catch (const std::logic_error& e) {
            throw DataError("gate config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void RuleRegistry::load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open gate config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    load_config(ss.str());
}

const BasisSet& RuleRegistry::basis(std::string_view id) const {
    auto it = bases_.find(id);
    if (it == bases_.end()) {
        std::string known;
        for (const auto& [k, v] : bases_) known += (known.empty() ? "" : ", ") + k;
        throw UsageError("unknown basis '" + std::string(id) + "' (known: " + known + ")");
    }
    return it->second;
}

bool RuleRegistry::has_basis(std::string_view id) const { return bases_.find(id) != bases_.end(); }

std::vector<std::string> RuleRegistry::basis_ids() const {
    std::vector<std::string> ids;
    for (const auto& [k, v] : bases_) ids.push_back(k);
    return ids;
}

bool RuleRegistry::expand(const GateOp& op, const BasisSet& basis, unsigned active, std::vector<GateOp>& out) const {
    if (basis.contains(op.kind)) {
        out.push_back(op);
        return true;
    }
    // A kind already being expanded further up the stack would only loop.
    const unsigned bit = 1u << static_cast<unsigned>(op.kind);
    if (active & bit) return false;
    active |= bit;
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& rule : rules_) {
            if (rule.source != op.kind) continue;
            if ((pass == 0) != (rule.target_basis == basis.id)) continue;
            if (pass == 1 && rule.target_basis != "*") continue;
            std::vector<GateOp> trial;
            bool ok = true;
            for (const auto& step : rule.replacement) {
                GateOp sub{step.kind, {op.qubits[step.roles[0]], -1}, step.angle.apply(op.angle)};
                if (arity(step.kind) == 2) sub.qubits[1] = op.qubits[step.roles[1]];
                if (!is_parameterized(step.kind)) sub.angle = Angle{};
                if (!expand(sub, basis, active, trial)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                out.insert(out.end(), trial.begin(), trial.end());
                return true;
            }
        }
    }
    return false;
}

std::vector<GateOp> RuleRegistry::decompose(GateKind kind, const Angle& angle, const BasisSet& basis) const {
    GateOp op{kind, {0, arity(kind) == 2 ? 1 : -1}, is_parameterized(kind) ? angle : Angle{}};
    std::vector<GateOp> out;
    if (!expand(op, basis, 0u, out)) {
        throw UsageError("no rewrite chain takes " + std::string(gate_name(kind)) + " into basis '" + basis.id + "'");
    }
    return out;
}

}  // namespace qdistill
