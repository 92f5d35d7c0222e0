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

#include "qdistill/noisesim.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json_io.hpp"
#include "qdistill/error.hpp"
#include "qdistill/parallel.hpp"
#include "qdistill/transpile.hpp"

namespace qdistill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// 1/T in 1/ns; zero for an infinite time constant.
double rate_per_ns(double t_us) { return std::isinf(t_us) ? 0.0 : 1.0 / (t_us * 1000.0); }

const ComplexMatrix& pauli(int i) {
    static const ComplexMatrix p[4] = {
        ComplexMatrix::identity(2),
        gate_matrix(GateKind::X),
        ComplexMatrix{{0.0, cplx(0.0, -1.0)}, {cplx(0.0, 1.0), 0.0}},
        ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}},
    };
    return p[i];
}

ComplexMatrix conj(const ComplexMatrix& m) {
    ComplexMatrix out(m.dim());
    for (std::size_t r = 0; r < m.dim(); ++r)
        for (std::size_t c = 0; c < m.dim(); ++c) out(r, c) = std::conj(m(r, c));
    return out;
}

double time_constant(const detail::json& j, const char* key) {
    if (!j.contains(key)) throw DataError(std::string("profile: missing field '") + key + "'");
    return j.at(key).is_null() ? kInf : detail::get_field<double>(j, key);
}

}  // namespace

void DeviceProfile::validate() const {
    const auto fail = [&](const std::string& what) { throw DataError("profile '" + name + "': " + what); };
    if (!is_probability(err_1q) || !is_probability(err_2q) || !is_probability(meas_err))
        fail("error probabilities must lie in [0, 1]");
    if (!(t1_us > 0.0) || !(t2_us > 0.0)) fail("T1 and T2 must be positive");
    if (t2_us > 2.0 * t1_us) fail("T2 must not exceed 2*T1");
    if (!(dur_1q_ns > 0.0) || !(dur_2q_ns > 0.0) || std::isinf(dur_1q_ns) || std::isinf(dur_2q_ns))
        fail("gate durations must be positive and finite");
    if (basis.empty()) fail("basis must be named");
}

DeviceProfile DeviceProfile::melbourne() {
    return {"melbourne", "IBM", 0.00104, 0.0314, 56.07, 55.5, 68.57, 902.9, 0.0563};
}

DeviceProfile DeviceProfile::almaden() {
    return {"almaden", "IBM", 0.0009, 0.0238, 86.78, 64.31, 35.55, 405.8, 0.0535};
}

DeviceProfile DeviceProfile::noiseless(std::string basis) {
    return {"noiseless", std::move(basis), 0.0, 0.0, kInf, kInf, 1.0, 1.0, 0.0};
}

DeviceProfile profile_from_json(std::string_view text) {
    const auto j = detail::parse_json(text);
    DeviceProfile p;
    p.name = detail::get_field<std::string>(j, "name");
    p.basis = j.contains("basis") ? detail::get_field<std::string>(j, "basis") : "IBM";
    p.err_1q = detail::get_field<double>(j, "err_1q");
    p.err_2q = detail::get_field<double>(j, "err_2q");
    p.t1_us = time_constant(j, "t1_us");
    p.t2_us = time_constant(j, "t2_us");
    p.dur_1q_ns = detail::get_field<double>(j, "dur_1q_ns");
    p.dur_2q_ns = detail::get_field<double>(j, "dur_2q_ns");
    p.meas_err = detail::get_field<double>(j, "meas_err");
    p.validate();
    return p;
}

std::string profile_to_json(const DeviceProfile& p) {
    const auto tc = [](double t) { return std::isinf(t) ? detail::json(nullptr) : detail::json(t); };
    detail::json j;
    j["name"] = p.name;
    j["basis"] = p.basis;
    j["err_1q"] = p.err_1q;
    j["err_2q"] = p.err_2q;
    j["t1_us"] = tc(p.t1_us);
    j["t2_us"] = tc(p.t2_us);
    j["dur_1q_ns"] = p.dur_1q_ns;
    j["dur_2q_ns"] = p.dur_2q_ns;
    j["meas_err"] = p.meas_err;
    return j.dump(2) + "\n";
}

DeviceProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open profile '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return profile_from_json(ss.str());
}

// ---------------------------------------------------------------------------------------

DensityMatrix::DensityMatrix(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 12) throw UsageError("density matrix supports 1..12 qubits");
    data_.assign(dim() * dim(), cplx{});
    data_[0] = 1.0;
}

DensityMatrix DensityMatrix::from_state(const StateVector& psi) {
    DensityMatrix rho(psi.n_qubits());
    const std::size_t d = rho.dim();
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) rho.data_[r * d + c] = psi[r] * std::conj(psi[c]);
    return rho;
}

cplx DensityMatrix::trace() const {
    cplx t{};
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
    return t;
}

double DensityMatrix::purity() const {
    // Tr(rho^2) = sum |rho_rc|^2 for Hermitian rho.
    double p = 0.0;
    for (const auto& v : data_) p += std::norm(v);
    return p;
}

bool DensityMatrix::is_hermitian(double tol) const {
    for (std::size_t r = 0; r < dim(); ++r)
        for (std::size_t c = r; c < dim(); ++c)
            if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
    return true;
}

ComplexMatrix DensityMatrix::reduced(int qubit) const {
    if (qubit < 0 || qubit >= n_qubits_) throw UsageError("qubit out of range");
    const std::size_t bit = std::size_t{1} << qubit;
    ComplexMatrix out(2);
    for (std::size_t r = 0; r < dim(); ++r) {
        if (r & bit) continue;
        out(0, 0) += (*this)(r, r);
        out(0, 1) += (*this)(r, r | bit);
        out(1, 0) += (*this)(r | bit, r);
        out(1, 1) += (*this)(r | bit, r | bit);
    }
    return out;
}

double DensityMatrix::expectation_z(int qubit) const {
    if (qubit < 0 || qubit >= n_qubits_) throw UsageError("qubit out of range");
    const std::size_t bit = std::size_t{1} << qubit;
    double z = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) z += ((i & bit) ? -1.0 : 1.0) * (*this)(i, i).real();
    return z;
}

void DensityMatrix::conjugate_by(std::span<cplx> buf, const ComplexMatrix& m, std::array<int, 2> qubits) const {
    // Row index bits sit n positions above the column bits, so M acts on the shifted
    // qubits and conj(M) on the originals: vec(M rho M^dagger) = (M (x) conj(M)) vec(rho).
    const auto shift = [&](int q) { return q < 0 ? q : q + n_qubits_; };
    apply_matrix(buf, m, {shift(qubits[0]), shift(qubits[1])});
    apply_matrix(buf, conj(m), qubits);
}

void DensityMatrix::apply_unitary(const ComplexMatrix& m, std::array<int, 2> qubits) {
    conjugate_by(data_, m, qubits);
}

void DensityMatrix::apply_kraus(std::span<const ComplexMatrix> ops, std::array<int, 2> qubits) {
    if (ops.empty()) return;
    if (ops.size() == 1) {
        conjugate_by(data_, ops[0], qubits);
        return;
    }
    std::vector<cplx> acc(data_.size(), cplx{});
    std::vector<cplx> work(data_.size());
    for (const auto& k : ops) {
        work = data_;
        conjugate_by(work, k, qubits);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += work[i];
    }
    data_ = std::move(acc);
}

// ---------------------------------------------------------------------------------------

bool KrausChannel::is_cptp(double tol) const {
    if (ops.empty()) return false;
    const std::size_t d = ops.front().dim();
    ComplexMatrix sum(d);
    for (const auto& k : ops) {
        if (k.dim() != d) return false;
        const auto kk = matmul(k.adjoint(), k);
        for (std::size_t i = 0; i < d * d; ++i) sum.data()[i] += kk.data()[i];
    }
    return max_abs_diff(sum, ComplexMatrix::identity(d)) <= tol;
}

KrausChannel depolarizing_channel(int n_qubits, double p) {
    if (n_qubits != 1 && n_qubits != 2) throw UsageError("depolarizing channel acts on 1 or 2 qubits");
    if (!is_probability(p)) throw UsageError("depolarizing probability must lie in [0, 1]");
    const int terms = n_qubits == 1 ? 4 : 16;
    const double w = p / terms;
    KrausChannel ch;
    for (int i = 0; i < terms; ++i) {
        const double scale = std::sqrt(i == 0 ? 1.0 - p + w : w);
        if (scale == 0.0) continue;
        const auto pm = n_qubits == 1 ? pauli(i) : kron(pauli(i / 4), pauli(i % 4));
        ch.ops.push_back(pm * scale);
    }
    return ch;
}

KrausChannel amplitude_damping_channel(double gamma) {
    if (!is_probability(gamma)) throw UsageError("damping parameter must lie in [0, 1]");
    KrausChannel ch;
    ch.ops.push_back(ComplexMatrix{{1.0, 0.0}, {0.0, std::sqrt(1.0 - gamma)}});
    if (gamma > 0.0) ch.ops.push_back(ComplexMatrix{{0.0, std::sqrt(gamma)}, {0.0, 0.0}});
    return ch;
}

KrausChannel phase_damping_channel(double lambda) {
    if (!is_probability(lambda)) throw UsageError("dephasing parameter must lie in [0, 1]");
    const double keep = 1.0 - lambda;
    KrausChannel ch;
    ch.ops.push_back(ComplexMatrix{{1.0, 0.0}, {0.0, keep}});
    if (lambda > 0.0) ch.ops.push_back(ComplexMatrix{{0.0, 0.0}, {0.0, std::sqrt(1.0 - keep * keep)}});
    return ch;
}

double relaxation_gamma(const DeviceProfile& p, double duration_ns) {
    return 1.0 - std::exp(-duration_ns * rate_per_ns(p.t1_us));
}

double dephasing_lambda(const DeviceProfile& p, double duration_ns) {
    // Pure dephasing rate 1/T2 - 1/(2 T1); amplitude damping already supplies the rest.
    const double rate = std::max(0.0, rate_per_ns(p.t2_us) - 0.5 * rate_per_ns(p.t1_us));
    return 1.0 - std::exp(-duration_ns * rate);
}

// ---------------------------------------------------------------------------------------

NoiseModel::NoiseModel(DeviceProfile profile)
    : profile_(std::move(profile)),
      dep_1q_(depolarizing_channel(1, profile_.err_1q)),
      dep_2q_(depolarizing_channel(2, profile_.err_2q)),
      ad_1q_(amplitude_damping_channel(relaxation_gamma(profile_, profile_.dur_1q_ns))),
      pd_1q_(phase_damping_channel(dephasing_lambda(profile_, profile_.dur_1q_ns))),
      ad_2q_(amplitude_damping_channel(relaxation_gamma(profile_, profile_.dur_2q_ns))),
      pd_2q_(phase_damping_channel(dephasing_lambda(profile_, profile_.dur_2q_ns))) {
    profile_.validate();
    for (const auto* ch : channels())
        if (!ch->is_cptp()) throw NumericalError("profile '" + profile_.name + "' yields a non-CPTP channel");
}

std::vector<const KrausChannel*> NoiseModel::channels() const {
    return {&dep_1q_, &dep_2q_, &ad_1q_, &pd_1q_, &ad_2q_, &pd_2q_};
}

void NoiseModel::relax(DensityMatrix& rho, int qubit, const KrausChannel& ad, const KrausChannel& pd) const {
    rho.apply_kraus(ad.ops, {qubit, -1});
    rho.apply_kraus(pd.ops, {qubit, -1});
}

void NoiseModel::apply_gate(DensityMatrix& rho, const GateOp& op, std::span<const double> params) const {
    const ComplexMatrix u = is_parameterized(op.kind) ? gate_matrix(op.kind, op.angle.eval(params))
                                                      : gate_matrix(op.kind);
    rho.apply_unitary(u, op.qubits);
    if (arity(op.kind) == 1) {
        rho.apply_kraus(dep_1q_.ops, op.qubits);
        relax(rho, op.qubits[0], ad_1q_, pd_1q_);
    } else {
        rho.apply_kraus(dep_2q_.ops, op.qubits);
        relax(rho, op.qubits[0], ad_2q_, pd_2q_);
        relax(rho, op.qubits[1], ad_2q_, pd_2q_);
    }
}

void NoiseModel::idle(DensityMatrix& rho, int qubit, double duration_ns) const {
    if (duration_ns < 0.0) throw UsageError("idle duration must be non-negative");
    relax(rho, qubit, amplitude_damping_channel(relaxation_gamma(profile_, duration_ns)),
          phase_damping_channel(dephasing_lambda(profile_, duration_ns)));
}

void apply_gate_noisy(DensityMatrix& rho, const GateOp& op, const NoiseModel& noise, std::span<const double> params) {
    noise.apply_gate(rho, op, params);
}

double measure_z_noisy(const DensityMatrix& rho, int qubit, const DeviceProfile& profile) {
    return (1.0 - 2.0 * profile.meas_err) * rho.expectation_z(qubit);
}

// ---------------------------------------------------------------------------------------

NoisyEvaluator::NoisyEvaluator(const HybridModel& model, const NoiseModel& noise, const RuleRegistry& rules)
    : noise_(noise),
      rules_(rules),
      basis_(rules.basis(noise.profile().basis)),
      scheme_(model.scheme),
      pqc_(bind_params(lower(model.pqc, basis_, rules), model.theta)) {}

std::vector<double> NoisyEvaluator::z(std::span<const double> features) const {
    const Circuit enc = lower(encode(features, scheme_).circuit(), basis_, rules_);
    DensityMatrix rho(scheme_.n_qubits);
    for (const auto& op : enc.ops()) noise_.apply_gate(rho, op);
    for (const auto& op : pqc_.ops()) noise_.apply_gate(rho, op);
    std::vector<double> out(static_cast<std::size_t>(scheme_.n_qubits));
    for (int q = 0; q < scheme_.n_qubits; ++q) out[q] = measure_z_noisy(rho, q, noise_.profile());
    return out;
}

ZBackend NoisyEvaluator::backend() const {
    return [this](const HybridModel&, std::span<const double> features) { return z(features); };
}

std::size_t NoisyEvaluator::gate_count() const {
    return pqc_.ops().size() + lower(encode(std::vector<double>(scheme_.capacity(), 0.5), scheme_).circuit(), basis_, rules_).size();
}

double evaluate_noisy(const HybridModel& model, const Batch& batch, const DeviceProfile& profile, int jobs,
                      const RuleRegistry& rules) {
    const NoiseModel noise(profile);
    const NoisyEvaluator evaluator(model, noise, rules);
    return evaluate(model, batch, jobs, evaluator.backend());
}

}  // namespace qdistill
