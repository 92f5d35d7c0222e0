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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdistill/circuit.hpp"
#include "qdistill/gates.hpp"
#include "qdistill/qmath.hpp"
#include "qdistill/qnn.hpp"

namespace qdistill {

/// Device-average calibration. Durations in nanoseconds, T1/T2 in microseconds; an
/// infinite T1 or T2 disables that relaxation process.
struct DeviceProfile {
    std::string name;
    std::string basis = "IBM";
    double err_1q = 0.0;
    double err_2q = 0.0;
    double t1_us = 0.0;
    double t2_us = 0.0;
    double dur_1q_ns = 0.0;
    double dur_2q_ns = 0.0;
    double meas_err = 0.0;

    /// Throws DataError unless probabilities lie in [0, 1], T2 <= 2 T1 and durations > 0.
    void validate() const;

    static DeviceProfile melbourne();
    static DeviceProfile almaden();
    /// No gate error, no relaxation, no readout error.
    static DeviceProfile noiseless(std::string basis = "IBM");

    bool operator==(const DeviceProfile&) const = default;
};

DeviceProfile profile_from_json(std::string_view text);
std::string profile_to_json(const DeviceProfile& profile);
DeviceProfile load_profile(const std::string& path);

/// Mixed state over n qubits, same qubit ordering as StateVector.
class DensityMatrix {
   public:
    DensityMatrix() = default;
    explicit DensityMatrix(int n_qubits);  // |0...0><0...0|
    static DensityMatrix from_state(const StateVector& psi);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return std::size_t{1} << n_qubits_; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * dim() + c]; }
    std::span<const cplx> data() const { return data_; }

    cplx trace() const;
    double purity() const;
    bool is_hermitian(double tol = 1e-10) const;
    /// 2x2 reduced state of one qubit.
    ComplexMatrix reduced(int qubit) const;
    double expectation_z(int qubit) const;

    /// rho <- M rho M^dagger for a 2x2 or 4x4 M (qubits[0] most significant).
    void apply_unitary(const ComplexMatrix& m, std::array<int, 2> qubits);
    /// rho <- sum_k K_k rho K_k^dagger.
    void apply_kraus(std::span<const ComplexMatrix> ops, std::array<int, 2> qubits);

   private:
    void conjugate_by(std::span<cplx> buf, const ComplexMatrix& m, std::array<int, 2> qubits) const;

    int n_qubits_ = 0;
    std::vector<cplx> data_;  // row-major; viewed as a 2n-qubit vector (row bits high)
};

/// Kraus operators acting on 1 or 2 qubits.
struct KrausChannel {
    std::vector<ComplexMatrix> ops;

    /// || sum K^dagger K - I ||_max <= tol.
    bool is_cptp(double tol = 1e-10) const;
};

/// sqrt(1 - p + p/4^k) I and sqrt(p/4^k) P for each non-identity k-qubit Pauli P.
KrausChannel depolarizing_channel(int n_qubits, double p);
KrausChannel amplitude_damping_channel(double gamma);
/// Scales coherences by (1 - lambda).
KrausChannel phase_damping_channel(double lambda);

/// Damping parameters for an idle/gate of `duration_ns` under the profile's T1/T2.
double relaxation_gamma(const DeviceProfile& p, double duration_ns);
double dephasing_lambda(const DeviceProfile& p, double duration_ns);

/// Channels derived from a profile; construction checks every Kraus set is CPTP.
class NoiseModel {
   public:
    explicit NoiseModel(DeviceProfile profile);

    const DeviceProfile& profile() const { return profile_; }
    const KrausChannel& depolarizing(int arity) const { return arity == 1 ? dep_1q_ : dep_2q_; }
    /// All Kraus sets this model applies, for inspection.
    std::vector<const KrausChannel*> channels() const;

    /// Ideal gate, then depolarizing on its qubits, then amplitude and phase damping per qubit.
    void apply_gate(DensityMatrix& rho, const GateOp& op, std::span<const double> params = {}) const;
    /// Amplitude then phase damping of one qubit for `duration_ns`.
    void idle(DensityMatrix& rho, int qubit, double duration_ns) const;

   private:
    void relax(DensityMatrix& rho, int qubit, const KrausChannel& ad, const KrausChannel& pd) const;

    DeviceProfile profile_;
    KrausChannel dep_1q_, dep_2q_, ad_1q_, pd_1q_, ad_2q_, pd_2q_;
};

void apply_gate_noisy(DensityMatrix& rho, const GateOp& op, const NoiseModel& noise, std::span<const double> params = {});

/// <Z> after symmetric readout flips: (1 - 2 meas_err) <Z>.
double measure_z_noisy(const DensityMatrix& rho, int qubit, const DeviceProfile& profile);

/// Evaluates a model with its encoder and PQC lowered to the profile's basis, noise on
/// every physical gate, expectation values read exactly from the density matrix.
class NoisyEvaluator {
   public:
    NoisyEvaluator(const HybridModel& model, const NoiseModel& noise,
                   const RuleRegistry& rules = RuleRegistry::builtin());

    std::vector<double> z(std::span<const double> features) const;
    ZBackend backend() const;
    /// Physical gates run per sample.
    std::size_t gate_count() const;

   private:
    const NoiseModel& noise_;
    const RuleRegistry& rules_;
    const BasisSet& basis_;
    EncodingScheme scheme_;
    BoundCircuit pqc_;  // lowered to the profile basis
};

double evaluate_noisy(const HybridModel& model, const Batch& batch, const DeviceProfile& profile, int jobs = 1,
                      const RuleRegistry& rules = RuleRegistry::builtin());

}  // namespace qdistill
