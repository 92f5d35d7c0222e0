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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qdistill {

using cplx = std::complex<double>;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr std::size_t kDefaultMaxDim = std::size_t{1} << 12;

// Qubit ordering used throughout: qubit 0 is the least-significant bit of a basis-state
// index, so a full operator is kron(op_on_q{n-1}, ..., op_on_q0).

/// Dense square complex matrix, row-major.
class ComplexMatrix {
   public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t dim);
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static ComplexMatrix identity(std::size_t dim);

    std::size_t dim() const { return dim_; }
    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }
    std::span<const cplx> data() const { return data_; }
    std::span<cplx> data() { return data_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix operator*(cplx s) const;
    cplx trace() const;

    /// ||M^dagger M - I||_max <= tol.
    bool is_unitary(double tol = kUnitaryTol) const;

   private:
    std::size_t dim_ = 0;
    std::vector<cplx> data_;
};

/// Pure state over 2^n amplitudes.
class StateVector {
   public:
    StateVector() = default;
    explicit StateVector(std::vector<cplx> amplitudes);

    /// Computational basis state |index> on n qubits.
    static StateVector basis(int n_qubits, std::size_t index = 0);

    std::size_t dim() const { return amps_.size(); }
    int n_qubits() const;
    cplx& operator[](std::size_t i) { return amps_[i]; }
    const cplx& operator[](std::size_t i) const { return amps_[i]; }
    std::span<const cplx> amplitudes() const { return amps_; }
    std::span<cplx> amplitudes() { return amps_; }

    double norm_squared() const;

   private:
    std::vector<cplx> amps_;
};

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t max_dim = kDefaultMaxDim);
StateVector apply(const ComplexMatrix& m, const StateVector& v);

/// Tr(U^dagger V).
cplx hs_trace_overlap(const ComplexMatrix& u, const ComplexMatrix& v);

double l1_norm_diff(const ComplexMatrix& u, const ComplexMatrix& v);
double l2_norm_diff(const ComplexMatrix& u, const ComplexMatrix& v);
double max_abs_diff(const ComplexMatrix& u, const ComplexMatrix& v);

cplx inner(const StateVector& a, const StateVector& b);

/// |<a|b>|^2.
double fidelity(const StateVector& a, const StateVector& b);

/// Haar-distributed unitary (QR of a complex Ginibre matrix); test and benchmark helper.
class Rng;
ComplexMatrix random_unitary(std::size_t dim, Rng& rng);

}  // namespace qdistill
