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

#include "qdistill/qmath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qdistill/error.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw UsageError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {
    if (dim == 0) throw UsageError("ComplexMatrix: dim must be >= 1");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    dim_ = rows.size();
    if (dim_ == 0) throw UsageError("ComplexMatrix: dim must be >= 1");
    data_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
        if (row.size() != dim_) throw UsageError("ComplexMatrix: rows must form a square matrix");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

ComplexMatrix ComplexMatrix::operator*(cplx s) const {
    ComplexMatrix out = *this;
    for (auto& x : out.data_) x *= s;
    return out;
}

cplx ComplexMatrix::trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

bool ComplexMatrix::is_unitary(double tol) const {
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < dim_; ++k) s += std::conj((*this)(k, i)) * (*this)(k, j);
            if (i == j) s -= 1.0;
            if (std::abs(s) > tol) return false;
        }
    }
    return true;
}

StateVector::StateVector(std::vector<cplx> amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.empty()) throw UsageError("StateVector: dim must be >= 1");
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
    if (n_qubits < 0 || n_qubits > 30) throw UsageError("StateVector: unsupported qubit count");
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) throw UsageError("StateVector: basis index out of range");
    std::vector<cplx> amps(dim);
    amps[index] = 1.0;
    return StateVector(std::move(amps));
}

int StateVector::n_qubits() const { return std::countr_zero(amps_.size()); }

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_dim(a.dim(), b.dim(), "matmul");
    const std::size_t n = a.dim();
    ComplexMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t max_dim) {
    const std::size_t n = a.dim() * b.dim();
    if (n > max_dim) {
        throw UsageError("kron: result dimension " + std::to_string(n) + " exceeds limit " +
                         std::to_string(max_dim));
    }
    ComplexMatrix out(n);
    const std::size_t m = b.dim();
    for (std::size_t ar = 0; ar < a.dim(); ++ar)
        for (std::size_t ac = 0; ac < a.dim(); ++ac)
            for (std::size_t br = 0; br < m; ++br)
                for (std::size_t bc = 0; bc < m; ++bc) out(ar * m + br, ac * m + bc) = a(ar, ac) * b(br, bc);
    return out;
}

StateVector apply(const ComplexMatrix& m, const StateVector& v) {
    require_same_dim(m.dim(), v.dim(), "apply");
    std::vector<cplx> out(v.dim());
    for (std::size_t r = 0; r < m.dim(); ++r) {
        cplx s = 0.0;
        for (std::size_t c = 0; c < m.dim(); ++c) s += m(r, c) * v[c];
        out[r] = s;
    }
    return StateVector(std::move(out));
}

cplx hs_trace_overlap(const ComplexMatrix& u, const ComplexMatrix& v) {
    require_same_dim(u.dim(), v.dim(), "hs_trace_overlap");
    // Tr(U^dagger V) = sum_ij conj(U_ij) V_ij
    cplx t = 0.0;
    const auto ud = u.data();
    const auto vd = v.data();
    for (std::size_t i = 0; i < ud.size(); ++i) t += std::conj(ud[i]) * vd[i];
    return t;
}

double l1_norm_diff(const ComplexMatrix& u, const ComplexMatrix& v) {
    require_same_dim(u.dim(), v.dim(), "l1_norm_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < u.data().size(); ++i) s += std::abs(u.data()[i] - v.data()[i]);
    return s;
}

double l2_norm_diff(const ComplexMatrix& u, const ComplexMatrix& v) {
    require_same_dim(u.dim(), v.dim(), "l2_norm_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < u.data().size(); ++i) s += std::norm(u.data()[i] - v.data()[i]);
    return std::sqrt(s);
}

double max_abs_diff(const ComplexMatrix& u, const ComplexMatrix& v) {
    require_same_dim(u.dim(), v.dim(), "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < u.data().size(); ++i) m = std::max(m, std::abs(u.data()[i] - v.data()[i]));
    return m;
}

cplx inner(const StateVector& a, const StateVector& b) {
    require_same_dim(a.dim(), b.dim(), "inner");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::min(1.0, std::norm(inner(a, b)));
}

ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
    ComplexMatrix g(dim);
    for (auto& x : g.data()) x = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
    // Modified Gram-Schmidt on columns, phases fixed by the diagonal of R.
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            cplx proj = 0.0;
            for (std::size_t r = 0; r < dim; ++r) proj += std::conj(g(r, p)) * g(r, c);
            for (std::size_t r = 0; r < dim; ++r) g(r, c) -= proj * g(r, p);
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < dim; ++r) nrm += std::norm(g(r, c));
        nrm = std::sqrt(nrm);
        for (std::size_t r = 0; r < dim; ++r) g(r, c) /= nrm;
    }
    return g;
}

}  // namespace qdistill
