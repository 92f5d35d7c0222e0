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

#include "qdistill/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json_io.hpp"
#include "qdistill/error.hpp"
#include "qdistill/log.hpp"

namespace qdistill {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRangeSlack = 1e-12;

void check_features(std::span<const double> f, const EncodingScheme& s, bool check_range) {
    if (s.n_qubits < 1) throw UsageError("encode: scheme has no qubits");
    if (s.mode == EncodingMode::TWO_PER_QUBIT && s.second_axis != GateKind::RX && s.second_axis != GateKind::RY &&
        s.second_axis != GateKind::RZ) {
        throw UsageError("encode: second axis must be RX, RY or RZ");
    }
    if (static_cast<int>(f.size()) != s.capacity()) {
        throw UsageError("encode: expected " + std::to_string(s.capacity()) + " features, got " +
                         std::to_string(f.size()));
    }
    for (double x : f) {
        if (!std::isfinite(x)) throw UsageError("encode: non-finite feature");
        if (check_range && std::abs(x) > kPi + kRangeSlack) {
            throw UsageError("encode: feature " + std::to_string(x) + " outside [-pi, pi]");
        }
    }
}

}  // namespace

std::string_view encoding_mode_name(EncodingMode mode) { return mode == EncodingMode::ONE_PER_QUBIT ? "1:1" : "2:1"; }

EncodingMode parse_encoding_mode(std::string_view name) {
    if (name == "1:1" || name == "1") return EncodingMode::ONE_PER_QUBIT;
    if (name == "2:1" || name == "2") return EncodingMode::TWO_PER_QUBIT;
    throw UsageError("unknown encoding mode '" + std::string(name) + "' (expected 1:1 or 2:1)");
}

BoundCircuit encode(std::span<const double> features, const EncodingScheme& scheme, bool check_range) {
    check_features(features, scheme, check_range);
    Circuit c(scheme.n_qubits);
    for (int q = 0; q < scheme.n_qubits; ++q) {
        c.add(GateKind::H, {q});
        if (scheme.mode == EncodingMode::ONE_PER_QUBIT) {
            c.add(GateKind::RZ, {q}, Angle::literal(features[static_cast<std::size_t>(q)]));
        } else {
            c.add(GateKind::RZ, {q}, Angle::literal(features[static_cast<std::size_t>(2 * q)]));
            c.add(scheme.second_axis, {q}, Angle::literal(features[static_cast<std::size_t>(2 * q + 1)]));
        }
    }
    return BoundCircuit(std::move(c));
}

void encode_state(std::span<const double> features, const EncodingScheme& scheme, std::span<cplx> amps) {
    check_features(features, scheme, true);
    if (amps.size() != (std::size_t{1} << scheme.n_qubits)) throw UsageError("encode_state: wrong state size");
    // Product of per-qubit states; qubit q's factor picks amplitude by bit q.
    std::vector<std::array<cplx, 2>> local(static_cast<std::size_t>(scheme.n_qubits));
    const double h = 1.0 / std::sqrt(2.0);
    for (int q = 0; q < scheme.n_qubits; ++q) {
        std::array<cplx, 2> v{h, h};
        auto rot = [&v](const ComplexMatrix& m) {
            v = {m(0, 0) * v[0] + m(0, 1) * v[1], m(1, 0) * v[0] + m(1, 1) * v[1]};
        };
        if (scheme.mode == EncodingMode::ONE_PER_QUBIT) {
            rot(gate_matrix(GateKind::RZ, features[static_cast<std::size_t>(q)]));
        } else {
            rot(gate_matrix(GateKind::RZ, features[static_cast<std::size_t>(2 * q)]));
            rot(gate_matrix(scheme.second_axis, features[static_cast<std::size_t>(2 * q + 1)]));
        }
        local[static_cast<std::size_t>(q)] = v;
    }
    for (std::size_t i = 0; i < amps.size(); ++i) {
        cplx a = 1.0;
        for (int q = 0; q < scheme.n_qubits; ++q) a *= local[static_cast<std::size_t>(q)][(i >> q) & 1u];
        amps[i] = a;
    }
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
    if (row.size() != min.size()) {
        throw UsageError("scaler: expected " + std::to_string(min.size()) + " features, got " +
                         std::to_string(row.size()));
    }
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double span = max[j] - min[j];
        if (span <= 0.0) {
            out[j] = 0.0;
            continue;
        }
        const double x = std::clamp(row[j], min[j], max[j]);
        out[j] = x == min[j] ? -kPi : x == max[j] ? kPi : -kPi + 2.0 * kPi * (x - min[j]) / span;
    }
    return out;
}

FeatureMatrix Scaler::apply(const FeatureMatrix& m) const {
    FeatureMatrix out;
    out.reserve(m.size());
    for (const auto& row : m) out.push_back(apply(row));
    return out;
}

Scaler fit_scaler(const FeatureMatrix& features, std::span<const std::size_t> rows) {
    std::vector<std::size_t> all;
    if (rows.empty()) {
        all.resize(features.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        rows = all;
    }
    if (rows.empty()) throw DataError("fit_scaler: no rows");
    const std::size_t f = features[rows[0]].size();
    Scaler s{std::vector<double>(f, INFINITY), std::vector<double>(f, -INFINITY)};
    for (std::size_t r : rows) {
        if (r >= features.size() || features[r].size() != f) throw DataError("fit_scaler: ragged or bad row index");
        for (std::size_t j = 0; j < f; ++j) {
            s.min[j] = std::min(s.min[j], features[r][j]);
            s.max[j] = std::max(s.max[j], features[r][j]);
        }
    }
    for (std::size_t j = 0; j < f; ++j) {
        if (s.min[j] == s.max[j]) warn("scaler: feature " + std::to_string(j) + " is constant; it will map to 0");
    }
    return s;
}

std::string scaler_to_json(const Scaler& scaler) { return detail::scaler_json(scaler).dump(2); }

Scaler scaler_from_json(std::string_view text) { return detail::scaler_from_json(detail::parse_json(text)); }

}  // namespace qdistill
