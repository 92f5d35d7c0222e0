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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdistill/circuit.hpp"
#include "qdistill/data.hpp"

namespace qdistill {

enum class EncodingMode { ONE_PER_QUBIT, TWO_PER_QUBIT };

/// Angle embedding: per qubit H then RZ(f) (1:1), or H, RZ(f_2i), second_axis(f_2i+1) (2:1).
struct EncodingScheme {
    EncodingMode mode = EncodingMode::ONE_PER_QUBIT;
    int n_qubits = 0;
    GateKind second_axis = GateKind::RY;

    int capacity() const { return mode == EncodingMode::ONE_PER_QUBIT ? n_qubits : 2 * n_qubits; }
    bool operator==(const EncodingScheme&) const = default;
};

std::string_view encoding_mode_name(EncodingMode mode);  // "1:1" or "2:1"
EncodingMode parse_encoding_mode(std::string_view name);

/// Encoder circuit for one feature vector. Features must lie in [-pi, pi] unless
/// `check_range` is false.
BoundCircuit encode(std::span<const double> features, const EncodingScheme& scheme, bool check_range = true);

/// Writes the encoded product state into `amps` (size 2^n) without building a circuit.
void encode_state(std::span<const double> features, const EncodingScheme& scheme, std::span<cplx> amps);

/// Per-feature min-max map onto [-pi, pi], clamped outside the fitted range.
struct Scaler {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t size() const { return min.size(); }
    std::vector<double> apply(std::span<const double> row) const;
    FeatureMatrix apply(const FeatureMatrix& m) const;

    bool operator==(const Scaler&) const = default;
};

/// Fits on `rows` (every row when empty). A constant column maps to 0 and triggers a warning.
Scaler fit_scaler(const FeatureMatrix& features, std::span<const std::size_t> rows = {});

std::string scaler_to_json(const Scaler& scaler);
Scaler scaler_from_json(std::string_view text);

}  // namespace qdistill
