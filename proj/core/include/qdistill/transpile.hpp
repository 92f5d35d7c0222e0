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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qdistill/circuit.hpp"
#include "qdistill/gates.hpp"

namespace qdistill {

/// Depth and gate counts of a circuit as compiled for one basis.
struct CompileReport {
    std::string basis;
    int depth = 0;
    int total_gates = 0;
    int gates_1q = 0;
    int gates_2q = 0;

    bool operator==(const CompileReport&) const = default;
};

/// Rewrites every op into gates of `basis`. Symbolic slots stay symbolic (affine angles).
Circuit lower(const Circuit& circuit, const BasisSet& basis, const RuleRegistry& rules = RuleRegistry::builtin());
Circuit lower(const Circuit& circuit, std::string_view basis_id, const RuleRegistry& rules = RuleRegistry::builtin());

/// Greedy ASAP depth (a gate lands in the first moment after its operands are free) and counts.
CompileReport metrics(const Circuit& circuit, std::string_view basis_id = {});

/// Resynthesizes each maximal single-qubit run of a bound, lowered circuit into the
/// shortest Euler form of the basis (ZSX for bases with SX and RZ, ZXZ for RX and RZ).
/// Rotations equal to the identity up to phase are dropped.
BoundCircuit merge_rotations(const BoundCircuit& circuit, const BasisSet& basis);

struct OverheadOptions {
    bool merge_rotations = false;
    /// Seed of the generic binding used when merging (fusion needs literal angles).
    std::uint64_t seed = 0;
};

struct OverheadRow {
    std::string template_id;
    CompileReport report;
};

/// One row per (template, basis) for single-layer builds on n_qubits.
std::vector<OverheadRow> overhead_table(const std::vector<std::string>& template_ids,
                                        const std::vector<std::string>& basis_ids, int n_qubits,
                                        const OverheadOptions& options = {},
                                        const TemplateRegistry& templates = TemplateRegistry::builtin(),
                                        const RuleRegistry& rules = RuleRegistry::builtin());

/// CSV with a leading "# provenance" comment line and header template,basis,depth,total,g1q,g2q.
std::string overhead_csv(const std::vector<OverheadRow>& rows, std::string_view provenance);

}  // namespace qdistill
