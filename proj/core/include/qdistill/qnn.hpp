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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdistill/circuit.hpp"
#include "qdistill/data.hpp"
#include "qdistill/encoding.hpp"

namespace qdistill {

inline constexpr int kNumClasses = 3;
inline constexpr double kProbabilityFloor = 1e-12;

/// Encoder -> PQC -> per-qubit <Z> -> dense layer (W z + b) -> softmax.
struct HybridModel {
    EncodingScheme scheme;
    std::string template_id;
    int layers = 0;
    Circuit pqc;
    std::vector<double> theta;
    std::vector<double> W;  // kNumClasses x n_qubits, row-major
    std::array<double, kNumClasses> b{};
    Scaler scaler;
    std::uint64_t seed = 0;

    int n_qubits() const { return scheme.n_qubits; }
    /// Throws UsageError if sizes disagree.
    void validate() const;

    bool operator==(const HybridModel&) const = default;
};

/// Fresh model: theta ~ U(-pi, pi), W and b ~ U(-0.1, 0.1), all from `seed`.
HybridModel make_model(const EncodingScheme& scheme, std::string template_id, int layers, std::uint64_t seed,
                       const TemplateRegistry& templates = TemplateRegistry::builtin());

struct ForwardResult {
    std::array<double, kNumClasses> probs{};
    std::array<double, kNumClasses> logits{};
    std::vector<double> z;
};

/// Ideal-backend <Z> of every qubit after encoder and PQC, for scaled features.
std::vector<double> ideal_z(const HybridModel& model, std::span<const double> features);

/// Dense head and softmax applied to given <Z> values.
ForwardResult head(const HybridModel& model, std::vector<double> z);

ForwardResult forward(const HybridModel& model, std::span<const double> features);

/// Scaled samples with labels in 0..kNumClasses-1.
struct Batch {
    FeatureMatrix x;
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
};

/// Rows of `ds` selected by `rows`, passed through `scaler`.
Batch make_batch(const Dataset& ds, std::span<const std::size_t> rows, const Scaler& scaler);

/// Mean categorical cross-entropy with probabilities floored at kProbabilityFloor.
double loss(const HybridModel& model, const Batch& batch, int jobs = 1);

struct Gradients {
    std::vector<double> theta;
    std::vector<double> W;
    std::array<double, kNumClasses> b{};
    double loss = 0.0;
};

/// Exact gradients of the mean loss: closed form for W and b, parameter shift for theta
/// (two-term for RX/RY/RZ, four-term for CRX/CRY/CRZ, per occurrence times its coefficient).
Gradients gradients(const HybridModel& model, const Batch& batch, int jobs = 1);

/// d<Z_q>/d(theta) for one sample by parameter shift; row q holds qubit q.
std::vector<std::vector<double>> z_jacobian(const HybridModel& model, std::span<const double> features);

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 0.2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    int batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;

    bool operator==(const EpochMetrics&) const = default;
};

struct History {
    EpochMetrics initial;  // before the first update
    std::vector<EpochMetrics> epochs;

    bool operator==(const History&) const = default;
};

/// Adam over (theta, W, b). Minibatches are reshuffled each epoch from config.seed.
History train(HybridModel& model, const Batch& train_set, const Batch& val_set, const TrainConfig& config);

/// Produces <Z> for scaled features; the ideal simulator when empty.
using ZBackend = std::function<std::vector<double>(const HybridModel&, std::span<const double>)>;

/// Fraction of argmax-correct predictions.
double evaluate(const HybridModel& model, const Batch& batch, int jobs = 1, const ZBackend& backend = {});

/// Serializable model plus training record.
struct Checkpoint {
    HybridModel model;
    History history;
    std::string data;  // dataset name or path
    std::uint64_t data_seed = 0;
    bool fine_tuned = false;
    std::string parent;  // checkpoint this one was derived from
    std::string provenance;

    bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(std::string_view text);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qdistill
