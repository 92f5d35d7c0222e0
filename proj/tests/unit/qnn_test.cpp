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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "qdistill/error.hpp"
#include "qdistill/qnn.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {
namespace {

constexpr double kPi = std::numbers::pi;

Batch iris_batch(const HybridModel& m, std::size_t n, std::uint64_t seed) {
    const auto ds = load_iris(seed);
    std::vector<std::size_t> rows(ds.train.begin(), ds.train.begin() + static_cast<long>(n));
    // Spread the picks across classes.
    for (std::size_t i = 0; i < n; ++i) rows[i] = ds.train[(i * 37 + seed) % ds.train.size()];
    return make_batch(ds, rows, m.scaler);
}

HybridModel iris_model(const std::string& tmpl, int layers, std::uint64_t seed) {
    auto m = make_model({EncodingMode::ONE_PER_QUBIT, 4}, tmpl, layers, seed);
    const auto ds = load_iris(seed);
    m.scaler = fit_scaler(ds.features, ds.train);
    return m;
}

// Central finite differences of the mean loss over every trainable parameter.
Gradients numeric_gradients(HybridModel m, const Batch& batch, double eps = 1e-5) {
    Gradients g;
    const auto diff = [&](double& x) {
        const double keep = x;
        x = keep + eps;
        const double up = loss(m, batch);
        x = keep - eps;
        const double down = loss(m, batch);
        x = keep;
        return (up - down) / (2 * eps);
    };
    for (auto& t : m.theta) g.theta.push_back(diff(t));
    for (auto& w : m.W) g.W.push_back(diff(w));
    for (std::size_t k = 0; k < kNumClasses; ++k) g.b[k] = diff(m.b[k]);
    return g;
}

double max_abs(const Gradients& a, const Gradients& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.theta.size(); ++i) m = std::max(m, std::abs(a.theta[i] - b.theta[i]));
    for (std::size_t i = 0; i < a.W.size(); ++i) m = std::max(m, std::abs(a.W[i] - b.W[i]));
    for (std::size_t k = 0; k < kNumClasses; ++k) m = std::max(m, std::abs(a.b[k] - b.b[k]));
    return m;
}

TEST(QnnTest, UniformSoftmaxForTrivialModel) {
    HybridModel m;
    m.scheme = {EncodingMode::ONE_PER_QUBIT, 2};
    m.pqc = Circuit(2);
    m.W.assign(kNumClasses * 2, 0.0);
    const auto r = forward(m, std::vector<double>{0.0, 0.0});
    for (double p : r.probs) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(QnnTest, DominantBiasWins) {
    HybridModel m;
    m.scheme = {EncodingMode::ONE_PER_QUBIT, 2};
    m.pqc = Circuit(2);
    m.W.assign(kNumClasses * 2, 0.0);
    m.b = {10.0, 0.0, 0.0};
    EXPECT_GT(forward(m, std::vector<double>{0.5, -0.5}).probs[0], 0.9999);
}

TEST(QnnTest, ProbabilitiesSumToOne) {
    const auto m = iris_model("c6", 2, 3);
    const auto batch = iris_batch(m, 20, 3);
    for (const auto& x : batch.x) {
        const auto r = forward(m, x);
        EXPECT_NEAR(r.probs[0] + r.probs[1] + r.probs[2], 1.0, 1e-9);
    }
    EXPECT_THROW(forward(m, std::vector<double>{0.1}), UsageError);
}

TEST(QnnTest, LossExamples) {
    HybridModel m;
    m.scheme = {EncodingMode::ONE_PER_QUBIT, 1};
    m.pqc = Circuit(1);
    m.W.assign(kNumClasses, 0.0);
    Batch uniform{{{0.3}}, {2}};
    EXPECT_NEAR(loss(m, uniform), std::log(3.0), 1e-12);

    m.b = {0.0, 800.0, 0.0};
    EXPECT_NEAR(loss(m, Batch{{{0.3}}, {1}}), 0.0, 1e-12);
    // A vanishing probability is floored rather than producing infinity.
    EXPECT_NEAR(loss(m, Batch{{{0.3}}, {0}}), -std::log(kProbabilityFloor), 1e-9);

    m.b = {0.4, -0.2, 0.1};
    const Batch a{{{0.3}}, {0}}, b{{{-1.0}}, {2}}, ab{{{0.3}, {-1.0}}, {0, 2}};
    EXPECT_NEAR(loss(m, ab), 0.5 * (loss(m, a) + loss(m, b)), 1e-15);
}

TEST(QnnTest, ZeroHeadGivesZeroThetaGradient) {
    auto m = iris_model("c15", 2, 1);
    std::fill(m.W.begin(), m.W.end(), 0.0);
    const auto g = gradients(m, iris_batch(m, 6, 1));
    for (double t : g.theta) EXPECT_EQ(t, 0.0);
}

TEST(QnnTest, BiasGradientForUniformProbs) {
    HybridModel m;
    m.scheme = {EncodingMode::ONE_PER_QUBIT, 1};
    m.pqc = Circuit(1);
    m.W.assign(kNumClasses, 0.0);
    const Batch batch{{{0.1}, {0.2}}, {0, 2}};
    const auto g = gradients(m, batch);
    // mean over samples of (p - y): ((1/3-1) + 1/3) / 2, 1/3, (1/3 + 1/3-1) / 2
    EXPECT_NEAR(g.b[0], (1.0 / 3 - 1 + 1.0 / 3) / 2, 1e-15);
    EXPECT_NEAR(g.b[1], 1.0 / 3, 1e-15);
    EXPECT_NEAR(g.b[2], (1.0 / 3 + 1.0 / 3 - 1) / 2, 1e-15);
}

TEST(QnnTest, GradientsMatchFiniteDifferencesForC2) {
    const auto m = iris_model("c2", 1, 0);
    const auto batch = iris_batch(m, 4, 0);
    EXPECT_LE(max_abs(gradients(m, batch), numeric_gradients(m, batch)), 1e-5);
}

TEST(QnnTest, GradientsMatchFiniteDifferencesForEveryTemplate) {
    for (const auto& id : TemplateRegistry::builtin().ids())
        for (int layers : {1, 2}) {
            const auto m = iris_model(id, layers, static_cast<std::uint64_t>(layers) + 17);
            const auto batch = iris_batch(m, 3, 2);
            EXPECT_LE(max_abs(gradients(m, batch), numeric_gradients(m, batch)), 1e-5) << id << " " << layers;
        }
}

TEST(QnnTest, GradientsMatchFiniteDifferencesWithTwoToOneEncoding) {
    auto m = make_model({EncodingMode::TWO_PER_QUBIT, 2}, "c6", 1, 4);
    const Batch batch{{{0.1, -0.3, 2.0, 1.2}, {-2.5, 0.7, 0.0, 3.0}}, {1, 2}};
    EXPECT_LE(max_abs(gradients(m, batch), numeric_gradients(m, batch)), 1e-5);
}

TEST(QnnTest, GradientsIndependentOfJobs) {
    const auto m = iris_model("c6", 1, 5);
    const auto batch = iris_batch(m, 12, 5);
    const auto a = gradients(m, batch, 1), b = gradients(m, batch, 4);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.W, b.W);
    EXPECT_EQ(a.loss, b.loss);
}

TEST(QnnTest, JacobianMatchesFiniteDifferences) {
    const auto m = iris_model("c12", 1, 6);
    const auto x = iris_batch(m, 1, 6).x[0];
    const auto jac = z_jacobian(m, x);
    auto shifted = m;
    for (std::size_t k = 0; k < m.theta.size(); ++k) {
        shifted.theta[k] = m.theta[k] + 1e-6;
        const auto up = ideal_z(shifted, x);
        shifted.theta[k] = m.theta[k] - 1e-6;
        const auto down = ideal_z(shifted, x);
        shifted.theta[k] = m.theta[k];
        for (std::size_t q = 0; q < up.size(); ++q) EXPECT_NEAR(jac[q][k], (up[q] - down[q]) / 2e-6, 1e-7);
    }
}

TEST(QnnTest, TrainingReducesLossOnSeparableBlobs) {
    Rng rng(3);
    Batch train_set;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2 ? 2 : 0;
        const double c = label ? 1.5 : -1.5;
        train_set.x.push_back({c + rng.uniform(-0.4, 0.4), c + rng.uniform(-0.4, 0.4), 0.0, 0.0});
        train_set.y.push_back(label);
    }
    auto m = make_model({EncodingMode::ONE_PER_QUBIT, 4}, "c2", 1, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    const auto h = train(m, train_set, train_set, cfg);
    EXPECT_LT(h.epochs[0].train_loss, h.initial.train_loss);
}

TEST(QnnTest, IrisTeacherReachesFloor) {
    double best = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto m = iris_model("c6", 2, seed);
        const auto ds = load_iris(seed);
        TrainConfig cfg;
        cfg.seed = seed;
        const auto h = train(m, make_batch(ds, ds.train, m.scaler), make_batch(ds, ds.val, m.scaler), cfg);
        ASSERT_EQ(h.epochs.size(), 10u);
        best = std::max(best, h.epochs.back().train_accuracy);
    }
    EXPECT_GE(best, 0.85);
}

TEST(QnnTest, ZeroLearningRateLeavesParametersUnchanged) {
    auto m = iris_model("c15", 2, 8);
    const auto before = m;
    const auto batch = iris_batch(m, 10, 8);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.learning_rate = 0.0;
    train(m, batch, batch, cfg);
    EXPECT_EQ(m, before);
}

TEST(QnnTest, ConfigValidation) {
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg = {};
    cfg.learning_rate = -0.1;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg = {};
    cfg.beta1 = 1.0;
    EXPECT_THROW(cfg.validate(), UsageError);
    auto m = iris_model("c2", 1, 0);
    EXPECT_THROW(train(m, Batch{}, Batch{}, TrainConfig{}), UsageError);
}

TEST(QnnTest, TrainingIsDeterministic) {
    const auto ds = load_iris(1);
    History h[2];
    HybridModel models[2];
    for (int r = 0; r < 2; ++r) {
        models[r] = iris_model("c15", 2, 1);
        TrainConfig cfg;
        cfg.epochs = 3;
        cfg.batch_size = 16;
        cfg.seed = 9;
        cfg.jobs = r + 1;
        h[r] = train(models[r], make_batch(ds, ds.train, models[r].scaler), make_batch(ds, ds.val, models[r].scaler), cfg);
    }
    EXPECT_EQ(h[0], h[1]);
    EXPECT_EQ(models[0], models[1]);
}

TEST(QnnTest, InitialMetricsEqualStartingModel) {
    auto m = iris_model("c2", 3, 2);
    const auto ds = load_iris(2);
    const auto tr = make_batch(ds, ds.train, m.scaler), va = make_batch(ds, ds.val, m.scaler);
    const double acc = evaluate(m, tr), val = evaluate(m, va), l = loss(m, tr);
    TrainConfig cfg;
    cfg.epochs = 2;
    const auto h = train(m, tr, va, cfg);
    EXPECT_EQ(h.initial.train_accuracy, acc);
    EXPECT_EQ(h.initial.val_accuracy, val);
    EXPECT_EQ(h.initial.train_loss, l);
}

TEST(QnnTest, EvaluateExamples) {
    HybridModel m;
    m.scheme = {EncodingMode::ONE_PER_QUBIT, 1};
    m.pqc = Circuit(1);
    m.W.assign(kNumClasses, 0.0);
    m.b = {0.0, 5.0, 0.0};
    const Batch all_one{{{0.1}, {0.2}}, {1, 1}};
    EXPECT_EQ(evaluate(m, all_one), 1.0);
    const Batch mixed{{{0.1}, {0.2}, {0.3}}, {0, 1, 2}};
    EXPECT_NEAR(evaluate(m, mixed), 1.0 / 3.0, 1e-15);
    const auto big = iris_model("c6", 1, 1);
    const auto batch = iris_batch(big, 30, 1);
    EXPECT_EQ(evaluate(big, batch), evaluate(big, batch, 3));
    const ZBackend flat = [](const HybridModel& mm, std::span<const double>) {
        return std::vector<double>(static_cast<std::size_t>(mm.n_qubits()), 0.0);
    };
    EXPECT_EQ(evaluate(m, all_one, 1, flat), 1.0);
}

TEST(QnnTest, CheckpointRoundTrip) {
    Checkpoint c;
    c.model = iris_model("c12", 2, 4);
    c.history.initial = {0, 1.1, 0.3, 1.2, 0.25};
    c.history.epochs.push_back({1, 0.9, 0.5, 1.0, 0.4});
    c.data = "iris";
    c.data_seed = 4;
    c.parent = "teacher.json";
    c.provenance = "unit";
    EXPECT_EQ(checkpoint_from_json(checkpoint_to_json(c)), c);
    const auto path = (std::filesystem::temp_directory_path() / "qdistill_ckpt_test.json").string();
    save_checkpoint(c, path);
    EXPECT_EQ(load_checkpoint(path), c);
    std::filesystem::remove(path);
    EXPECT_THROW(checkpoint_from_json("{\"format\": \"other\"}"), DataError);
    EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), DataError);
}

TEST(QnnTest, ModelValidation) {
    auto m = iris_model("c2", 1, 0);
    m.theta.pop_back();
    EXPECT_THROW(m.validate(), UsageError);
    EXPECT_THROW(make_model({EncodingMode::ONE_PER_QUBIT, 4}, "nope", 1, 0), UsageError);
    EXPECT_THROW(make_model({EncodingMode::ONE_PER_QUBIT, 4}, "c2", 0, 0), UsageError);
    (void)kPi;
}

}  // namespace
}  // namespace qdistill
