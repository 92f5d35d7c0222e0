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

#include "qdistill/qnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json_io.hpp"
#include "qdistill/error.hpp"
#include "qdistill/parallel.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

namespace {

constexpr double kPi = std::numbers::pi;
// Four-term rule for controlled rotations, whose generator has eigenvalues {0, +-1/2}.
const double kD1 = (std::numbers::sqrt2 + 1.0) / (4.0 * std::numbers::sqrt2);
const double kD2 = (std::numbers::sqrt2 - 1.0) / (4.0 * std::numbers::sqrt2);
constexpr double kAlpha = kPi / 2;
constexpr double kBeta = 3 * kPi / 2;

std::vector<cplx> encoded(const HybridModel& m, std::span<const double> features) {
    std::vector<cplx> amps(std::size_t{1} << m.n_qubits());
    encode_state(features, m.scheme, amps);
    return amps;
}

// <Z> per qubit after running the PQC on `input`, with op `shifted` moved by `shift` radians.
std::vector<double> pqc_z(const HybridModel& m, std::span<const cplx> input, std::ptrdiff_t shifted = -1,
                          double shift = 0.0) {
    std::vector<cplx> amps(input.begin(), input.end());
    const auto& ops = m.pqc.ops();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const auto& op = ops[k];
        if (!is_parameterized(op.kind)) {
            apply_matrix(amps, gate_matrix(op.kind), op.qubits);
            continue;
        }
        double a = op.angle.eval(m.theta);
        if (static_cast<std::ptrdiff_t>(k) == shifted) a += shift;
        apply_matrix(amps, gate_matrix(op.kind, a), op.qubits);
    }
    return z_expectations(amps, m.n_qubits());
}

std::vector<std::vector<double>> jacobian_from_state(const HybridModel& m, std::span<const cplx> input) {
    const auto nq = static_cast<std::size_t>(m.n_qubits());
    std::vector<std::vector<double>> jac(nq, std::vector<double>(m.theta.size(), 0.0));
    const auto& ops = m.pqc.ops();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const auto& op = ops[k];
        if (!op.angle.is_symbolic() || op.angle.coef == 0.0) continue;
        const auto kk = static_cast<std::ptrdiff_t>(k);
        std::vector<double> d(nq);
        if (is_controlled_rotation(op.kind)) {
            const auto pa = pqc_z(m, input, kk, kAlpha), ma = pqc_z(m, input, kk, -kAlpha);
            const auto pb = pqc_z(m, input, kk, kBeta), mb = pqc_z(m, input, kk, -kBeta);
            for (std::size_t q = 0; q < nq; ++q) d[q] = kD1 * (pa[q] - ma[q]) - kD2 * (pb[q] - mb[q]);
        } else {
            const auto p = pqc_z(m, input, kk, kPi / 2), n = pqc_z(m, input, kk, -kPi / 2);
            for (std::size_t q = 0; q < nq; ++q) d[q] = 0.5 * (p[q] - n[q]);
        }
        const auto slot = static_cast<std::size_t>(op.angle.slot);
        for (std::size_t q = 0; q < nq; ++q) jac[q][slot] += op.angle.coef * d[q];
    }
    return jac;
}

int argmax(const std::array<double, kNumClasses>& p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

void check_label(int y) {
    if (y < 0 || y >= kNumClasses) throw UsageError("label " + std::to_string(y) + " outside 0..2");
}

EpochMetrics measure(const HybridModel& m, const Batch& tr, const Batch& va, int epoch, int jobs) {
    EpochMetrics e;
    e.epoch = epoch;
    auto both = [&](const Batch& b, double& l, double& acc) {
        if (b.size() == 0) return;
        std::vector<ForwardResult> out(b.size());
        parallel_for(b.size(), jobs, [&](std::size_t i) { out[i] = forward(m, b.x[i]); });
        double sum = 0.0;
        int correct = 0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            sum += -std::log(std::max(out[i].probs[static_cast<std::size_t>(b.y[i])], kProbabilityFloor));
            correct += argmax(out[i].probs) == b.y[i];
        }
        l = sum / static_cast<double>(b.size());
        acc = static_cast<double>(correct) / static_cast<double>(b.size());
    };
    both(tr, e.train_loss, e.train_accuracy);
    both(va, e.val_loss, e.val_accuracy);
    return e;
}

detail::json metrics_json(const EpochMetrics& e) {
    return {{"epoch", e.epoch},
            {"train_loss", e.train_loss},
            {"train_accuracy", e.train_accuracy},
            {"val_loss", e.val_loss},
            {"val_accuracy", e.val_accuracy}};
}

EpochMetrics metrics_from_json(const detail::json& j) {
    using detail::get_field;
    return {get_field<int>(j, "epoch"), get_field<double>(j, "train_loss"), get_field<double>(j, "train_accuracy"),
            get_field<double>(j, "val_loss"), get_field<double>(j, "val_accuracy")};
}

}  // namespace

void HybridModel::validate() const {
    if (scheme.n_qubits < 1) throw UsageError("model: no qubits");
    if (pqc.n_qubits() != scheme.n_qubits) throw UsageError("model: PQC and encoder qubit counts differ");
    if (theta.size() != static_cast<std::size_t>(pqc.n_params())) throw UsageError("model: theta length != n_params");
    if (W.size() != static_cast<std::size_t>(kNumClasses * scheme.n_qubits)) throw UsageError("model: W shape");
    if (scaler.size() != 0 && scaler.size() != static_cast<std::size_t>(scheme.capacity())) {
        throw UsageError("model: scaler width != encoding capacity");
    }
}

HybridModel make_model(const EncodingScheme& scheme, std::string template_id, int layers, std::uint64_t seed,
                       const TemplateRegistry& templates) {
    HybridModel m;
    m.scheme = scheme;
    m.pqc = templates.build(template_id, scheme.n_qubits, layers);
    m.template_id = std::move(template_id);
    m.layers = layers;
    m.seed = seed;
    Rng rng(seed);
    m.theta.resize(static_cast<std::size_t>(m.pqc.n_params()));
    for (auto& t : m.theta) t = rng.uniform(-kPi, kPi);
    m.W.resize(static_cast<std::size_t>(kNumClasses * scheme.n_qubits));
    for (auto& w : m.W) w = rng.uniform(-0.1, 0.1);
    for (auto& x : m.b) x = rng.uniform(-0.1, 0.1);
    return m;
}

std::vector<double> ideal_z(const HybridModel& model, std::span<const double> features) {
    return pqc_z(model, encoded(model, features));
}

ForwardResult head(const HybridModel& model, std::vector<double> z) {
    const auto n = static_cast<std::size_t>(model.n_qubits());
    if (z.size() != n) throw UsageError("head: z length != n_qubits");
    ForwardResult r;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        double s = model.b[c];
        for (std::size_t q = 0; q < n; ++q) s += model.W[c * n + q] * z[q];
        r.logits[c] = s;
    }
    const double mx = *std::max_element(r.logits.begin(), r.logits.end());
    double total = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) total += r.probs[c] = std::exp(r.logits[c] - mx);
    for (auto& p : r.probs) p /= total;
    r.z = std::move(z);
    return r;
}

ForwardResult forward(const HybridModel& model, std::span<const double> features) {
    return head(model, ideal_z(model, features));
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> rows, const Scaler& scaler) {
    Batch b;
    b.x.reserve(rows.size());
    for (std::size_t r : rows) {
        b.x.push_back(scaler.apply(ds.features.at(r)));
        b.y.push_back(ds.labels.at(r));
    }
    return b;
}

double loss(const HybridModel& model, const Batch& batch, int jobs) {
    if (batch.size() == 0) throw UsageError("loss: empty batch");
    std::vector<double> per(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
        check_label(batch.y[i]);
        const auto r = forward(model, batch.x[i]);
        per[i] = -std::log(std::max(r.probs[static_cast<std::size_t>(batch.y[i])], kProbabilityFloor));
    });
    return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(batch.size());
}

std::vector<std::vector<double>> z_jacobian(const HybridModel& model, std::span<const double> features) {
    return jacobian_from_state(model, encoded(model, features));
}

Gradients gradients(const HybridModel& model, const Batch& batch, int jobs) {
    model.validate();
    if (batch.size() == 0) throw UsageError("gradients: empty batch");
    const auto n = static_cast<std::size_t>(model.n_qubits());
    std::vector<Gradients> per(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
        check_label(batch.y[i]);
        const auto state = encoded(model, batch.x[i]);
        const auto r = head(model, pqc_z(model, state));
        Gradients& g = per[i];
        g.loss = -std::log(std::max(r.probs[static_cast<std::size_t>(batch.y[i])], kProbabilityFloor));
        std::array<double, kNumClasses> dlogit{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            dlogit[c] = r.probs[c] - (static_cast<int>(c) == batch.y[i] ? 1.0 : 0.0);
        }
        g.W.assign(kNumClasses * n, 0.0);
        std::vector<double> dz(n, 0.0);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            g.b[c] = dlogit[c];
            for (std::size_t q = 0; q < n; ++q) {
                g.W[c * n + q] = dlogit[c] * r.z[q];
                dz[q] += model.W[c * n + q] * dlogit[c];
            }
        }
        g.theta.assign(model.theta.size(), 0.0);
        if (std::all_of(dz.begin(), dz.end(), [](double v) { return v == 0.0; })) return;
        const auto jac = jacobian_from_state(model, state);
        for (std::size_t q = 0; q < n; ++q)
            for (std::size_t s = 0; s < g.theta.size(); ++s) g.theta[s] += dz[q] * jac[q][s];
    });
    Gradients total;
    total.theta.assign(model.theta.size(), 0.0);
    total.W.assign(kNumClasses * n, 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (const auto& g : per) {
        total.loss += g.loss * inv;
        for (std::size_t s = 0; s < g.theta.size(); ++s) total.theta[s] += g.theta[s] * inv;
        for (std::size_t k = 0; k < g.W.size(); ++k) total.W[k] += g.W[k] * inv;
        for (std::size_t c = 0; c < kNumClasses; ++c) total.b[c] += g.b[c] * inv;
    }
    return total;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw UsageError("train: epochs must be >= 1");
    if (!(learning_rate >= 0.0)) throw UsageError("train: learning rate must be >= 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw UsageError("train: betas must be in (0, 1)");
    if (!(epsilon > 0.0)) throw UsageError("train: epsilon must be > 0");
    if (batch_size < 0) throw UsageError("train: batch size must be >= 0");
}

History train(HybridModel& model, const Batch& train_set, const Batch& val_set, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (train_set.size() == 0) throw UsageError("train: empty training set");

    const std::size_t n_theta = model.theta.size(), n_w = model.W.size();
    const std::size_t n_total = n_theta + n_w + kNumClasses;
    std::vector<double> m1(n_total, 0.0), m2(n_total, 0.0);
    auto param = [&](std::size_t k) -> double& {
        if (k < n_theta) return model.theta[k];
        if (k < n_theta + n_w) return model.W[k - n_theta];
        return model.b[k - n_theta - n_w];
    };

    History h;
    h.initial = measure(model, train_set, val_set, 0, cfg.jobs);
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t bs = cfg.batch_size == 0 ? order.size() : std::min<std::size_t>(cfg.batch_size, order.size());
    long step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (bs < order.size()) rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            Batch mb;
            for (std::size_t i = start; i < std::min(start + bs, order.size()); ++i) {
                mb.x.push_back(train_set.x[order[i]]);
                mb.y.push_back(train_set.y[order[i]]);
            }
            const Gradients g = gradients(model, mb, cfg.jobs);
            ++step;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < n_total; ++k) {
                const double gk = k < n_theta ? g.theta[k] : k < n_theta + n_w ? g.W[k - n_theta] : g.b[k - n_theta - n_w];
                m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * gk;
                m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * gk * gk;
                param(k) -= cfg.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + cfg.epsilon);
            }
        }
        for (double t : model.theta)
            if (!std::isfinite(t)) throw NumericalError("train: parameters became non-finite");
        h.epochs.push_back(measure(model, train_set, val_set, epoch, cfg.jobs));
    }
    return h;
}

double evaluate(const HybridModel& model, const Batch& batch, int jobs, const ZBackend& backend) {
    if (batch.size() == 0) return 0.0;
    std::vector<int> correct(batch.size(), 0);
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
        const auto r = backend ? head(model, backend(model, batch.x[i])) : forward(model, batch.x[i]);
        correct[i] = argmax(r.probs) == batch.y[i];
    });
    return static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) / static_cast<double>(batch.size());
}

std::string checkpoint_to_json(const Checkpoint& c) {
    using detail::json;
    const HybridModel& m = c.model;
    json hist = json::array();
    for (const auto& e : c.history.epochs) hist.push_back(metrics_json(e));
    json j{{"format", "qdistill-checkpoint"},
           {"version", 1},
           {"template", m.template_id},
           {"layers", m.layers},
           {"n_qubits", m.n_qubits()},
           {"encoding", std::string(encoding_mode_name(m.scheme.mode))},
           {"second_axis", std::string(gate_name(m.scheme.second_axis))},
           {"seed", m.seed},
           {"theta", m.theta},
           {"W", m.W},
           {"b", m.b},
           {"scaler", detail::scaler_json(m.scaler)},
           {"pqc", to_text(m.pqc)},
           {"data", c.data},
           {"data_seed", c.data_seed},
           {"fine_tuned", c.fine_tuned},
           {"parent", c.parent},
           {"provenance", c.provenance},
           {"initial_metrics", metrics_json(c.history.initial)},
           {"history", hist}};
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
    using detail::get_field;
    const auto j = detail::parse_json(text);
    if (get_field<std::string>(j, "format") != "qdistill-checkpoint") throw DataError("not a qdistill checkpoint");
    Checkpoint c;
    HybridModel& m = c.model;
    m.template_id = get_field<std::string>(j, "template");
    m.layers = get_field<int>(j, "layers");
    m.scheme.n_qubits = get_field<int>(j, "n_qubits");
    m.scheme.mode = parse_encoding_mode(get_field<std::string>(j, "encoding"));
    const auto axis = parse_gate_kind(get_field<std::string>(j, "second_axis"));
    if (!axis) throw DataError("checkpoint: bad second_axis");
    m.scheme.second_axis = *axis;
    m.seed = get_field<std::uint64_t>(j, "seed");
    m.theta = get_field<std::vector<double>>(j, "theta");
    m.W = get_field<std::vector<double>>(j, "W");
    m.b = get_field<std::array<double, kNumClasses>>(j, "b");
    m.scaler = detail::scaler_from_json(j.at("scaler"));
    m.pqc = circuit_from_text(get_field<std::string>(j, "pqc"));
    c.data = get_field<std::string>(j, "data");
    c.data_seed = get_field<std::uint64_t>(j, "data_seed");
    c.fine_tuned = get_field<bool>(j, "fine_tuned");
    c.parent = get_field<std::string>(j, "parent");
    c.provenance = get_field<std::string>(j, "provenance");
    c.history.initial = metrics_from_json(j.at("initial_metrics"));
    for (const auto& e : j.at("history")) c.history.epochs.push_back(metrics_from_json(e));
    try {
        m.validate();
    } catch (const UsageError& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << checkpoint_to_json(ckpt);
    if (!f) throw DataError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return checkpoint_from_json(ss.str());
}

}  // namespace qdistill
