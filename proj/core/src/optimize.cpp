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

#include "qdistill/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "qdistill/error.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

namespace {

constexpr double kTailLimit = 1e8;
constexpr double kMinVisitBound = 1e-10;

// Counts calls and refuses to exceed a hard budget.
class CountedObjective {
   public:
    CountedObjective(const Objective& f, int budget, std::vector<AnnealingTrace>* trace)
        : f_(f), budget_(budget), trace_(trace) {}

    bool exhausted() const { return count_ >= budget_; }
    int remaining() const { return std::max(budget_ - count_, 0); }
    int count() const { return count_; }

    double operator()(std::span<const double> x) {
        if (exhausted()) throw NumericalError("objective budget exceeded");
        ++count_;
        double v = f_(x);
        if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
        if (v < best_) {
            best_ = v;
            if (trace_) trace_->push_back({count_, v});
        }
        return v;
    }

   private:
    const Objective& f_;
    int budget_;
    int count_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
    std::vector<AnnealingTrace>* trace_;
};

double wrap_into(double x, double lo, double range) {
    // Mirrors the visiting step: fmod into [lo, lo + range).
    const double a = x - lo;
    const double b = std::fmod(a, range) + range;
    return std::fmod(b, range) + lo;
}

class VisitingDistribution {
   public:
    VisitingDistribution(const Box& box, double qv, Rng& rng) : box_(box), qv_(qv), rng_(rng) {
        factor2_ = std::exp((4.0 - qv) * std::log(qv - 1.0));
        factor3_ = std::exp((2.0 - qv) * std::log(2.0) / (qv - 1.0));
        factor4p_ = std::sqrt(std::numbers::pi) * factor2_ / (factor3_ * (3.0 - qv));
        factor5_ = 1.0 / (qv - 1.0) - 0.5;
        d1_ = 2.0 - factor5_;
        factor6_ = std::numbers::pi * (1.0 - factor5_) / std::sin(std::numbers::pi * (1.0 - factor5_)) /
                   std::exp(std::lgamma(d1_));
    }

    std::vector<double> visit(std::span<const double> x, std::size_t step, double temperature) {
        const std::size_t dim = x.size();
        std::vector<double> out(x.begin(), x.end());
        if (step < dim) {
            std::vector<double> v(dim);
            for (auto& vi : v) vi = visit_fn(temperature);
            const double upper_sample = rng_.uniform(), lower_sample = rng_.uniform();
            for (std::size_t i = 0; i < dim; ++i) {
                if (v[i] > kTailLimit) v[i] = kTailLimit * upper_sample;
                else if (v[i] < -kTailLimit) v[i] = -kTailLimit * lower_sample;
                out[i] = wrap_into(v[i] + x[i], box_.lower[i], box_.upper[i] - box_.lower[i]);
                if (std::abs(out[i] - box_.lower[i]) < kMinVisitBound) out[i] += kMinVisitBound;
            }
        } else {
            double v = visit_fn(temperature);
            if (v > kTailLimit) v = kTailLimit * rng_.uniform();
            else if (v < -kTailLimit) v = -kTailLimit * rng_.uniform();
            const std::size_t i = step - dim;
            out[i] = wrap_into(v + x[i], box_.lower[i], box_.upper[i] - box_.lower[i]);
            if (std::abs(out[i] - box_.lower[i]) < kMinVisitBound) out[i] += kMinVisitBound;
        }
        return out;
    }

   private:
    double visit_fn(double temperature) {
        double x = rng_.normal();
        const double y = rng_.normal();
        const double factor1 = std::exp(std::log(temperature) / (qv_ - 1.0));
        const double factor4 = factor4p_ * factor1;
        x *= std::exp(-(qv_ - 1.0) * std::log(factor6_ / factor4) / (3.0 - qv_));
        const double den = std::exp((qv_ - 1.0) * std::log(std::abs(y)) / (3.0 - qv_));
        return x / den;
    }

    const Box& box_;
    double qv_;
    Rng& rng_;
    double factor2_, factor3_, factor4p_, factor5_, d1_, factor6_;
};

struct EnergyState {
    std::vector<double> current, best;
    double current_e = std::numeric_limits<double>::infinity();
    double best_e = std::numeric_limits<double>::infinity();

    void update_best(double e, std::span<const double> x) {
        best_e = e;
        best.assign(x.begin(), x.end());
    }
    void update_current(double e, std::span<const double> x) {
        current_e = e;
        current.assign(x.begin(), x.end());
    }
};

}  // namespace

void Box::validate() const {
    if (lower.size() != upper.size()) throw UsageError("bounds: lower/upper length mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i])) {
            throw UsageError("bounds: need finite lower < upper");
        }
    }
}

void Box::project(std::span<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (periodic) {
            if (x[i] >= lower[i] && x[i] <= upper[i]) continue;
            const double range = upper[i] - lower[i];
            x[i] = lower[i] + (x[i] - lower[i]) - range * std::floor((x[i] - lower[i]) / range);
        } else {
            x[i] = std::clamp(x[i], lower[i], upper[i]);
        }
    }
}

OptimizeResult nelder_mead(const Objective& f, std::span<const double> x0, const Box& box,
                           const NelderMeadOptions& opt) {
    box.validate();
    const std::size_t n = x0.size();
    if (n != box.dim()) throw UsageError("nelder_mead: x0 and bounds differ in length");
    OptimizeResult res;
    if (opt.max_evaluations < 1) {
        res.x.assign(x0.begin(), x0.end());
        res.fun = std::numeric_limits<double>::infinity();
        return res;
    }
    const double dn = static_cast<double>(std::max<std::size_t>(n, 1));
    const double rho = 1.0;
    const double chi = opt.adaptive ? 1.0 + 2.0 / dn : 2.0;
    const double psi = opt.adaptive ? 0.75 - 1.0 / (2.0 * dn) : 0.5;
    const double sigma = opt.adaptive ? 1.0 - 1.0 / dn : 0.5;

    int evals = 0;
    std::vector<double> best_x(x0.begin(), x0.end());
    double best_f = std::numeric_limits<double>::infinity();
    auto eval = [&](std::vector<double>& p) -> std::optional<double> {
        if (evals >= opt.max_evaluations) return std::nullopt;
        // A periodic simplex keeps its unwrapped geometry; only the trial point wraps.
        std::vector<double> wrapped;
        if (box.periodic) {
            wrapped = p;
            box.project(wrapped);
        } else {
            box.project(p);
        }
        const std::vector<double>& at = box.periodic ? wrapped : p;
        ++evals;
        double v = f(at);
        if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
        if (v < best_f) {
            best_f = v;
            best_x = at;
        }
        return v;
    };
    auto finish = [&] {
        res.x = best_x;
        res.fun = best_f;
        res.evaluations = evals;
        return res;
    };

    std::vector<std::vector<double>> sim(n + 1, std::vector<double>(x0.begin(), x0.end()));
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        if (i > 0) {
            const double range = box.upper[i - 1] - box.lower[i - 1];
            double step = std::min(opt.initial_step, 0.5 * range);
            // Step inward when a clipped box would push the vertex onto x0.
            if (!box.periodic && sim[i][i - 1] + step > box.upper[i - 1]) step = -step;
            sim[i][i - 1] += step;
        }
        const auto v = eval(sim[i]);
        if (!v) return finish();
        fs[i] = *v;
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (true) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        {
            std::vector<std::vector<double>> s2(n + 1);
            std::vector<double> f2(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                s2[i] = std::move(sim[order[i]]);
                f2[i] = fs[order[i]];
            }
            sim = std::move(s2);
            fs = std::move(f2);
        }
        double xspread = 0.0, fspread = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            fspread = std::max(fspread, std::abs(fs[i] - fs[0]));
            for (std::size_t k = 0; k < n; ++k) xspread = std::max(xspread, std::abs(sim[i][k] - sim[0][k]));
        }
        if (xspread <= opt.xatol && fspread <= opt.fatol) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += sim[i][k] / dn;
        auto& worst = sim[n];
        for (std::size_t k = 0; k < n; ++k) xr[k] = (1 + rho) * centroid[k] - rho * worst[k];
        auto fr = eval(xr);
        if (!fr) break;
        bool shrink = false;
        if (*fr < fs[0]) {
            for (std::size_t k = 0; k < n; ++k) xe[k] = (1 + rho * chi) * centroid[k] - rho * chi * worst[k];
            auto fe = eval(xe);
            if (!fe) break;
            if (*fe < *fr) {
                worst = xe;
                fs[n] = *fe;
            } else {
                worst = xr;
                fs[n] = *fr;
            }
        } else if (*fr < fs[n - 1]) {
            worst = xr;
            fs[n] = *fr;
        } else if (*fr < fs[n]) {
            for (std::size_t k = 0; k < n; ++k) xc[k] = (1 + psi * rho) * centroid[k] - psi * rho * worst[k];
            auto fc = eval(xc);
            if (!fc) break;
            if (*fc <= *fr) {
                worst = xc;
                fs[n] = *fc;
            } else {
                shrink = true;
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) xc[k] = (1 - psi) * centroid[k] + psi * worst[k];
            auto fc = eval(xc);
            if (!fc) break;
            if (*fc < fs[n]) {
                worst = xc;
                fs[n] = *fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            bool out_of_budget = false;
            for (std::size_t i = 1; i <= n && !out_of_budget; ++i) {
                for (std::size_t k = 0; k < n; ++k) sim[i][k] = sim[0][k] + sigma * (sim[i][k] - sim[0][k]);
                auto v = eval(sim[i]);
                if (!v) out_of_budget = true;
                else fs[i] = *v;
            }
            if (out_of_budget) break;
        }
    }
    return finish();
}

void DualAnnealingOptions::validate() const {
    if (!(restart_temp_ratio > 0.0 && restart_temp_ratio < 1.0)) throw UsageError("anneal: restart_temp_ratio must be in (0, 1)");
    if (!(visit > 1.0 && visit <= 3.0)) throw UsageError("anneal: visit must be in (1, 3]");
    if (!(accept < 0.0)) throw UsageError("anneal: accept must be < 0");
    if (!(initial_temp > 0.0)) throw UsageError("anneal: initial_temp must be > 0");
    if (max_evaluations < 1 || max_iterations < 1) throw UsageError("anneal: budgets must be >= 1");
}

OptimizeResult dual_annealing(const Objective& f, const Box& box, const DualAnnealingOptions& opt,
                              std::vector<AnnealingTrace>* improvements) {
    opt.validate();
    box.validate();
    const std::size_t dim = box.dim();
    if (dim == 0) throw UsageError("dual_annealing: zero-dimensional problem");
    Rng rng(opt.seed);
    CountedObjective fn(f, opt.max_evaluations, improvements);
    VisitingDistribution visiting(box, opt.visit, rng);
    EnergyState es;

    auto reset = [&]() -> bool {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            if (fn.exhausted()) return false;
            std::vector<double> x(dim);
            for (std::size_t i = 0; i < dim; ++i) x[i] = rng.uniform(box.lower[i], box.upper[i]);
            const double e = fn(x);
            es.update_current(e, x);
            if (std::isfinite(e)) {
                if (e < es.best_e || es.best.empty()) es.update_best(e, x);
                return true;
            }
        }
        throw NumericalError("dual_annealing: no finite objective value at random starts");
    };

    // Strategy-chain state.
    std::vector<double> xmin;
    double emin = 0.0;
    int not_improved = 0;
    int not_improved_max = 1000;
    const double K = 100.0 * static_cast<double>(dim);
    bool improved = false;
    double temperature_step = 0.0;

    auto local = [&](std::span<const double> x0) -> OptimizeResult {
        NelderMeadOptions lo = opt.local;
        lo.max_evaluations = std::min(lo.max_evaluations > 0 ? lo.max_evaluations : fn.remaining(), fn.remaining());
        return nelder_mead([&](std::span<const double> x) { return fn(x); }, x0, box, lo);
    };

    if (!reset()) return {es.current, es.current_e, fn.count()};
    xmin = es.current;
    emin = es.current_e;

    const double t1 = std::exp((opt.visit - 1.0) * std::log(2.0)) - 1.0;
    const double temp_restart = opt.initial_temp * opt.restart_temp_ratio;
    int iteration = 0;
    bool stop = false;
    while (!stop) {
        for (int i = 0; i < opt.max_iterations; ++i) {
            const double s = static_cast<double>(i) + 2.0;
            const double t2 = std::exp((opt.visit - 1.0) * std::log(s)) - 1.0;
            const double temperature = opt.initial_temp * t1 / t2;
            if (iteration >= opt.max_iterations || fn.exhausted()) {
                stop = true;
                break;
            }
            if (temperature < temp_restart) {
                if (!reset()) stop = true;
                break;
            }

            // Strategy chain: 2*dim visits at this temperature.
            temperature_step = temperature / static_cast<double>(i + 1);
            ++not_improved;
            for (std::size_t j = 0; j < 2 * dim && !stop; ++j) {
                if (j == 0) improved = i == 0;
                const auto x = visiting.visit(es.current, j, temperature);
                const double e = fn(x);
                if (e < es.current_e) {
                    es.update_current(e, x);
                    if (e < es.best_e) {
                        es.update_best(e, x);
                        improved = true;
                        not_improved = 0;
                    }
                } else {
                    const double r = rng.uniform();
                    const double pqv_temp =
                        1.0 - ((1.0 - opt.accept) * (e - es.current_e) / temperature_step);
                    const double pqv = pqv_temp <= 0.0 ? 0.0 : std::exp(std::log(pqv_temp) / (1.0 - opt.accept));
                    if (r <= pqv) {
                        es.update_current(e, x);
                        xmin = es.current;
                    }
                    if (not_improved >= not_improved_max && (j == 0 || es.current_e < emin)) {
                        emin = es.current_e;
                        xmin = es.current;
                    }
                }
                if (fn.exhausted()) stop = true;
            }
            if (stop) break;

            if (opt.local_search) {
                if (improved) {
                    const auto r = local(es.best);
                    if (r.fun < es.best_e) {
                        not_improved = 0;
                        es.update_best(r.fun, r.x);
                        es.update_current(r.fun, r.x);
                    }
                    if (fn.exhausted()) {
                        stop = true;
                        break;
                    }
                }
                bool do_ls = false;
                if (K < 90.0 * static_cast<double>(dim)) {
                    const double pls = std::exp(K * (es.best_e - es.current_e) / temperature_step);
                    if (pls >= rng.uniform()) do_ls = true;
                }
                if (not_improved >= not_improved_max) do_ls = true;
                if (do_ls) {
                    const auto r = local(xmin);
                    xmin = r.x;
                    emin = r.fun;
                    not_improved = 0;
                    not_improved_max = static_cast<int>(dim);
                    if (r.fun < es.best_e) {
                        es.update_best(r.fun, r.x);
                        es.update_current(r.fun, r.x);
                    }
                    if (fn.exhausted()) {
                        stop = true;
                        break;
                    }
                }
            }
            ++iteration;
        }
    }
    return {es.best, es.best_e, fn.count()};
}

}  // namespace qdistill
