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

#include "qdistill/data.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "qdistill/error.hpp"
#include "qdistill/log.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

namespace detail {
extern const std::string_view kIrisCsv;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        auto tok = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
        while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
        out.push_back(tok);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t lineno) {
    T v{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw DataError("CSV line " + std::to_string(lineno) + ": bad number '" + std::string(tok) + "'");
    }
    return v;
}

struct RawTable {
    FeatureMatrix features;
    std::vector<int> labels;
};

// Header must be f0,...,f{F-1},label.
RawTable parse_feature_csv(std::string_view text, std::string_view source) {
    RawTable t;
    std::size_t lineno = 0;
    std::size_t n_features = 0;
    bool header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const auto toks = split_commas(line);
        if (!header) {
            if (toks.size() < 2 || toks.back() != "label") {
                throw DataError(std::string(source) + ": missing header 'f0,...,label'");
            }
            for (std::size_t j = 0; j + 1 < toks.size(); ++j) {
                if (toks[j] != "f" + std::to_string(j)) {
                    throw DataError(std::string(source) + ": header column " + std::to_string(j) + " must be 'f" +
                                    std::to_string(j) + "'");
                }
            }
            n_features = toks.size() - 1;
            header = true;
            continue;
        }
        if (toks.size() != n_features + 1) {
            throw DataError(std::string(source) + " line " + std::to_string(lineno) + ": expected " +
                            std::to_string(n_features + 1) + " columns");
        }
        std::vector<double> row(n_features);
        for (std::size_t j = 0; j < n_features; ++j) row[j] = parse_number<double>(toks[j], lineno);
        t.features.push_back(std::move(row));
        t.labels.push_back(parse_number<int>(toks.back(), lineno));
    }
    if (!header) throw DataError(std::string(source) + ": empty file");
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Dataset iris_from_table(RawTable t, std::string provenance, std::uint64_t seed) {
    if (t.features.size() != 150 || t.features.front().size() != 4) {
        throw DataError("iris: expected 150 rows of 4 features");
    }
    for (int l : t.labels)
        if (l < 0 || l > 2) throw DataError("iris: labels must be 0..2");
    Dataset ds{std::move(t.features), std::move(t.labels), {}, {}, std::move(provenance)};
    stratified_split(ds, 0.2, seed);
    ds.provenance += "; stratified 80/20 split seed=" + std::to_string(seed);
    return ds;
}

}  // namespace

FeatureMatrix Dataset::rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(features.at(i));
    return out;
}

void stratified_split(Dataset& ds, double val_fraction, std::uint64_t seed) {
    if (val_fraction < 0.0 || val_fraction > 1.0) throw UsageError("split: fraction must be in [0, 1]");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) by_class[ds.labels[i]].push_back(i);
    Rng rng(seed);
    ds.train.clear();
    ds.val.clear();
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(idx.size()) * val_fraction + 0.5));
        ds.val.insert(ds.val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
        ds.train.insert(ds.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    }
    std::sort(ds.train.begin(), ds.train.end());
    std::sort(ds.val.begin(), ds.val.end());
}

Dataset load_iris(std::uint64_t seed) {
    return iris_from_table(parse_feature_csv(detail::kIrisCsv, "iris.csv"), "iris (bundled, 150x4)", seed);
}

Dataset load_iris_csv(const std::string& path, std::uint64_t seed) {
    return iris_from_table(parse_feature_csv(read_file(path), path), "iris (" + path + ")", seed);
}

Dataset load_features_csv(const std::string& path, std::array<int, 3> triplet, std::uint64_t seed,
                          std::size_t per_class) {
    if (triplet[0] == triplet[1] || triplet[0] == triplet[2] || triplet[1] == triplet[2]) {
        throw UsageError("class triplet must name three distinct classes");
    }
    RawTable t = parse_feature_csv(read_file(path), path);
    Rng rng(seed);
    Dataset ds;
    std::ostringstream prov;
    prov << path << " classes (" << triplet[0] << ',' << triplet[1] << ',' << triplet[2] << ")->(0,1,2)";
    std::vector<std::pair<std::size_t, int>> keep;  // (source row, dense label)
    for (int c = 0; c < 3; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < t.labels.size(); ++i)
            if (t.labels[i] == triplet[static_cast<std::size_t>(c)]) idx.push_back(i);
        if (idx.size() > per_class) {
            rng.shuffle(idx);
            idx.resize(per_class);
            std::sort(idx.begin(), idx.end());
        } else if (idx.size() < per_class) {
            const std::string msg = "class " + std::to_string(triplet[static_cast<std::size_t>(c)]) + " has " +
                                    std::to_string(idx.size()) + " rows (wanted " + std::to_string(per_class) + ")";
            warn(path + ": " + msg);
            prov << "; short: " << msg;
        }
        for (std::size_t i : idx) keep.emplace_back(i, c);
    }
    std::sort(keep.begin(), keep.end());
    for (const auto& [row, label] : keep) {
        ds.features.push_back(std::move(t.features[row]));
        ds.labels.push_back(label);
    }
    if (ds.labels.empty()) throw DataError(path + ": none of the requested classes present");
    stratified_split(ds, 0.2, seed);
    prov << "; cap " << per_class << "/class; stratified 80/20 split seed=" << seed;
    ds.provenance = prov.str();
    return ds;
}

std::vector<double> PcaModel::transform(std::span<const double> row) const {
    if (row.size() != mean.size()) throw UsageError("pca: feature count mismatch");
    std::vector<double> out(components.size(), 0.0);
    for (std::size_t c = 0; c < components.size(); ++c)
        for (std::size_t j = 0; j < row.size(); ++j) out[c] += components[c][j] * (row[j] - mean[j]);
    return out;
}

FeatureMatrix PcaModel::transform(const FeatureMatrix& m) const {
    FeatureMatrix out;
    out.reserve(m.size());
    for (const auto& r : m) out.push_back(transform(r));
    return out;
}

PcaModel fit_pca(const FeatureMatrix& features, std::size_t k, std::span<const std::size_t> fit_rows) {
    std::vector<std::size_t> all;
    if (fit_rows.empty()) {
        all.resize(features.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        fit_rows = all;
    }
    if (fit_rows.size() < 2) throw DataError("pca: need at least two rows");
    const std::size_t f = features[fit_rows[0]].size();
    if (k == 0 || k > f) throw UsageError("pca: k must be in 1.." + std::to_string(f));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(fit_rows.size()), static_cast<Eigen::Index>(f));
    for (std::size_t r = 0; r < fit_rows.size(); ++r) {
        const auto& row = features.at(fit_rows[r]);
        if (row.size() != f) throw DataError("pca: ragged rows");
        for (std::size_t j = 0; j < f; ++j) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j];
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    x.rowwise() -= mu;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(fit_rows.size() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericalError("pca: eigendecomposition failed");
    const Eigen::VectorXd evals = es.eigenvalues().reverse();
    const Eigen::MatrixXd evecs = es.eigenvectors().rowwise().reverse();

    const double top = std::max(evals(0), 0.0);
    const double tol = std::max(top, 1.0) * 1e-12 * static_cast<double>(f);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        if (evals(i) > tol) ++rank;
    if (k > rank) {
        throw NumericalError("pca: k=" + std::to_string(k) + " exceeds data rank " + std::to_string(rank));
    }

    PcaModel m;
    m.mean.assign(mu.data(), mu.data() + f);
    double total = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) total += std::max(evals(i), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        Eigen::VectorXd v = evecs.col(static_cast<Eigen::Index>(c));
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        m.components.emplace_back(v.data(), v.data() + f);
        m.eigenvalues.push_back(evals(static_cast<Eigen::Index>(c)));
        m.retained_variance += evals(static_cast<Eigen::Index>(c));
    }
    m.retained_variance = total > 0 ? m.retained_variance / total : 0.0;
    return m;
}

FeatureMatrix pca_reduce(const FeatureMatrix& features, std::size_t k, PcaModel* model,
                         std::span<const std::size_t> fit_rows) {
    PcaModel m = fit_pca(features, k, fit_rows);
    FeatureMatrix out = m.transform(features);
    if (model) *model = std::move(m);
    return out;
}

}  // namespace qdistill
