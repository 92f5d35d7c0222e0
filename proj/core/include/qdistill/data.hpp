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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qdistill {

/// Row-major sample matrix: one inner vector per sample.
using FeatureMatrix = std::vector<std::vector<double>>;

/// Labelled samples with a fixed train/validation partition.
struct Dataset {
    FeatureMatrix features;
    std::vector<int> labels;  // dense, in 0..n_classes-1
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::string provenance;

    std::size_t size() const { return labels.size(); }
    std::size_t n_features() const { return features.empty() ? 0 : features.front().size(); }
    /// Rows of `features` selected by `rows`, in that order.
    FeatureMatrix rows(std::span<const std::size_t> rows) const;
};

/// Stratified split: floor(class_count * val_fraction + 0.5) rows of each class go to
/// validation. Both index lists are sorted.
void stratified_split(Dataset& ds, double val_fraction, std::uint64_t seed);

/// The bundled Iris table (150 x 4, classes 0..2), split 120/30 stratified.
Dataset load_iris(std::uint64_t seed = 0);
/// Same, read from a CSV file with header f0..f3,label.
Dataset load_iris_csv(const std::string& path, std::uint64_t seed = 0);

/// Reads a CSV whose header is f0,...,f{F-1},label, keeps the three named classes
/// (remapped to 0,1,2 in the order given), subsamples each to at most `per_class` rows,
/// and splits 80/20 stratified. Shortfalls are warned about and noted in provenance.
Dataset load_features_csv(const std::string& path, std::array<int, 3> class_triplet, std::uint64_t seed = 0,
                          std::size_t per_class = 250);

/// Mean-centred projection onto the top-k principal directions of the fitting rows.
struct PcaModel {
    std::vector<double> mean;
    FeatureMatrix components;  // k rows of length F, orthonormal
    std::vector<double> eigenvalues;  // descending, sample covariance (n - 1)
    double retained_variance = 0.0;  // sum of kept eigenvalues / total

    std::vector<double> transform(std::span<const double> row) const;
    FeatureMatrix transform(const FeatureMatrix& m) const;
};

/// Fits on `fit_rows` (all rows when empty). Component signs are fixed so each
/// component's largest-magnitude loading is positive.
PcaModel fit_pca(const FeatureMatrix& features, std::size_t k, std::span<const std::size_t> fit_rows = {});

/// Fits on `fit_rows` and projects every row.
FeatureMatrix pca_reduce(const FeatureMatrix& features, std::size_t k, PcaModel* model = nullptr,
                         std::span<const std::size_t> fit_rows = {});

}  // namespace qdistill
