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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "qdistill/data.hpp"
#include "qdistill/error.hpp"
#include "qdistill/log.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {
namespace {

namespace fs = std::filesystem;

class TempDir {
   public:
    TempDir() : path_(fs::temp_directory_path() / ("qdistill_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name, const std::string& content) const {
        std::ofstream(path_ / name) << content;
        return (path_ / name).string();
    }

   private:
    fs::path path_;
};

std::string feature_csv(const std::vector<std::pair<int, int>>& class_counts, int n_features = 8) {
    std::string s;
    for (int f = 0; f < n_features; ++f) s += "f" + std::to_string(f) + ",";
    s += "label\n";
    Rng rng(1);
    for (const auto& [label, count] : class_counts)
        for (int i = 0; i < count; ++i) {
            for (int f = 0; f < n_features; ++f) s += std::to_string(rng.uniform(-1, 1) + label) + ",";
            s += std::to_string(label) + "\n";
        }
    return s;
}

void expect_partition(const Dataset& ds) {
    std::set<std::size_t> seen(ds.train.begin(), ds.train.end());
    for (auto v : ds.val) EXPECT_TRUE(seen.insert(v).second);
    EXPECT_EQ(seen.size(), ds.size());
    EXPECT_TRUE(std::is_sorted(ds.train.begin(), ds.train.end()));
    EXPECT_TRUE(std::is_sorted(ds.val.begin(), ds.val.end()));
}

TEST(DataTest, IrisShape) {
    const auto ds = load_iris(0);
    EXPECT_EQ(ds.size(), 150u);
    EXPECT_EQ(ds.n_features(), 4u);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(std::count(ds.labels.begin(), ds.labels.end(), c), 50);
    EXPECT_EQ(ds.train.size(), 120u);
    EXPECT_EQ(ds.val.size(), 30u);
    expect_partition(ds);
    for (int c = 0; c < 3; ++c)
        EXPECT_EQ(std::count_if(ds.val.begin(), ds.val.end(), [&](std::size_t i) { return ds.labels[i] == c; }), 10);
}

TEST(DataTest, SplitsAreSeeded) {
    EXPECT_EQ(load_iris(4).val, load_iris(4).val);
    EXPECT_NE(load_iris(4).val, load_iris(5).val);
}

TEST(DataTest, BundledIrisMatchesShippedCsv) {
    const auto a = load_iris(2);
    const auto b = load_iris_csv(std::string(QDISTILL_DATA_DIR) + "/iris.csv", 2);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.val, b.val);
}

TEST(DataTest, FeatureCsvExactCounts) {
    TempDir dir;
    const auto path = dir.file("f.csv", feature_csv({{1, 250}, {7, 250}, {9, 250}, {3, 40}}));
    const auto ds = load_features_csv(path, {1, 7, 9}, 0);
    EXPECT_EQ(ds.size(), 750u);
    EXPECT_EQ(ds.train.size(), 600u);
    EXPECT_EQ(ds.val.size(), 150u);
    EXPECT_EQ(ds.n_features(), 8u);
    expect_partition(ds);
}

TEST(DataTest, TripletRemapsInGivenOrder) {
    TempDir dir;
    const auto path = dir.file("f.csv", feature_csv({{9, 5}, {1, 5}, {7, 5}}));
    const auto ds = load_features_csv(path, {1, 7, 9}, 0, 250);
    // Feature values are offset by the original label, so the remap is observable.
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int original = std::array{1, 7, 9}[static_cast<std::size_t>(ds.labels[i])];
        EXPECT_NEAR(ds.features[i][0], original, 1.0);
    }
}

TEST(DataTest, SubsamplesToCapAndWarnsOnShortfall) {
    TempDir dir;
    const auto path = dir.file("f.csv", feature_csv({{0, 300}, {1, 300}, {2, 100}}));
    std::vector<std::string> warnings;
    set_warning_sink([&](std::string_view w) { warnings.emplace_back(w); });
    const auto ds = load_features_csv(path, {0, 1, 2}, 3);
    set_warning_sink({});
    EXPECT_EQ(ds.size(), 600u);
    EXPECT_FALSE(warnings.empty());
    EXPECT_NE(ds.provenance.find("short:"), std::string::npos) << ds.provenance;
}

TEST(DataTest, MissingHeaderIsError) {
    TempDir dir;
    const auto path = dir.file("f.csv", "1,2,3\n4,5,6\n");
    EXPECT_THROW(load_features_csv(path, {0, 1, 2}), DataError);
    EXPECT_THROW(load_features_csv(dir.file("none.csv", ""), {0, 1, 2}), DataError);
    EXPECT_THROW(load_iris_csv("/nonexistent/iris.csv"), DataError);
}

TEST(PcaTest, ExactWhenDataIsLowDimensional) {
    Rng rng(9);
    FeatureMatrix m;
    for (int i = 0; i < 50; ++i) {
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        m.push_back({a, b, a + b, 2 * a - b});
    }
    PcaModel model;
    const auto reduced = pca_reduce(m, 2, &model);
    EXPECT_NEAR(model.retained_variance, 1.0, 1e-9);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t f = 0; f < 4; ++f) {
            double back = model.mean[f];
            for (std::size_t k = 0; k < 2; ++k) back += reduced[i][k] * model.components[k][f];
            EXPECT_NEAR(back, m[i][f], 1e-9);
        }
}

TEST(PcaTest, ComponentsAreOrthonormalAndSigned) {
    Rng rng(10);
    FeatureMatrix m(80, std::vector<double>(6));
    for (auto& row : m)
        for (auto& v : row) v = rng.uniform(-1, 1);
    const auto model = fit_pca(m, 4);
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            double dot = 0;
            for (std::size_t f = 0; f < 6; ++f) dot += model.components[a][f] * model.components[b][f];
            EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-10);
        }
        const auto& c = model.components[a];
        const auto big = *std::max_element(c.begin(), c.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
        EXPECT_GT(big, 0.0);
        if (a) EXPECT_GE(model.eigenvalues[a - 1], model.eigenvalues[a]);
    }
}

TEST(PcaTest, IsotropicGaussianSplitsVarianceEvenly) {
    Rng rng(11);
    FeatureMatrix m;
    for (int i = 0; i < 4000; ++i) {
        // Box-Muller.
        const double u = 1.0 - rng.uniform(), v = rng.uniform();
        const double r = std::sqrt(-2 * std::log(u));
        m.push_back({r * std::cos(2 * M_PI * v), r * std::sin(2 * M_PI * v)});
    }
    EXPECT_NEAR(fit_pca(m, 1).retained_variance, 0.5, 0.05);
}

TEST(PcaTest, TrainingMeanProjectsToZero) {
    Rng rng(12);
    FeatureMatrix m(30, std::vector<double>(5));
    for (auto& row : m)
        for (auto& v : row) v = rng.uniform(0, 3);
    const auto model = fit_pca(m, 3);
    for (double x : model.transform(model.mean)) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(PcaTest, RankDeficiencyIsError) {
    FeatureMatrix m{{1, 2, 3}, {2, 4, 6}, {3, 6, 9}};
    EXPECT_THROW(fit_pca(m, 2), NumericalError);
    EXPECT_THROW(fit_pca(m, 4), UsageError);
}

}  // namespace
}  // namespace qdistill
