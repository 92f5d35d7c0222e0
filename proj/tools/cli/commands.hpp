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
#include <iosfwd>
#include <string>
#include <vector>

#include "qdistill/data.hpp"

namespace qdistill::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Runs one invocation, e.g. {"train", "--data", "iris", ...}. Never throws; errors are
/// reported on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Where a dataset comes from: "iris", or "PATH?classes=a,b,c&pca=k" for feature CSVs.
struct DataSpec {
    std::string source = "iris";
    std::vector<int> classes;  // required for CSV sources
    int pca = 0;               // 0 = keep features as read

    static DataSpec parse(const std::string& text);
    std::string str() const;
};

/// Loads and, when requested, PCA-reduces the dataset (PCA fitted on training rows).
Dataset load_dataset(const DataSpec& spec, std::uint64_t seed);

}  // namespace qdistill::cli
