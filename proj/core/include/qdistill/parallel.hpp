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

#include <cstddef>
#include <functional>

namespace qdistill {

/// Runs fn(0..n-1) on up to `jobs` threads (jobs <= 1 runs inline). Each index is
/// processed exactly once; callers write results into per-index slots and reduce in
/// index order, so output does not depend on the worker count. The first exception
/// by index is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int default_jobs();

}  // namespace qdistill
