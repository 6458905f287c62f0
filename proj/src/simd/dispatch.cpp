// Copyright 2026 The ccmarl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <string_view>

#include "ccmarl/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace ccmarl::simd {

const KernelTable* Avx2Kernels() {
#if defined(CCMARL_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &Avx2KernelTable() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* NeonKernels() {
#if defined(CCMARL_HAVE_NEON)
  // Advanced SIMD is mandatory on aarch64.
  return &NeonKernelTable();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& Select() {
  const char* forced = std::getenv("CCMARL_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    return ScalarKernels();
  }
  if (const KernelTable* t = Avx2Kernels()) return *t;
  if (const KernelTable* t = NeonKernels()) return *t;
  return ScalarKernels();
}

}  // namespace

const KernelTable& Kernels() {
  static const KernelTable& selected = Select();
  return selected;
}

}  // namespace ccmarl::simd
