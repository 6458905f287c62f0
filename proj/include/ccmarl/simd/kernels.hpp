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

#pragma once

// Dense double-precision kernels used by the network toolkit.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2+FMA
// on x86-64, NEON on aarch64) are selected once at runtime from the CPU
// feature set; CCMARL_SIMD=scalar in the environment forces the reference path.
// Vector variants reassociate sums, so results agree with the reference to
// rounding, not bitwise. A single process always uses one table, so runs stay
// reproducible on a given machine.

#include <cstddef>
#include <string_view>

namespace ccmarl::simd {

struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // dst = (1 - t) * dst + t * src
  void (*lerp)(double t, const double* src, double* dst, std::size_t n);

  // C (m x n) += A (m x k) * B^T, with B stored row-major as (n x k).
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t n, std::size_t k);

  // In-place Adam step over n parameters.
  void (*adam)(const AdamCoefficients& coeffs, double* param,
               const double* grad, double* m, double* v, std::size_t n);
};

const KernelTable& ScalarKernels();

// nullptr when the build or the running CPU lacks the instruction set.
const KernelTable* Avx2Kernels();
const KernelTable* NeonKernels();

// The table chosen for this process.
const KernelTable& Kernels();

}  // namespace ccmarl::simd
