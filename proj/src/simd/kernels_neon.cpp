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

#include <arm_neon.h>

#include "ccmarl/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace ccmarl::simd {
namespace {

double DotNeon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void AxpyNeon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void LerpNeon(double t, const double* src, double* dst, std::size_t n) {
  const double keep = 1.0 - t;
  const float64x2_t vt = vdupq_n_f64(t);
  const float64x2_t vk = vdupq_n_f64(keep);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t kept = vmulq_f64(vk, vld1q_f64(dst + i));
    vst1q_f64(dst + i, vfmaq_f64(kept, vt, vld1q_f64(src + i)));
  }
  for (; i < n; ++i) dst[i] = keep * dst[i] + t * src[i];
}

void GemmNtNeon(const double* a, const double* b, double* c, std::size_t m,
                std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += DotNeon(arow, b + j * k, k);
  }
}

void AdamNeon(const AdamCoefficients& c, double* param, const double* grad,
              double* m, double* v, std::size_t n) {
  // Elementwise sqrt/div dominate; the reference loop is already memory bound.
  ScalarKernels().adam(c, param, grad, m, v, n);
}

}  // namespace

const KernelTable& NeonKernelTable() {
  static constexpr KernelTable table{"neon", DotNeon, AxpyNeon, LerpNeon,
                                     GemmNtNeon, AdamNeon};
  return table;
}

}  // namespace ccmarl::simd
