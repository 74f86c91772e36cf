// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Complex double inner-loop kernels used by the canceller, the criterion and
// the analysis operators. Each kernel has a portable scalar reference and,
// on x86-64, an AVX2/FMA variant. The active table is chosen once at startup
// from CPU features; RADAR_LAB_SIMD=scalar forces the reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace radar_lab::kernels {

using cplx = std::complex<double>;

struct KernelTable {
    std::string_view name;
    // sum_i conj(a[i]) * b[i]
    cplx (*dotc)(const cplx* a, const cplx* b, std::size_t n);
    // sum_i conj(a[i]) * b[i] * c[i]
    cplx (*dotc3)(const cplx* a, const cplx* b, const cplx* c, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
    // out[i] = a[i] * b[i]; out may alias a or b
    void (*hadamard)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
    // sum_i |a[i]|^2
    double (*norm2)(const cplx* a, std::size_t n);
};

const KernelTable& scalar_table();

// Null when the build target has no AVX2 variant or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

const KernelTable& active();

inline cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
    return active().dotc(a.data(), b.data(), a.size());
}
inline cplx dotc3(std::span<const cplx> a, std::span<const cplx> b, std::span<const cplx> c) {
    return active().dotc3(a.data(), b.data(), c.data(), a.size());
}
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void hadamard(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
    active().hadamard(a.data(), b.data(), out.data(), a.size());
}
inline double norm2(std::span<const cplx> a) { return active().norm2(a.data(), a.size()); }

namespace detail {
cplx dotc_scalar(const cplx* a, const cplx* b, std::size_t n);
cplx dotc3_scalar(const cplx* a, const cplx* b, const cplx* c, std::size_t n);
void axpy_scalar(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void hadamard_scalar(const cplx* a, const cplx* b, cplx* out, std::size_t n);
double norm2_scalar(const cplx* a, std::size_t n);

bool avx2_compiled();
cplx dotc_avx2(const cplx* a, const cplx* b, std::size_t n);
cplx dotc3_avx2(const cplx* a, const cplx* b, const cplx* c, std::size_t n);
void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void hadamard_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n);
double norm2_avx2(const cplx* a, std::size_t n);
}  // namespace detail

}  // namespace radar_lab::kernels
