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

#include "radar_lab/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define RADAR_LAB_HAVE_AVX2 1
#else
#define RADAR_LAB_HAVE_AVX2 0
#endif

namespace radar_lab::kernels::detail {

#if RADAR_LAB_HAVE_AVX2

namespace {

// Two complex doubles per register, interleaved [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d b_re = _mm256_movedup_pd(b);
    const __m256d b_im = _mm256_permute_pd(b, 0xF);
    const __m256d a_sw = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

inline double hsum(__m256d v) {
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return (t[0] + t[1]) + (t[2] + t[3]);
}

// conj(a) * b accumulated as (sum a.*b lanes, sum swap(a).*b lanes).
inline cplx finish_dotc(__m256d acc_re, __m256d acc_im) {
    alignas(32) double t[4];
    _mm256_store_pd(t, acc_im);
    return {hsum(acc_re), (t[1] - t[0]) + (t[3] - t[2])};
}

}  // namespace

bool avx2_compiled() { return true; }

cplx dotc_avx2(const cplx* a, const cplx* b, std::size_t n) {
    __m256d re0 = _mm256_setzero_pd(), im0 = _mm256_setzero_pd();
    __m256d re1 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = load2(a + i), b0 = load2(b + i);
        const __m256d a1 = load2(a + i + 2), b1 = load2(b + i + 2);
        re0 = _mm256_fmadd_pd(a0, b0, re0);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(a0, 0x5), b0, im0);
        re1 = _mm256_fmadd_pd(a1, b1, re1);
        im1 = _mm256_fmadd_pd(_mm256_permute_pd(a1, 0x5), b1, im1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d a0 = load2(a + i), b0 = load2(b + i);
        re0 = _mm256_fmadd_pd(a0, b0, re0);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(a0, 0x5), b0, im0);
    }
    cplx s = finish_dotc(_mm256_add_pd(re0, re1), _mm256_add_pd(im0, im1));
    if (i < n) s += dotc_scalar(a + i, b + i, n - i);
    return s;
}

cplx dotc3_avx2(const cplx* a, const cplx* b, const cplx* c, std::size_t n) {
    __m256d re0 = _mm256_setzero_pd(), im0 = _mm256_setzero_pd();
    __m256d re1 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = load2(a + i), p0 = cmul(load2(b + i), load2(c + i));
        const __m256d a1 = load2(a + i + 2), p1 = cmul(load2(b + i + 2), load2(c + i + 2));
        re0 = _mm256_fmadd_pd(a0, p0, re0);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(a0, 0x5), p0, im0);
        re1 = _mm256_fmadd_pd(a1, p1, re1);
        im1 = _mm256_fmadd_pd(_mm256_permute_pd(a1, 0x5), p1, im1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d a0 = load2(a + i), p0 = cmul(load2(b + i), load2(c + i));
        re0 = _mm256_fmadd_pd(a0, p0, re0);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(a0, 0x5), p0, im0);
    }
    cplx s = finish_dotc(_mm256_add_pd(re0, re1), _mm256_add_pd(im0, im1));
    if (i < n) s += dotc3_scalar(a + i, b + i, c + i, n - i);
    return s;
}

void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const __m256d w_re = _mm256_set1_pd(alpha.real());
    const __m256d w_im = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        const __m256d t = _mm256_mul_pd(_mm256_permute_pd(xv, 0x5), w_im);
        store2(y + i, _mm256_add_pd(load2(y + i), _mm256_fmaddsub_pd(xv, w_re, t)));
    }
    if (i < n) axpy_scalar(alpha, x + i, y + i, n - i);
}

void hadamard_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store2(out + i, cmul(load2(a + i), load2(b + i)));
    if (i < n) hadamard_scalar(a + i, b + i, out + i, n - i);
}

double norm2_avx2(const cplx* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = load2(a + i), v1 = load2(a + i + 2);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d v0 = load2(a + i);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    if (i < n) s += norm2_scalar(a + i, n - i);
    return s;
}

#else

bool avx2_compiled() { return false; }
cplx dotc_avx2(const cplx* a, const cplx* b, std::size_t n) { return dotc_scalar(a, b, n); }
cplx dotc3_avx2(const cplx* a, const cplx* b, const cplx* c, std::size_t n) { return dotc3_scalar(a, b, c, n); }
void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) { axpy_scalar(alpha, x, y, n); }
void hadamard_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) { hadamard_scalar(a, b, out, n); }
double norm2_avx2(const cplx* a, std::size_t n) { return norm2_scalar(a, n); }

#endif

}  // namespace radar_lab::kernels::detail
