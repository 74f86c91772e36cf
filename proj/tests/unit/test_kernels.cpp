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

#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "radar_lab/kernels.hpp"

using namespace radar_lab;
using namespace testing;

namespace {

std::vector<cplx> data(std::size_t n, std::uint64_t seed) {
    const CVector v = random_vector(static_cast<int>(n), seed);
    return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("scalar kernels match plain loops") {
    const auto& t = kernels::scalar_table();
    const auto a = data(13, 1), b = data(13, 2), c = data(13, 3);
    cplx d{}, d3{};
    double n2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += std::conj(a[i]) * b[i];
        d3 += std::conj(a[i]) * b[i] * c[i];
        n2 += std::norm(a[i]);
    }
    CHECK(std::abs(t.dotc(a.data(), b.data(), a.size()) - d) < 1e-12);
    CHECK(std::abs(t.dotc3(a.data(), b.data(), c.data(), a.size()) - d3) < 1e-12);
    CHECK(std::abs(t.norm2(a.data(), a.size()) - n2) < 1e-12);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const kernels::KernelTable* simd = kernels::avx2_table();
    if (!simd) {
        MESSAGE("AVX2 kernels unavailable on this build or CPU; equivalence not exercised");
        return;
    }
    const auto& ref = kernels::scalar_table();
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 33u, 1000u, 4097u}) {
        CAPTURE(n);
        const auto a = data(n, 10 + n), b = data(n, 20 + n), c = data(n, 30 + n);
        const double scale = std::max(1.0, static_cast<double>(n));
        CHECK(std::abs(simd->dotc(a.data(), b.data(), n) - ref.dotc(a.data(), b.data(), n)) < 1e-13 * scale);
        CHECK(std::abs(simd->dotc3(a.data(), b.data(), c.data(), n) - ref.dotc3(a.data(), b.data(), c.data(), n)) <
              1e-13 * scale);
        CHECK(std::abs(simd->norm2(a.data(), n) - ref.norm2(a.data(), n)) < 1e-13 * scale);

        auto y1 = b, y2 = b;
        const cplx alpha{0.3, -1.7};
        ref.axpy(alpha, a.data(), y1.data(), n);
        simd->axpy(alpha, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-14);

        std::vector<cplx> h1(n), h2(n);
        ref.hadamard(a.data(), b.data(), h1.data(), n);
        simd->hadamard(a.data(), b.data(), h2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(h1[i] - h2[i]) < 1e-14);

        auto alias = a;
        simd->hadamard(alias.data(), b.data(), alias.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(alias[i] - h1[i]) < 1e-14);
    }
}

TEST_CASE("active table is one of the known tables") {
    const auto& t = kernels::active();
    CHECK((t.name == kernels::scalar_table().name || (kernels::avx2_table() && t.name == kernels::avx2_table()->name)));
}
