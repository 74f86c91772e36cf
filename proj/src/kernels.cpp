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

#include <cstdlib>
#include <cstring>

namespace radar_lab::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable kScalar{"scalar", detail::dotc_scalar, detail::dotc3_scalar, detail::axpy_scalar,
                          detail::hadamard_scalar, detail::norm2_scalar};
const KernelTable kAvx2{"avx2", detail::dotc_avx2, detail::dotc3_avx2, detail::axpy_avx2,
                        detail::hadamard_avx2, detail::norm2_avx2};

const KernelTable& select() {
    if (const char* env = std::getenv("RADAR_LAB_SIMD"); env && std::strcmp(env, "scalar") == 0) return kScalar;
    if (const KernelTable* t = avx2_table()) return *t;
    return kScalar;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
    static const bool usable = detail::avx2_compiled() && cpu_has_avx2_fma();
    return usable ? &kAvx2 : nullptr;
}

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace radar_lab::kernels
