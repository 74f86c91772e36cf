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

#include <complex>
#include <span>

namespace radar_lab::fft {

// Unnormalized DFTs backed by FFTW. Plans are created once per length and
// shared; execution is safe from many threads. `in` and `out` must not alias.
//   forward: out[k] = sum_m in[m] exp(-j 2 pi k m / n)
//   inverse: out[m] = sum_k in[k] exp(+j 2 pi k m / n)
void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

}  // namespace radar_lab::fft
