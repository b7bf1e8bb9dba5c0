/*
 * Copyright 2026 The nbrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NBREC_KERNELS_HPP_
#define NBREC_KERNELS_HPP_

#include <span>
#include <string>
#include <vector>

namespace nbrec {

// kExactMatch is the indicator pseudo-kernel for discrete g: weight 1 when
// every coordinate matches, 0 otherwise, with no bandwidth factor.
enum class KernelFamily { kGaussian, kEpanechnikov, kExactMatch };

KernelFamily parse_kernel_family(const std::string& s);
std::string to_string(KernelFamily family);

// K(t). Not defined for kExactMatch.
double kernel_eval(KernelFamily family, double t);

// Second moment of K.
double kernel_mu2(KernelFamily family);
// Integral of K squared, equal to kernel_convolution(family, 0).
double kernel_roughness(KernelFamily family);
// Integral of K(t) K(u + t) dt.
double kernel_convolution(KernelFamily family, double u);

struct KernelSpec {
  KernelFamily family = KernelFamily::kEpanechnikov;
  std::vector<double> bandwidth{1.0};

  static KernelSpec exact_match(size_t dim = 1) {
    return {KernelFamily::kExactMatch, std::vector<double>(dim, 1.0)};
  }
  void validate() const;
};

// prod_s K((g_pair_s - g_s) / h_s) / prod_s h_s.
double kernel_weight(const KernelSpec& spec, std::span<const double> g_pair,
                     std::span<const double> g);

}  // namespace nbrec

#endif  // NBREC_KERNELS_HPP_
