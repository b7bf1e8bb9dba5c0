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

#ifndef NBREC_LOSS_HPP_
#define NBREC_LOSS_HPP_

#include <string>

namespace nbrec {

enum class LossKind { kAbsolute, kSquared, kCrossEntropy };

LossKind parse_loss_kind(const std::string& s);
std::string to_string(LossKind kind);

// delta(pred, target). Cross-entropy expects pred in (0, 1) and clamps it
// away from the boundary.
double pointwise_loss(LossKind kind, double pred, double target);
// Partial derivatives of delta with respect to pred and to target.
double loss_dpred(LossKind kind, double pred, double target);
double loss_dtarget(LossKind kind, double pred, double target);

}  // namespace nbrec

#endif  // NBREC_LOSS_HPP_
