/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The elasto Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <vector>

#include "elasto/mesh.hpp"
#include "elasto/ussim.hpp"

namespace elasto {

struct RegistrationConfig {
  /// Weight of the equilibrium penalty relative to the normalized data term.
  double alpha = 3e-4;
  double nu = 0.45;
  /// Pyramid levels; level k (0 = finest) works on an envelope blurred and
  /// subsampled by 2^k, the finest level on the raw RF.
  int levels = 3;
  int max_iterations = 200;
  /// A level ends when the functional decreases by less than this fraction
  /// over three successive iterations.
  double tolerance = 1e-6;
  int memory = 10;
  /// Smoothing of the L1 norm of the equilibrium residual.
  double epsilon = 1e-8;
};

struct RegistrationLevel {
  int factor = 1;
  int iterations = 0;
  double initial = 0.0;
  double final_value = 0.0;
  double data_term = 0.0;
  double penalty_term = 0.0;
  std::size_t points = 0;
};

struct RegistrationReport {
  std::vector<RegistrationLevel> levels;  // coarse to fine
  double functional = 0.0;
};

/// Estimates the nodal displacement u (m) that maps the fixed frame onto the
/// moving one, fixed(x) ~ moving(x + u(x)), at the sample positions covered
/// by `mesh` (the lumen is a hole, so blood is excluded). The functional is a
/// normalized squared intensity residual plus alpha times a smoothed L1 norm
/// of the nodal equilibrium residual K u of a homogeneous plane-strain solid,
/// evaluated at interior nodes. Throws ConvergenceError when a level cannot
/// decrease the functional from a point with nonzero gradient.
NodalField register_pair(const RFImage& fixed, const RFImage& moving, const Mesh& mesh,
                         const RegistrationConfig& cfg = {}, RegistrationReport* report = nullptr);

}  // namespace elasto
