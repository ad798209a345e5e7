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

#include <array>
#include <string>

#include "elasto/grid.hpp"
#include "elasto/mesh.hpp"

namespace elasto {

/// sum (truth - pred)^2 / sum truth^2 over all pixels.
double nmse(const Image& truth, const Image& pred);

/// Binary mask of pixels with modulus > 0.
Image threshold_mask(const Image& modulus);

/// Dice coefficient 2|t & p| / (|t| + |p|) of masks (nonzero = set);
/// two empty masks agree perfectly (1).
double dsc(const Image& mask_t, const Image& mask_p);

enum class Quadrant { upper, lower, left, right };
std::string to_string(Quadrant q);

/// Region of pixel (row, col) under the split by the two image diagonals.
/// Pixels on a diagonal go to upper or lower, so the four regions partition
/// the image.
Quadrant quadrant_of(int row, int col, int rows, int cols);

struct RegionStats {
  Quadrant region = Quadrant::upper;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t pixel_count = 0;
};

struct QuadrantRatio {
  double eta = 0.0;
  std::array<RegionStats, 4> stats{};  // indexed by Quadrant

  const RegionStats& operator[](Quadrant q) const { return stats[static_cast<int>(q)]; }
};

/// mean(upper) / mean(lower) over the masked pixels of each region.
QuadrantRatio quadrant_modular_ratio(const Image& modulus, const Image& mask);

/// Area-weighted mean of the per-element maximum principal strain over the
/// vessel elements, divided by the pulse pressure.
double pressure_normalized_principal_strain(const NodalField& u, const Mesh& mesh, double pulse_pressure);

}  // namespace elasto
