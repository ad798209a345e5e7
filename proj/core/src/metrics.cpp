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

#include "elasto/metrics.hpp"

#include <cmath>
#include <cstdlib>

#include "elasto/error.hpp"
#include "elasto/fem.hpp"

namespace elasto {

double nmse(const Image& truth, const Image& pred) {
  if (!truth.same_shape(pred)) throw InvalidArgument("nmse needs images of the same shape");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth.data[i] - pred.data[i];
    num += d * d;
    den += truth.data[i] * truth.data[i];
  }
  if (!(den > 0.0)) throw InvalidArgument("nmse is undefined for an all-zero reference");
  return num / den;
}

Image threshold_mask(const Image& modulus) {
  Image m(modulus.rows, modulus.cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = modulus.data[i] > 0.0 ? 1.0 : 0.0;
  return m;
}

double dsc(const Image& mask_t, const Image& mask_p) {
  if (!mask_t.same_shape(mask_p)) throw InvalidArgument("dsc needs masks of the same shape");
  std::size_t t = 0, p = 0, both = 0;
  for (std::size_t i = 0; i < mask_t.size(); ++i) {
    const bool a = mask_t.data[i] != 0.0, b = mask_p.data[i] != 0.0;
    t += a;
    p += b;
    both += a && b;
  }
  if (t + p == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(t + p);
}

std::string to_string(Quadrant q) {
  switch (q) {
    case Quadrant::upper: return "upper";
    case Quadrant::lower: return "lower";
    case Quadrant::left: return "left";
    case Quadrant::right: return "right";
  }
  return "upper";
}

Quadrant quadrant_of(int row, int col, int rows, int cols) {
  // Offsets from the image center in units where the diagonals are |a| = |b|.
  const double a = (col + 0.5 - 0.5 * cols) / cols;
  const double b = (row + 0.5 - 0.5 * rows) / rows;
  if (std::abs(a) <= std::abs(b)) return b < 0.0 ? Quadrant::upper : Quadrant::lower;
  return a < 0.0 ? Quadrant::left : Quadrant::right;
}

QuadrantRatio quadrant_modular_ratio(const Image& modulus, const Image& mask) {
  if (!modulus.same_shape(mask)) throw InvalidArgument("modulus and mask differ in shape");
  std::array<double, 4> sum{}, sum2{};
  std::array<std::size_t, 4> count{};
  for (int r = 0; r < modulus.rows; ++r) {
    for (int c = 0; c < modulus.cols; ++c) {
      if (mask(r, c) == 0.0) continue;
      const int q = static_cast<int>(quadrant_of(r, c, modulus.rows, modulus.cols));
      sum[q] += modulus(r, c);
      ++count[q];
    }
  }
  QuadrantRatio out;
  for (int q = 0; q < 4; ++q) {
    out.stats[q].region = static_cast<Quadrant>(q);
    out.stats[q].pixel_count = count[q];
    out.stats[q].mean = count[q] ? sum[q] / static_cast<double>(count[q]) : 0.0;
  }
  // Second pass for a numerically stable spread.
  for (int r = 0; r < modulus.rows; ++r) {
    for (int c = 0; c < modulus.cols; ++c) {
      if (mask(r, c) == 0.0) continue;
      const int q = static_cast<int>(quadrant_of(r, c, modulus.rows, modulus.cols));
      const double d = modulus(r, c) - out.stats[q].mean;
      sum2[q] += d * d;
    }
  }
  for (int q = 0; q < 4; ++q) {
    out.stats[q].std = count[q] ? std::sqrt(sum2[q] / static_cast<double>(count[q])) : 0.0;
  }
  const auto& up = out[Quadrant::upper];
  const auto& low = out[Quadrant::lower];
  if (up.pixel_count == 0 || low.pixel_count == 0) {
    throw InvalidArgument("modular ratio needs masked pixels in both the upper and lower regions");
  }
  if (low.mean == 0.0) throw InvalidArgument("lower region has zero mean modulus");
  out.eta = up.mean / low.mean;
  return out;
}

double pressure_normalized_principal_strain(const NodalField& u, const Mesh& mesh, double pulse_pressure) {
  if (!(pulse_pressure > 0.0)) throw InvalidArgument("pulse pressure must be positive");
  const auto eps = element_principal_strain(mesh, u);
  double sum = 0.0, area = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (mesh.regions[e] != Region::vessel) continue;
    const double a = mesh.element_area(e);
    sum += a * eps[e];
    area += a;
  }
  if (!(area > 0.0)) throw InvalidArgument("mesh has no vessel elements");
  return sum / area / pulse_pressure;
}

}  // namespace elasto
