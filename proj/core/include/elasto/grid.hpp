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

#include <cstdint>
#include <string>
#include <vector>

#include "elasto/geometry.hpp"

namespace elasto {

/// Dense row-major 2D array. Row 0 is the transducer side (largest depth
/// coordinate), column 0 the most negative lateral position.
struct Image {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Image() = default;
  Image(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Image& o) const noexcept { return rows == o.rows && cols == o.cols; }
};

/// Regular pixel grid in physical coordinates.
struct GridSpec {
  int width = 128;
  int height = 128;
  double pitch = 0.86e-3;  // meters
  /// Center of pixel (row 0, col 0).
  Vec2 origin{};

  Vec2 pixel_center(int row, int col) const noexcept {
    return {origin.x + col * pitch, origin.y - row * pitch};
  }
  Vec2 center() const noexcept {
    return {origin.x + 0.5 * (width - 1) * pitch, origin.y - 0.5 * (height - 1) * pitch};
  }

  /// Grid of the given shape whose center coincides with `center`.
  static GridSpec centered_on(Vec2 center, int width = 128, int height = 128, double pitch = 0.86e-3);
};

enum class Provenance : std::uint8_t { generated, comsol_style, registered };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// Co-registered images of one sample: pressure-normalized displacements
/// (m/Pa), shear modulus (Pa) and the vessel mask, all zero outside the mask.
struct GridSample {
  GridSpec grid;
  Image ux;
  Image uy;
  Image mu;
  Image mask;
  double pressure = 0.0;  // Pa
  std::uint64_t spec_seed = 0;
  Provenance provenance = Provenance::generated;
  /// Integer translation applied after gridding (columns, rows).
  int shift_col = 0;
  int shift_row = 0;
  /// Global dataset index, or -1 outside a dataset.
  std::int64_t index = -1;
};

}  // namespace elasto
