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
#include <optional>
#include <vector>

#include "elasto/mesh.hpp"

namespace elasto {

/// Element containing a point plus the shape-function values there.
struct Location {
  int element = -1;
  std::array<double, 4> shape{};
  /// False when the point lies in no element and the nearest one was used.
  bool inside = false;

  explicit operator bool() const noexcept { return element >= 0; }
};

/// Uniform bucket grid over element bounding boxes. Queries return the
/// lowest-index element that contains the point, so results do not depend on
/// query order or threading.
class Locator {
 public:
  /// Restricts the search to elements of `region` when given.
  explicit Locator(const Mesh& mesh, std::optional<Region> region = std::nullopt);

  /// Containing element, or an empty Location.
  Location locate(Vec2 p) const;

  /// Containing element; otherwise the element with the nearest centroid,
  /// with local coordinates clamped onto it.
  Location locate_or_nearest(Vec2 p) const;

  double interpolate(const NodalField& f, const Location& loc, int component = 0) const;
  Vec2 interpolate_vec(const NodalField& f, const Location& loc) const;

  const Mesh& mesh() const noexcept { return *mesh_; }

 private:
  bool local_coords(std::size_t e, Vec2 p, std::array<double, 4>& shape, bool clamp) const;
  std::size_t cell_index(int cx, int cy) const noexcept { return static_cast<std::size_t>(cy) * nx_ + cx; }

  const Mesh* mesh_;
  std::vector<int> elements_;
  Box box_{};
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> cell_start_;
  std::vector<int> cell_items_;
};

}  // namespace elasto
