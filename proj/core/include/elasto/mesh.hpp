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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elasto/geometry.hpp"
#include "elasto/vessel.hpp"

namespace elasto {

enum class ElementKind : std::uint8_t { tri3, quad4 };
enum class Region : std::uint8_t { vessel = 0, background = 1 };

std::string to_string(ElementKind kind);
ElementKind element_kind_from_string(const std::string& s);

/// Boundary edge oriented so that the solid lies on its left.
struct BoundaryEdge {
  int a = 0;
  int b = 0;
};

struct NodeSets {
  int top_center = -1;
  int bottom_center = -1;
  std::vector<int> top_edge;
  std::vector<int> bottom_edge;
};

/// Two-region conforming mesh: the vessel wall (tagged `vessel`) surrounded by
/// tissue (tagged `background`); the lumen is a hole. Elements are listed
/// counter-clockwise.
struct Mesh {
  ElementKind kind = ElementKind::tri3;
  std::vector<Vec2> nodes;
  std::vector<int> connectivity;
  std::vector<Region> regions;
  std::vector<BoundaryEdge> lumen_edges;  // Gamma_P, one closed loop
  std::vector<BoundaryEdge> outer_edges;  // Gamma_o, one closed loop
  NodeSets node_sets;
  Vec2 vessel_center{};
  std::uint64_t spec_seed = 0;

  int nodes_per_element() const noexcept { return kind == ElementKind::tri3 ? 3 : 4; }
  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t element_count() const noexcept { return regions.size(); }
  std::span<const int> element(std::size_t e) const noexcept {
    const auto n = static_cast<std::size_t>(nodes_per_element());
    return {connectivity.data() + e * n, n};
  }

  double element_area(std::size_t e) const;
  /// Smallest corner Jacobian determinant (twice the corner triangle area).
  double min_corner_jacobian(std::size_t e) const;
  double region_area(Region r) const;
  /// 1 for nodes that belong to at least one vessel element.
  std::vector<char> vessel_node_mask() const;
  /// Distinct nodes of the outer loop, in loop order.
  std::vector<int> outer_nodes() const;
  /// Distinct nodes of the lumen loop, in loop order.
  std::vector<int> lumen_nodes() const;
  Box bounding_box() const;
  /// Area-weighted centroid of the vessel elements.
  Vec2 vessel_centroid() const;
};

/// Per-node scalar or vector values; vector components are interleaved
/// (x0, y0, x1, y1, ...). Units depend on use: displacement in meters,
/// modulus in pascals, unitless for the reconstruction modulus.
struct NodalField {
  int components = 1;
  std::vector<double> values;

  NodalField() = default;
  NodalField(int comps, std::size_t nodes, double fill = 0.0)
      : components(comps), values(static_cast<std::size_t>(comps) * nodes, fill) {}

  std::size_t node_count() const noexcept { return values.size() / static_cast<std::size_t>(components); }
  double& at(std::size_t node, int comp = 0) { return values[node * components + comp]; }
  double at(std::size_t node, int comp = 0) const { return values[node * components + comp]; }
  Vec2 vec(std::size_t node) const { return {values[2 * node], values[2 * node + 1]}; }
};

struct MeshOptions {
  ElementKind kind = ElementKind::tri3;
  double target_h = 1.5e-3;
  /// Outer boundary; the full tissue domain when unset.
  std::optional<Box> outer;
  /// Thickness ratio of successive background layers (1 = uniform).
  double background_growth = 1.15;
  /// Explicit counts override the values derived from target_h when > 0.
  int angular_divisions = 0;
  int vessel_layers = 0;
  int background_layers = 0;
};

/// Structured O-grid mesh of the vessel wall and the surrounding tissue. All
/// mesh lines between wall and outer boundary are rays from the vessel
/// center, so elements stay convex for any star-shaped wall. The four box
/// corners and the top/bottom edge midpoints are always mesh nodes.
Mesh build_mesh(const VesselSpec& spec, const MeshOptions& options);
Mesh build_mesh(const VesselSpec& spec, double target_h, ElementKind kind);

/// Square window centered on the vessel, large enough for the outer wall plus `margin`.
Box vessel_window(const VesselSpec& spec, double margin);

/// Target element size giving a mean quad area close to 2.7 mm^2 on a
/// reconstruction window.
inline constexpr double kReconstructionElementSize = 1.35e-3;

}  // namespace elasto
