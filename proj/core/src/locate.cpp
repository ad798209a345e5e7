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

#include "elasto/locate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elasto/error.hpp"

namespace elasto {
namespace {

constexpr double kInsideTol = 1e-10;

Box element_box(const Mesh& mesh, std::size_t e) {
  Box b{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
        std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  for (int n : mesh.element(e)) {
    const Vec2 p = mesh.nodes[n];
    b.x_min = std::min(b.x_min, p.x);
    b.x_max = std::max(b.x_max, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

Vec2 centroid(const Mesh& mesh, std::size_t e) {
  Vec2 c{};
  const auto el = mesh.element(e);
  for (int n : el) c = c + mesh.nodes[n];
  return (1.0 / static_cast<double>(el.size())) * c;
}

}  // namespace

Locator::Locator(const Mesh& mesh, std::optional<Region> region) : mesh_(&mesh) {
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!region || mesh.regions[e] == *region) elements_.push_back(static_cast<int>(e));
  }
  if (elements_.empty()) throw InvalidArgument("locator has no elements to search");

  box_ = element_box(mesh, elements_.front());
  double mean_size = 0.0;
  std::vector<Box> boxes(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    boxes[i] = element_box(mesh, elements_[i]);
    box_.x_min = std::min(box_.x_min, boxes[i].x_min);
    box_.x_max = std::max(box_.x_max, boxes[i].x_max);
    box_.y_min = std::min(box_.y_min, boxes[i].y_min);
    box_.y_max = std::max(box_.y_max, boxes[i].y_max);
    mean_size += std::max(boxes[i].width(), boxes[i].height());
  }
  mean_size /= static_cast<double>(elements_.size());
  cell_ = std::max(mean_size, 1e-9);
  nx_ = std::clamp(static_cast<int>(std::ceil(box_.width() / cell_)), 1, 4096);
  ny_ = std::clamp(static_cast<int>(std::ceil(box_.height() / cell_)), 1, 4096);
  cell_ = std::max(box_.width() / nx_, box_.height() / ny_);
  if (!(cell_ > 0.0)) cell_ = 1e-9;

  auto range = [&](const Box& b, int& x0, int& x1, int& y0, int& y1) {
    x0 = std::clamp(static_cast<int>(std::floor((b.x_min - box_.x_min) / cell_)), 0, nx_ - 1);
    x1 = std::clamp(static_cast<int>(std::floor((b.x_max - box_.x_min) / cell_)), 0, nx_ - 1);
    y0 = std::clamp(static_cast<int>(std::floor((b.y_min - box_.y_min) / cell_)), 0, ny_ - 1);
    y1 = std::clamp(static_cast<int>(std::floor((b.y_max - box_.y_min) / cell_)), 0, ny_ - 1);
  };
  std::vector<int> counts(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (const Box& b : boxes) {
    int x0, x1, y0, y1;
    range(b, x0, x1, y0, y1);
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) ++counts[cell_index(cx, cy) + 1];
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  cell_start_ = counts;
  cell_items_.resize(static_cast<std::size_t>(counts.back()));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    int x0, x1, y0, y1;
    range(boxes[i], x0, x1, y0, y1);
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) cell_items_[counts[cell_index(cx, cy)]++] = elements_[i];
  }
}

bool Locator::local_coords(std::size_t e, Vec2 p, std::array<double, 4>& shape, bool clamp) const {
  const Mesh& m = *mesh_;
  const auto el = m.element(e);
  if (m.kind == ElementKind::tri3) {
    const Vec2 p0 = m.nodes[el[0]], p1 = m.nodes[el[1]], p2 = m.nodes[el[2]];
    const double det = cross(p1 - p0, p2 - p0);
    double l1 = cross(p - p0, p2 - p0) / det;
    double l2 = cross(p1 - p0, p - p0) / det;
    double l0 = 1.0 - l1 - l2;
    const bool in = l0 >= -kInsideTol && l1 >= -kInsideTol && l2 >= -kInsideTol;
    if (clamp && !in) {
      l0 = std::max(l0, 0.0);
      l1 = std::max(l1, 0.0);
      l2 = std::max(l2, 0.0);
      const double s = l0 + l1 + l2;
      l0 /= s;
      l1 /= s;
      l2 /= s;
    }
    shape = {l0, l1, l2, 0.0};
    return in;
  }
  // Inverse bilinear map by Newton iteration from the element center.
  static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  double xi = 0.0, eta = 0.0;
  for (int it = 0; it < 20; ++it) {
    double fx = -p.x, fy = -p.y, j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (int a = 0; a < 4; ++a) {
      const Vec2 q = m.nodes[el[a]];
      const double n = 0.25 * (1 + sx[a] * xi) * (1 + sy[a] * eta);
      const double dxi = 0.25 * sx[a] * (1 + sy[a] * eta);
      const double deta = 0.25 * sy[a] * (1 + sx[a] * xi);
      fx += n * q.x;
      fy += n * q.y;
      j11 += dxi * q.x;
      j12 += deta * q.x;
      j21 += dxi * q.y;
      j22 += deta * q.y;
    }
    const double det = j11 * j22 - j12 * j21;
    const double dxi = (j22 * fx - j12 * fy) / det;
    const double deta = (-j21 * fx + j11 * fy) / det;
    xi -= dxi;
    eta -= deta;
    if (std::abs(dxi) + std::abs(deta) < 1e-14) break;
  }
  const double tol = 1.0 + 1e-9;
  const bool in = std::abs(xi) <= tol && std::abs(eta) <= tol;
  if (clamp && !in) {
    xi = std::clamp(xi, -1.0, 1.0);
    eta = std::clamp(eta, -1.0, 1.0);
  }
  for (int a = 0; a < 4; ++a) shape[a] = 0.25 * (1 + sx[a] * xi) * (1 + sy[a] * eta);
  return in;
}

Location Locator::locate(Vec2 p) const {
  Location loc;
  if (p.x < box_.x_min - 1e-12 || p.x > box_.x_max + 1e-12 || p.y < box_.y_min - 1e-12 ||
      p.y > box_.y_max + 1e-12) {
    return loc;
  }
  const int cx = std::clamp(static_cast<int>(std::floor((p.x - box_.x_min) / cell_)), 0, nx_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((p.y - box_.y_min) / cell_)), 0, ny_ - 1);
  const std::size_t c = cell_index(cx, cy);
  int best = std::numeric_limits<int>::max();
  std::array<double, 4> shape{};
  for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
    const int e = cell_items_[k];
    if (e >= best) continue;
    if (local_coords(static_cast<std::size_t>(e), p, shape, false)) {
      best = e;
      loc.shape = shape;
    }
  }
  if (best != std::numeric_limits<int>::max()) {
    loc.element = best;
    loc.inside = true;
  }
  return loc;
}

Location Locator::locate_or_nearest(Vec2 p) const {
  Location loc = locate(p);
  if (loc) return loc;
  double best = std::numeric_limits<double>::max();
  for (int e : elements_) {
    const Vec2 d = centroid(*mesh_, static_cast<std::size_t>(e)) - p;
    const double dist = dot(d, d);
    if (dist < best) {
      best = dist;
      loc.element = e;
    }
  }
  local_coords(static_cast<std::size_t>(loc.element), p, loc.shape, true);
  loc.inside = false;
  return loc;
}

double Locator::interpolate(const NodalField& f, const Location& loc, int component) const {
  const auto el = mesh_->element(static_cast<std::size_t>(loc.element));
  double v = 0.0;
  for (std::size_t a = 0; a < el.size(); ++a) v += loc.shape[a] * f.at(el[a], component);
  return v;
}

Vec2 Locator::interpolate_vec(const NodalField& f, const Location& loc) const {
  return {interpolate(f, loc, 0), interpolate(f, loc, 1)};
}

}  // namespace elasto
