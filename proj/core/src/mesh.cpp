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

#include "elasto/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "elasto/error.hpp"

namespace elasto {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSweep = 4096;

double angle_of(Vec2 v) { return wrap_angle(std::atan2(v.y, v.x)); }

double angular_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

Vec2 polar(Vec2 c, double r, double theta) { return {c.x + r * std::cos(theta), c.y + r * std::sin(theta)}; }

// Intersection of the ray c + t*(cos, sin) with the box boundary, with the
// coordinate of the side that was hit set exactly.
Vec2 ray_box(Vec2 c, double theta, const Box& box) {
  const double dx = std::cos(theta), dy = std::sin(theta);
  double t = std::numeric_limits<double>::infinity();
  int side = -1;  // 0 left, 1 right, 2 bottom, 3 top
  if (dx > 1e-15) { const double s = (box.x_max - c.x) / dx; if (s < t) { t = s; side = 1; } }
  if (dx < -1e-15) { const double s = (box.x_min - c.x) / dx; if (s < t) { t = s; side = 0; } }
  if (dy > 1e-15) { const double s = (box.y_max - c.y) / dy; if (s < t) { t = s; side = 3; } }
  if (dy < -1e-15) { const double s = (box.y_min - c.y) / dy; if (s < t) { t = s; side = 2; } }
  Vec2 p{c.x + t * dx, c.y + t * dy};
  switch (side) {
    case 0: p.x = box.x_min; break;
    case 1: p.x = box.x_max; break;
    case 2: p.y = box.y_min; break;
    case 3: p.y = box.y_max; break;
    default: break;
  }
  p.x = std::clamp(p.x, box.x_min, box.x_max);
  p.y = std::clamp(p.y, box.y_min, box.y_max);
  return p;
}

double outer_wall(const VesselSpec& s, double theta) { return radius_at(s, theta) + thickness_at(s, theta); }

}  // namespace

std::string to_string(ElementKind kind) { return kind == ElementKind::tri3 ? "tri3" : "quad4"; }

ElementKind element_kind_from_string(const std::string& s) {
  if (s == "tri3") return ElementKind::tri3;
  if (s == "quad4") return ElementKind::quad4;
  throw InvalidArgument("unknown element kind '" + s + "'");
}

double Mesh::element_area(std::size_t e) const {
  const auto el = element(e);
  double a = 0.0;
  for (std::size_t i = 0; i < el.size(); ++i) {
    a += cross(nodes[el[i]], nodes[el[(i + 1) % el.size()]]);
  }
  return 0.5 * a;
}

double Mesh::min_corner_jacobian(std::size_t e) const {
  const auto el = element(e);
  const std::size_t n = el.size();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = nodes[el[i]];
    const Vec2 next = nodes[el[(i + 1) % n]];
    const Vec2 prev = nodes[el[(i + n - 1) % n]];
    m = std::min(m, cross(next - p, prev - p));
  }
  return m;
}

double Mesh::region_area(Region r) const {
  double a = 0.0;
  for (std::size_t e = 0; e < element_count(); ++e) {
    if (regions[e] == r) a += element_area(e);
  }
  return a;
}

std::vector<char> Mesh::vessel_node_mask() const {
  std::vector<char> mask(node_count(), 0);
  for (std::size_t e = 0; e < element_count(); ++e) {
    if (regions[e] != Region::vessel) continue;
    for (int n : element(e)) mask[n] = 1;
  }
  return mask;
}

namespace {
std::vector<int> loop_nodes(const std::vector<BoundaryEdge>& edges) {
  std::vector<int> out;
  out.reserve(edges.size());
  for (const auto& ed : edges) out.push_back(ed.a);
  return out;
}
}  // namespace

std::vector<int> Mesh::outer_nodes() const { return loop_nodes(outer_edges); }
std::vector<int> Mesh::lumen_nodes() const { return loop_nodes(lumen_edges); }

Box Mesh::bounding_box() const {
  Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& p : nodes) {
    b.x_min = std::min(b.x_min, p.x);
    b.x_max = std::max(b.x_max, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

Vec2 Mesh::vessel_centroid() const {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t e = 0; e < element_count(); ++e) {
    if (regions[e] != Region::vessel) continue;
    const auto el = element(e);
    const double ae = element_area(e);
    Vec2 m{};
    for (int n : el) m = m + nodes[n];
    m = (1.0 / static_cast<double>(el.size())) * m;
    a += ae;
    cx += ae * m.x;
    cy += ae * m.y;
  }
  return a > 0.0 ? Vec2{cx / a, cy / a} : vessel_center;
}

Box vessel_window(const VesselSpec& spec, double margin) {
  double rmax = 0.0;
  for (int k = 0; k < kSweep; ++k) rmax = std::max(rmax, outer_wall(spec, kTwoPi * k / kSweep));
  const Vec2 c = vessel_center(spec);
  const double half = rmax + margin;
  return {c.x - half, c.x + half, c.y - half, c.y + half};
}

Mesh build_mesh(const VesselSpec& spec, double target_h, ElementKind kind) {
  MeshOptions o;
  o.kind = kind;
  o.target_h = target_h;
  return build_mesh(spec, o);
}

Mesh build_mesh(const VesselSpec& spec, const MeshOptions& opt) {
  if (!(opt.target_h > 0.0)) throw InvalidArgument("target_h must be positive");
  const Box box = opt.outer.value_or(kTissueDomain);
  const Vec2 c = vessel_center(spec);
  const double h = opt.target_h;

  // Dense sweep of the wall: validity, outer arc length, gaps to the box.
  std::vector<double> sweep_theta(kSweep + 1), arc(kSweep + 1, 0.0);
  double max_thick = 0.0, gap_sum = 0.0;
  Vec2 prev{};
  for (int k = 0; k <= kSweep; ++k) {
    const double t = kTwoPi * k / kSweep;
    sweep_theta[k] = t;
    const double r = radius_at(spec, t);
    const double th = thickness_at(spec, t);
    if (!(r > 0.0) || !(th > 0.0)) throw MeshingError("degenerate vessel contour", spec.rng_seed);
    const Vec2 po = polar(c, r + th, t);
    if (!(po.x > box.x_min && po.x < box.x_max && po.y > box.y_min && po.y < box.y_max)) {
      throw MeshingError("vessel wall leaves the mesh domain", spec.rng_seed);
    }
    const double gap = norm(ray_box(c, t, box) - po);
    if (gap < 0.5 * h) throw MeshingError("vessel wall too close to the outer boundary", spec.rng_seed);
    if (k < kSweep) gap_sum += gap;
    max_thick = std::max(max_thick, th);
    if (k > 0) arc[k] = arc[k - 1] + norm(po - prev);
    prev = po;
  }
  const double perimeter = arc[kSweep];
  const double mean_gap = gap_sum / kSweep;

  const int n_theta = opt.angular_divisions > 0
                          ? opt.angular_divisions
                          : std::max(24, static_cast<int>(std::ceil(perimeter / h)));
  const int n_wall = opt.vessel_layers > 0 ? opt.vessel_layers
                                           : std::max(2, static_cast<int>(std::ceil(max_thick / h)));
  const double q = opt.background_growth;
  if (!(q >= 1.0)) throw InvalidArgument("background_growth must be >= 1");
  int n_bg = opt.background_layers;
  if (n_bg <= 0) {
    n_bg = q == 1.0 ? static_cast<int>(std::ceil(mean_gap / h))
                    : static_cast<int>(std::ceil(std::log(1.0 + mean_gap * (q - 1.0) / h) / std::log(q)));
    n_bg = std::max(n_bg, 2);
  }

  // Ray angles: uniform in arc length of the outer wall.
  std::vector<double> theta(n_theta);
  {
    int j = 0;
    for (int k = 0; k < n_theta; ++k) {
      const double s = perimeter * k / n_theta;
      while (j + 1 < kSweep && arc[j + 1] <= s) ++j;
      const double seg = arc[j + 1] - arc[j];
      const double f = seg > 0.0 ? (s - arc[j]) / seg : 0.0;
      theta[k] = sweep_theta[j] + f * (sweep_theta[j + 1] - sweep_theta[j]);
    }
  }

  // Snap the nearest rays onto the box corners and edge midpoints.
  struct Special { Vec2 p; int tag; };  // tag: 0 corner, 1 top center, 2 bottom center
  const Special specials[] = {
      {{box.x_min, box.y_min}, 0}, {{box.x_max, box.y_min}, 0},
      {{box.x_max, box.y_max}, 0}, {{box.x_min, box.y_max}, 0},
      {{0.5 * (box.x_min + box.x_max), box.y_max}, 1},
      {{0.5 * (box.x_min + box.x_max), box.y_min}, 2}};
  std::vector<int> snapped(n_theta, -1);
  for (int s = 0; s < 6; ++s) {
    const double phi = angle_of(specials[s].p - c);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_theta; ++k) {
      const double d = angular_distance(theta[k], phi);
      if (snapped[k] < 0 && d < best_d) { best_d = d; best = k; }
    }
    if (best < 0) throw MeshingError("too few angular divisions for the box", spec.rng_seed);
    // Keep k = 0 the smallest angle so rays stay sorted after wrapping.
    theta[best] = phi;
    if (best == 0 && phi > theta[1]) theta[best] = phi - kTwoPi;
    if (best == n_theta - 1 && phi < theta[n_theta - 2]) theta[best] = phi + kTwoPi;
    snapped[best] = s;
  }
  for (int k = 0; k + 1 < n_theta; ++k) {
    if (!(theta[k + 1] > theta[k])) throw MeshingError("angular rays out of order", spec.rng_seed);
  }

  const int n_layers = n_wall + n_bg;  // element layers per ray
  const int per_ray = n_layers + 1;
  Mesh mesh;
  mesh.kind = opt.kind;
  mesh.vessel_center = c;
  mesh.spec_seed = spec.rng_seed;
  mesh.nodes.resize(static_cast<std::size_t>(n_theta) * per_ray);
  auto node_id = [&](int k, int j) { return ((k % n_theta + n_theta) % n_theta) * per_ray + j; };

  std::vector<double> s_bg(n_bg + 1);
  for (int j = 0; j <= n_bg; ++j) {
    s_bg[j] = q == 1.0 ? static_cast<double>(j) / n_bg : (std::pow(q, j) - 1.0) / (std::pow(q, n_bg) - 1.0);
  }
  s_bg[n_bg] = 1.0;

  for (int k = 0; k < n_theta; ++k) {
    const double t = theta[k];
    const double r = radius_at(spec, t);
    const double th = thickness_at(spec, t);
    for (int j = 0; j <= n_wall; ++j) {
      mesh.nodes[node_id(k, j)] = polar(c, r + th * static_cast<double>(j) / n_wall, t);
    }
    const Vec2 wall = mesh.nodes[node_id(k, n_wall)];
    const Vec2 edge = snapped[k] >= 0 ? specials[snapped[k]].p : ray_box(c, t, box);
    for (int j = 1; j <= n_bg; ++j) {
      mesh.nodes[node_id(k, n_wall + j)] = j == n_bg ? edge : wall + s_bg[j] * (edge - wall);
    }
    if (snapped[k] >= 0 && specials[snapped[k]].tag == 1) mesh.node_sets.top_center = node_id(k, n_layers);
    if (snapped[k] >= 0 && specials[snapped[k]].tag == 2) mesh.node_sets.bottom_center = node_id(k, n_layers);
  }

  const int npe = opt.kind == ElementKind::tri3 ? 3 : 4;
  const std::size_t n_quads = static_cast<std::size_t>(n_theta) * n_layers;
  mesh.connectivity.reserve(n_quads * (npe == 3 ? 6 : 4));
  mesh.regions.reserve(n_quads * (npe == 3 ? 2 : 1));
  for (int k = 0; k < n_theta; ++k) {
    for (int j = 0; j < n_layers; ++j) {
      const int a = node_id(k, j), b = node_id(k, j + 1), cc = node_id(k + 1, j + 1), d = node_id(k + 1, j);
      const Region reg = j < n_wall ? Region::vessel : Region::background;
      if (npe == 4) {
        mesh.connectivity.insert(mesh.connectivity.end(), {a, b, cc, d});
        mesh.regions.push_back(reg);
      } else if ((k + j) % 2 == 0) {
        mesh.connectivity.insert(mesh.connectivity.end(), {a, b, cc, a, cc, d});
        mesh.regions.insert(mesh.regions.end(), {reg, reg});
      } else {
        mesh.connectivity.insert(mesh.connectivity.end(), {a, b, d, b, cc, d});
        mesh.regions.insert(mesh.regions.end(), {reg, reg});
      }
    }
  }
  for (int k = 0; k < n_theta; ++k) {
    mesh.lumen_edges.push_back({node_id(k + 1, 0), node_id(k, 0)});
    mesh.outer_edges.push_back({node_id(k, n_layers), node_id(k + 1, n_layers)});
  }
  for (int k = 0; k < n_theta; ++k) {
    const int n = node_id(k, n_layers);
    if (mesh.nodes[n].y == box.y_max) mesh.node_sets.top_edge.push_back(n);
    if (mesh.nodes[n].y == box.y_min) mesh.node_sets.bottom_edge.push_back(n);
  }

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!(mesh.min_corner_jacobian(e) > 0.0)) {
      throw MeshingError("inverted element produced", spec.rng_seed);
    }
  }
  return mesh;
}

}  // namespace elasto
