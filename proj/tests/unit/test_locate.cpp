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

#include <doctest.h>

#include "elasto/error.hpp"
#include "elasto/locate.hpp"
#include "elasto/mesh.hpp"
#include "elasto/rng.hpp"

using namespace elasto;

TEST_SUITE("locate") {
  TEST_CASE("located points reproduce linear fields") {
    const VesselSpec spec = sample_vessel_spec(12);
    for (ElementKind kind : {ElementKind::tri3, ElementKind::quad4}) {
      const Mesh m = build_mesh(spec, 2.5e-3, kind);
      const Locator loc(m);
      NodalField f(2, m.node_count());
      for (std::size_t n = 0; n < m.node_count(); ++n) {
        f.at(n, 0) = 1.0 + 4.0 * m.nodes[n].x;
        f.at(n, 1) = 2.0 * m.nodes[n].x - 5.0 * m.nodes[n].y;
      }
      const Box b = m.bounding_box();
      CounterRng rng(3);
      int hits = 0;
      for (int i = 0; i < 2000; ++i) {
        const Vec2 p{rng.uniform(b.x_min, b.x_max), rng.uniform(b.y_min, b.y_max)};
        const Location l = loc.locate(p);
        if (!l) continue;
        ++hits;
        REQUIRE(l.inside);
        double sum = 0.0;
        for (int k = 0; k < m.nodes_per_element(); ++k) sum += l.shape[k];
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
        const Vec2 v = loc.interpolate_vec(f, l);
        REQUIRE(v.x == doctest::Approx(1.0 + 4.0 * p.x).epsilon(1e-10));
        REQUIRE(v.y == doctest::Approx(2.0 * p.x - 5.0 * p.y).epsilon(1e-10));
      }
      // The lumen is the only hole in a full-domain mesh.
      CHECK(hits > 1900);
      CHECK_FALSE(loc.locate(vessel_center(spec)));
      const Location near = loc.locate_or_nearest(vessel_center(spec));
      CHECK(near);
      CHECK_FALSE(near.inside);
    }
  }

  TEST_CASE("nodes locate to an adjacent element and region filters apply") {
    const VesselSpec spec;
    const Mesh m = build_mesh(spec, 3e-3, ElementKind::tri3);
    const Locator all(m);
    const Locator vessel(m, Region::vessel);
    for (std::size_t e = 0; e < m.element_count(); e += 7) {
      const auto conn = m.element(e);
      Vec2 c{};
      for (int n : conn) c = c + (1.0 / static_cast<double>(conn.size())) * m.nodes[n];
      const Location l = all.locate(c);
      REQUIRE(l.element == static_cast<int>(e));
      const Location v = vessel.locate(c);
      if (m.regions[e] == Region::vessel) {
        REQUIRE(v.element == static_cast<int>(e));
      } else {
        REQUIRE_FALSE(v);
      }
    }
  }

  TEST_CASE("lowest element index wins on shared edges") {
    const Mesh m = build_mesh(VesselSpec{}, 3e-3, ElementKind::quad4);
    const Locator loc(m);
    const auto conn = m.element(5);
    const Vec2 mid = 0.5 * (m.nodes[conn[0]] + m.nodes[conn[1]]);
    const Location a = loc.locate(mid);
    const Location b = loc.locate(mid);
    CHECK(a.element == b.element);
    CHECK(a.element <= 5);
  }
}
