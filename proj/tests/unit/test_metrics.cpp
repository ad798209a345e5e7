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

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "elasto/datagen.hpp"
#include "elasto/error.hpp"
#include "elasto/fem.hpp"
#include "elasto/metrics.hpp"
#include "elasto/rng.hpp"

using namespace elasto;

namespace {

std::string three_sig(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Fills every masked pixel of a region with its value.
Image region_image(const std::array<double, 4>& values, int rows = 128, int cols = 128) {
  Image img(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) img(r, c) = values[static_cast<int>(quadrant_of(r, c, rows, cols))];
  }
  return img;
}

Image random_image(std::uint64_t seed, double lo, double hi) {
  CounterRng rng(seed);
  Image img(128, 128);
  for (double& v : img.data) v = rng.uniform(lo, hi);
  return img;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("nmse") {
    const Image a = random_image(1, 0.5, 2.0);
    CHECK(nmse(a, a) == 0.0);
    CHECK(nmse(Image(128, 128, 1.0), Image(128, 128, 1.1)) == doctest::Approx(0.01).epsilon(1e-12));
    const Image b = random_image(2, 0.5, 2.0);
    for (double s : {-3.0, 1e-3, 250.0}) {
      Image as = a, bs = b;
      for (double& v : as.data) v *= s;
      for (double& v : bs.data) v *= s;
      CHECK(nmse(as, bs) == doctest::Approx(nmse(a, b)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(nmse(Image(4, 4), Image(4, 4, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(nmse(Image(4, 4, 1.0), Image(4, 5, 1.0)), InvalidArgument);
  }

  TEST_CASE("dsc") {
    Image t(128, 128), p(128, 128);
    for (int k = 0; k < 4; ++k) t(10, 10 + k) = 1.0;
    p(10, 10) = p(10, 11) = 1.0;
    CHECK(three_sig(dsc(t, p)) == "0.667");
    CHECK(dsc(t, p) == dsc(p, t));
    CHECK(dsc(t, t) == 1.0);
    Image q(128, 128);
    q(50, 50) = 1.0;
    CHECK(dsc(t, q) == 0.0);
    CHECK(dsc(Image(128, 128), Image(128, 128)) == 1.0);
    CHECK(dsc(Image(128, 128), q) == 0.0);
    const Image m = threshold_mask(random_image(3, -1.0, 1.0));
    const Image n = threshold_mask(random_image(4, -1.0, 1.0));
    CHECK(dsc(m, n) == dsc(n, m));
  }

  TEST_CASE("quadrant partition") {
    for (auto [rows, cols] : {std::pair{128, 128}, std::pair{7, 7}, std::pair{6, 9}}) {
      std::array<std::size_t, 4> count{};
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) ++count[static_cast<int>(quadrant_of(r, c, rows, cols))];
      }
      CHECK(count[0] + count[1] + count[2] + count[3] == static_cast<std::size_t>(rows * cols));
      // The center pixel of an odd-sized image lies on both diagonals and goes to lower.
      const std::size_t center = (rows % 2 && cols % 2) ? 1 : 0;
      CHECK(count[0] + center == count[1]);
      CHECK(count[2] == count[3]);
    }
    CHECK(quadrant_of(0, 64, 128, 128) == Quadrant::upper);
    CHECK(quadrant_of(127, 64, 128, 128) == Quadrant::lower);
    CHECK(quadrant_of(64, 0, 128, 128) == Quadrant::left);
    CHECK(quadrant_of(64, 127, 128, 128) == Quadrant::right);
    // Diagonal pixels belong to upper/lower.
    CHECK(quadrant_of(0, 0, 128, 128) == Quadrant::upper);
    CHECK(quadrant_of(127, 127, 128, 128) == Quadrant::lower);
    CHECK(quadrant_of(127, 0, 128, 128) == Quadrant::lower);

    const Image mask = threshold_mask(random_image(5, -1.0, 1.0));
    const QuadrantRatio q = quadrant_modular_ratio(random_image(6, 1.0, 2.0), mask);
    std::size_t masked = 0;
    for (double v : mask.data) masked += v != 0.0;
    std::size_t sum = 0;
    for (const auto& s : q.stats) sum += s.pixel_count;
    CHECK(sum == masked);
  }

  TEST_CASE("modular ratio matches region means") {
    const Image mask(128, 128, 1.0);
    const double low = 17.4e3;
    for (auto [up, expect] : {std::pair{48.3e3, "2.78"}, std::pair{95.1e3, "5.47"}, std::pair{170e3, "9.77"},
                              std::pair{17.4e3, "1"}}) {
      const QuadrantRatio q = quadrant_modular_ratio(region_image({up, low, 30e3, 30e3}), mask);
      CHECK(three_sig(q.eta) == expect);
      CHECK(q[Quadrant::upper].mean == doctest::Approx(up));
      CHECK(q[Quadrant::lower].mean == doctest::Approx(low));
      CHECK(q[Quadrant::upper].std == doctest::Approx(0.0).epsilon(1e-9));
    }

    const Image mu = random_image(7, 1e3, 5e3);
    const Image mask2 = threshold_mask(random_image(8, -1.0, 3.0));
    const QuadrantRatio base = quadrant_modular_ratio(mu, mask2);
    Image scaled = mu;
    for (double& v : scaled.data) v *= 37.0;
    CHECK(quadrant_modular_ratio(scaled, mask2).eta == doctest::Approx(base.eta).epsilon(1e-12));

    // Population standard deviation against a direct two-value count.
    Image two(128, 128, 0.0);
    Image mask_up(128, 128, 0.0);
    int k = 0;
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) {
        if (quadrant_of(r, c, 128, 128) == Quadrant::upper) {
          two(r, c) = (k++ % 2) ? 3.0 : 1.0;
          mask_up(r, c) = 1.0;
        } else if (quadrant_of(r, c, 128, 128) == Quadrant::lower) {
          two(r, c) = 2.0;
          mask_up(r, c) = 1.0;
        }
      }
    }
    const QuadrantRatio t = quadrant_modular_ratio(two, mask_up);
    CHECK(t[Quadrant::upper].std == doctest::Approx(1.0));
    CHECK(t.eta == doctest::Approx(1.0));
  }

  TEST_CASE("modular ratio needs upper and lower pixels") {
    Image mask(128, 128);
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) mask(r, c) = quadrant_of(r, c, 128, 128) == Quadrant::upper ? 1.0 : 0.0;
    }
    CHECK_THROWS_AS(quadrant_modular_ratio(Image(128, 128, 1.0), mask), InvalidArgument);
    CHECK_THROWS_AS(quadrant_modular_ratio(Image(128, 128, 1.0), Image(128, 128)), InvalidArgument);
  }

  TEST_CASE("pressure-normalized principal strain") {
    const VesselSpec spec;
    const Mesh m = build_mesh(spec, 3e-3, ElementKind::tri3);
    const double eps = 2.5e-3;
    NodalField u(2, m.node_count());
    for (std::size_t n = 0; n < m.node_count(); ++n) u.at(n, 1) = eps * m.nodes[n].y;
    CHECK(pressure_normalized_principal_strain(u, m, 1.0) == doctest::Approx(eps).epsilon(1e-10));
    CHECK(pressure_normalized_principal_strain(u, m, 2.0) == pressure_normalized_principal_strain(u, m, 1.0) / 2.0);
    for (std::size_t n = 0; n < m.node_count(); ++n) u.at(n, 1) = -eps * m.nodes[n].y;
    CHECK(std::abs(pressure_normalized_principal_strain(u, m, 1.0)) <= 1e-15);
    CHECK_THROWS_AS(pressure_normalized_principal_strain(u, m, 0.0), InvalidArgument);
  }

  TEST_CASE("strain tracks stiffness across phantoms") {
    // Stiffer upper sectors lower the wall strain: 1/strain ranks like the mean modulus.
    double last_strain = 1e300;
    for (double contrast : {0.5, 1.0, 2.0, 4.0}) {
      PhantomOptions o;
      o.contrast = contrast;
      o.target_h = 2e-3;
      const DigitalPhantom ph = make_digital_phantom(o);
      const double s = pressure_normalized_principal_strain(ph.displacement, ph.mesh, ph.bc.lumen_pressure);
      CHECK(s > 0.0);
      CHECK(s < last_strain);
      last_strain = s;
    }
  }
}
