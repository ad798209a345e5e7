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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "elasto/datagen.hpp"
#include "elasto/error.hpp"
#include "elasto/ussim.hpp"

using namespace elasto;

namespace {

constexpr Box kWindow{-0.01, 0.01, 0.09, 0.11};

}  // namespace

TEST_SUITE("ussim") {
  TEST_CASE("a single scatterer renders the point spread function") {
    const PsfParams psf;
    const RfGeometry g = RfGeometry::covering(kWindow, psf);
    ScattererField sf;
    const Vec2 p{0.00123, 0.10047};
    sf.positions = {p};
    sf.amplitudes = {-1.7};
    const RFImage rf = render_rf(sf, g, psf);
    const double rl = psf.truncation * psf.lateral_sigma(), ra = psf.truncation * psf.axial_sigma();
    int support = 0;
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        const Vec2 x = g.position(r, c);
        const double dl = x.x - p.x, dd = x.y - p.y;
        const double expect = (std::abs(dl) <= rl && std::abs(dd) <= ra) ? -1.7 * psf(dl, dd) : 0.0;
        REQUIRE(rf.samples(r, c) == doctest::Approx(expect).epsilon(1e-12).scale(1e-12));
        support += expect != 0.0;
      }
    }
    CHECK(support > 100);
    // The pulse peaks at the scatterer.
    CHECK(psf(0.0, 0.0) == 1.0);
    CHECK(psf(psf.lateral_fwhm / 2.0, 0.0) == doctest::Approx(0.5));
  }

  TEST_CASE("rendering is linear in the amplitudes") {
    const PsfParams psf;
    const RfGeometry g = RfGeometry::covering(kWindow, psf);
    const ScattererField a = make_scatterers(kWindow, psf, 2.0, 1);
    const ScattererField b = make_scatterers(kWindow, psf, 2.0, 2);
    ScattererField both = a;
    both.positions.insert(both.positions.end(), b.positions.begin(), b.positions.end());
    for (double v : b.amplitudes) both.amplitudes.push_back(-2.0 * v);
    const RFImage ra = render_rf(a, g, psf), rb = render_rf(b, g, psf), rs = render_rf(both, g, psf);
    double scale = 0.0;
    for (double v : rs.samples.data) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < rs.samples.size(); ++i) {
      REQUIRE(std::abs(rs.samples.data[i] - (ra.samples.data[i] - 2.0 * rb.samples.data[i])) <= 1e-12 * scale);
    }
  }

  TEST_CASE("scatterer density and determinism") {
    const PsfParams psf;
    const ScattererField a = make_scatterers(kWindow, psf, 10.0, 5);
    const double expect = 10.0 * 0.02 * 0.02 / psf.resolution_cell();
    CHECK(static_cast<double>(a.positions.size()) == doctest::Approx(expect).epsilon(1e-3));
    const ScattererField b = make_scatterers(kWindow, psf, 10.0, 5);
    CHECK(a.positions == b.positions);
    CHECK(a.amplitudes == b.amplitudes);
    for (const Vec2& p : a.positions) REQUIRE(kWindow.contains(p));
    CHECK_THROWS_AS(make_scatterers(kWindow, psf, 0.0, 5), InvalidArgument);
  }

  TEST_CASE("the lumen stays anechoic") {
    VesselSpec spec;
    spec.base_radius = 0.006;
    spec.base_thickness = 0.002;
    const Mesh tissue = build_mesh(spec, 1.5e-3, ElementKind::tri3);
    const Vec2 c = vessel_center(spec);
    const Box w{c.x - 0.012, c.x + 0.012, c.y - 0.012, c.y + 0.012};
    const ScattererField sf = make_scatterers(w, PsfParams{}, 5.0, 3, &tissue);
    for (const Vec2& p : sf.positions) REQUIRE(norm(p - c) >= radius_at(spec, 0.0) - 1e-3);
    CHECK(sf.positions.size() > 1000);
  }

  TEST_CASE("fully developed speckle has a Rayleigh envelope") {
    PsfParams psf;
    const Box w{-0.01, 0.01, 0.07, 0.13};
    const ScattererField sf = make_scatterers(w, psf, 20.0, 11);
    const RFImage rf = render_rf(sf, RfGeometry::covering(w, psf), psf);
    const Image env = envelope(rf);
    // Sample roughly once per resolution cell, away from the edges.
    const int dr = static_cast<int>(std::ceil(psf.axial_fwhm() / psf.axial_step));
    const int dc = static_cast<int>(std::ceil(psf.lateral_fwhm / psf.lateral_step));
    std::vector<double> s;
    for (int r = 4 * dr; r < env.rows - 4 * dr; r += dr) {
      for (int c = 2 * dc; c < env.cols - 2 * dc; c += dc) s.push_back(env(r, c));
    }
    REQUIRE(s.size() > 500);
    double m2 = 0.0;
    for (double v : s) m2 += v * v;
    const double two_sigma2 = m2 / static_cast<double>(s.size());
    std::sort(s.begin(), s.end());
    double d = 0.0;
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double f = 1.0 - std::exp(-s[i] * s[i] / two_sigma2);
      d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    // 1% critical value of the Kolmogorov-Smirnov statistic.
    CHECK(d < 1.63 / std::sqrt(n));
  }

  TEST_CASE("deformation moves scatterers by the interpolated field") {
    const VesselSpec spec;
    const Mesh m = build_mesh(spec, 3e-3, ElementKind::tri3);
    const Vec2 c = vessel_center(spec);
    const Box w{c.x - 0.05, c.x + 0.05, c.y - 0.05, c.y + 0.05};
    const ScattererField sf = make_scatterers(w, PsfParams{}, 0.5, 8, &m);

    std::size_t outside = 99;
    const ScattererField same = deform_scatterers(sf, NodalField(2, m.node_count()), m, &outside);
    CHECK(same.positions == sf.positions);
    CHECK(outside == 0);

    NodalField lin(2, m.node_count());
    for (std::size_t n = 0; n < m.node_count(); ++n) {
      lin.at(n, 0) = 2e-4 + 1e-3 * m.nodes[n].x;
      lin.at(n, 1) = -1e-4 - 2e-3 * (m.nodes[n].y - 0.1);
    }
    const ScattererField moved = deform_scatterers(sf, lin, m);
    for (std::size_t i = 0; i < sf.positions.size(); ++i) {
      const Vec2 p = sf.positions[i], q = moved.positions[i];
      REQUIRE(q.x - p.x == doctest::Approx(2e-4 + 1e-3 * p.x).epsilon(1e-9));
      REQUIRE(q.y - p.y == doctest::Approx(-1e-4 - 2e-3 * (p.y - 0.1)).epsilon(1e-9));
    }
    CHECK(moved.amplitudes == sf.amplitudes);
  }

  TEST_CASE("a whole-sample translation shifts the frame") {
    const PsfParams psf;
    const RfGeometry g = RfGeometry::covering(kWindow, psf);
    const ScattererField sf = make_scatterers(kWindow, psf, 5.0, 4);
    ScattererField moved = sf;
    for (Vec2& p : moved.positions) p = p + Vec2{3 * psf.lateral_step, -7 * psf.axial_step};
    const RFImage a = render_rf(sf, g, psf), b = render_rf(moved, g, psf);
    double scale = 0.0;
    for (double v : a.samples.data) scale = std::max(scale, std::abs(v));
    for (int r = 40; r < g.rows - 80; ++r) {
      for (int c = 20; c < g.cols - 30; ++c) {
        REQUIRE(std::abs(b.samples(r + 7, c + 3) - a.samples(r, c)) <= 1e-9 * scale);
      }
    }
  }

  TEST_CASE("RF frames round trip through files") {
    const PsfParams psf;
    const RFImage rf = render_rf(make_scatterers(kWindow, psf, 2.0, 6), RfGeometry::covering(kWindow, psf), psf);
    const auto path = std::filesystem::temp_directory_path() / "elasto_test_frame.rf";
    write_rf(path, rf);
    const RFImage back = read_rf(path);
    CHECK(back.geometry.rows == rf.geometry.rows);
    CHECK(back.geometry.cols == rf.geometry.cols);
    CHECK(back.geometry.x0 == rf.geometry.x0);
    CHECK(back.geometry.y0 == rf.geometry.y0);
    CHECK(back.psf.center_frequency == psf.center_frequency);
    CHECK(back.psf.lateral_fwhm == psf.lateral_fwhm);
    for (std::size_t i = 0; i < rf.samples.size(); ++i) {
      REQUIRE(back.samples.data[i] == static_cast<double>(static_cast<float>(rf.samples.data[i])));
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("undersampled pulses are rejected") {
    PsfParams psf;
    psf.axial_step = 0.1e-3;
    ScattererField sf;
    CHECK_THROWS_AS(render_rf(sf, RfGeometry::covering(kWindow, psf), psf), InvalidArgument);
  }
}
