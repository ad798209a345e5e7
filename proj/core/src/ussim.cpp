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

#include "elasto/ussim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "elasto/egrid.hpp"
#include "elasto/error.hpp"
#include "elasto/locate.hpp"
#include "elasto/rng.hpp"

namespace elasto {
namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

std::vector<double> gaussian_kernel(double sigma, int& radius) {
  radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

double PsfParams::axial_sigma() const noexcept { return axial_fwhm() * kFwhmToSigma; }
double PsfParams::lateral_sigma() const noexcept { return lateral_fwhm * kFwhmToSigma; }

double PsfParams::operator()(double dl, double dd) const noexcept {
  const double sa = axial_sigma(), sl = lateral_sigma();
  return std::exp(-0.5 * (dl * dl / (sl * sl) + dd * dd / (sa * sa))) *
         std::cos(2.0 * std::numbers::pi * dd / wavelength());
}

Box RfGeometry::bounds() const noexcept {
  return {x0, x0 + (cols - 1) * lateral_step, y0 - (rows - 1) * axial_step, y0};
}

RfGeometry RfGeometry::covering(const Box& window, const PsfParams& psf) {
  if (!(window.width() > 0.0 && window.height() > 0.0)) throw InvalidArgument("imaging window is empty");
  RfGeometry g;
  g.axial_step = psf.axial_step;
  g.lateral_step = psf.lateral_step;
  g.cols = static_cast<int>(std::floor(window.width() / psf.lateral_step)) + 1;
  g.rows = static_cast<int>(std::floor(window.height() / psf.axial_step)) + 1;
  g.x0 = window.x_min;
  g.y0 = window.y_max;
  return g;
}

ScattererField make_scatterers(const Box& window, const PsfParams& psf, double per_cell, std::uint64_t seed,
                               const Mesh* tissue) {
  if (!(per_cell > 0.0)) throw InvalidArgument("scatterer density must be positive");
  const double area = window.width() * window.height();
  const auto n = static_cast<std::size_t>(std::llround(per_cell * area / psf.resolution_cell()));
  CounterRng pos(seed, 0), amp(seed, 1);
  std::optional<Locator> locator;
  if (tissue) locator.emplace(*tissue);
  ScattererField f;
  f.rng_seed = seed;
  f.positions.reserve(n);
  f.amplitudes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p{pos.uniform(window.x_min, window.x_max), pos.uniform(window.y_min, window.y_max)};
    const double a = amp.normal();
    if (locator && !locator->locate(p)) continue;
    f.positions.push_back(p);
    f.amplitudes.push_back(a);
  }
  return f;
}

RFImage render_rf(const ScattererField& sf, const RfGeometry& g, const PsfParams& psf) {
  if (sf.positions.size() != sf.amplitudes.size()) throw InvalidArgument("scatterer arrays differ in length");
  if (g.rows <= 0 || g.cols <= 0) throw InvalidArgument("RF geometry is empty");
  if (psf.wavelength() < 4.0 * psf.axial_step) throw InvalidArgument("axial sampling is below 4 samples per wavelength");
  RFImage rf;
  rf.geometry = g;
  rf.psf = psf;
  rf.samples = Image(g.rows, g.cols, 0.0);
  const double sa = psf.axial_sigma(), sl = psf.lateral_sigma();
  const double ra = psf.truncation * sa, rl = psf.truncation * sl;
  const double k = 2.0 * std::numbers::pi / psf.wavelength();
  std::vector<double> wl, wa;
  for (std::size_t i = 0; i < sf.positions.size(); ++i) {
    const Vec2 p = sf.positions[i];
    const int c0 = std::max(0, static_cast<int>(std::ceil(g.col_of(p.x - rl))));
    const int c1 = std::min(g.cols - 1, static_cast<int>(std::floor(g.col_of(p.x + rl))));
    const int r0 = std::max(0, static_cast<int>(std::ceil(g.row_of(p.y + ra))));
    const int r1 = std::min(g.rows - 1, static_cast<int>(std::floor(g.row_of(p.y - ra))));
    if (c0 > c1 || r0 > r1) continue;
    wl.resize(static_cast<std::size_t>(c1 - c0 + 1));
    wa.resize(static_cast<std::size_t>(r1 - r0 + 1));
    for (int c = c0; c <= c1; ++c) {
      const double d = g.x0 + c * g.lateral_step - p.x;
      wl[c - c0] = std::exp(-0.5 * d * d / (sl * sl));
    }
    for (int r = r0; r <= r1; ++r) {
      const double d = g.y0 - r * g.axial_step - p.y;
      wa[r - r0] = sf.amplitudes[i] * std::exp(-0.5 * d * d / (sa * sa)) * std::cos(k * d);
    }
    for (int r = r0; r <= r1; ++r) {
      double* row = &rf.samples(r, 0);
      const double a = wa[r - r0];
      for (int c = c0; c <= c1; ++c) row[c] += a * wl[c - c0];
    }
  }
  return rf;
}

ScattererField deform_scatterers(const ScattererField& sf, const NodalField& u, const Mesh& mesh,
                                 std::size_t* outside) {
  if (u.components != 2 || u.node_count() != mesh.node_count()) {
    throw InvalidArgument("displacement must be a 2-vector field on the mesh");
  }
  const Locator locator(mesh);
  ScattererField out = sf;
  std::size_t missed = 0;
  for (std::size_t i = 0; i < sf.positions.size(); ++i) {
    const Location loc = locator.locate_or_nearest(sf.positions[i]);
    missed += !loc.inside;
    out.positions[i] = sf.positions[i] + locator.interpolate_vec(u, loc);
  }
  if (outside) *outside = missed;
  return out;
}

Image gaussian_blur(const Image& img, double sigma_rows, double sigma_cols) {
  Image tmp = img;
  if (sigma_rows > 0.0) {
    int rad;
    const auto k = gaussian_kernel(sigma_rows, rad);
    for (int c = 0; c < img.cols; ++c) {
      for (int r = 0; r < img.rows; ++r) {
        double s = 0.0;
        for (int j = -rad; j <= rad; ++j) s += k[j + rad] * img(std::clamp(r + j, 0, img.rows - 1), c);
        tmp(r, c) = s;
      }
    }
  }
  Image out = tmp;
  if (sigma_cols > 0.0) {
    int rad;
    const auto k = gaussian_kernel(sigma_cols, rad);
    for (int r = 0; r < img.rows; ++r) {
      for (int c = 0; c < img.cols; ++c) {
        double s = 0.0;
        for (int j = -rad; j <= rad; ++j) s += k[j + rad] * tmp(r, std::clamp(c + j, 0, img.cols - 1));
        out(r, c) = s;
      }
    }
  }
  return out;
}

Image envelope(const RFImage& rf) {
  const RfGeometry& g = rf.geometry;
  const double k = 2.0 * std::numbers::pi / rf.psf.wavelength();
  Image i_part(g.rows, g.cols), q_part(g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r) {
    const double phase = k * (g.y0 - r * g.axial_step);
    const double cs = std::cos(phase), sn = std::sin(phase);
    for (int c = 0; c < g.cols; ++c) {
      i_part(r, c) = rf.samples(r, c) * cs;
      q_part(r, c) = -rf.samples(r, c) * sn;
    }
  }
  // Low-pass well below twice the carrier: one wavelength in samples.
  const double sigma = 0.5 * rf.psf.wavelength() / g.axial_step;
  i_part = gaussian_blur(i_part, sigma, 0.0);
  q_part = gaussian_blur(q_part, sigma, 0.0);
  Image env(g.rows, g.cols);
  for (std::size_t n = 0; n < env.size(); ++n) env.data[n] = 2.0 * std::hypot(i_part.data[n], q_part.data[n]);
  return env;
}

void write_rf(const std::filesystem::path& path, const RFImage& rf) {
  EgridDocument doc;
  doc.rows = rf.geometry.rows;
  doc.cols = rf.geometry.cols;
  doc.names = {"rf"};
  doc.arrays = {floats_from_image(rf.samples)};
  nlohmann::ordered_json extra;
  extra["kind"] = "rf";
  extra["geometry"] = {{"x0_m", rf.geometry.x0},
                       {"y0_m", rf.geometry.y0},
                       {"axial_step_m", rf.geometry.axial_step},
                       {"lateral_step_m", rf.geometry.lateral_step}};
  extra["psf"] = {{"center_frequency_hz", rf.psf.center_frequency},
                  {"sound_speed_m_s", rf.psf.sound_speed},
                  {"pulse_cycles", rf.psf.pulse_cycles},
                  {"lateral_fwhm_m", rf.psf.lateral_fwhm},
                  {"truncation_sigma", rf.psf.truncation}};
  doc.extra_json = extra.dump();
  write_egrid(path, doc);
}

RFImage read_rf(const std::filesystem::path& path) {
  const EgridDocument doc = read_egrid(path);
  RFImage rf;
  try {
    const auto extra = nlohmann::json::parse(doc.extra_json);
    const auto& g = extra.at("geometry");
    rf.geometry.rows = doc.rows;
    rf.geometry.cols = doc.cols;
    rf.geometry.x0 = g.at("x0_m").get<double>();
    rf.geometry.y0 = g.at("y0_m").get<double>();
    rf.geometry.axial_step = g.at("axial_step_m").get<double>();
    rf.geometry.lateral_step = g.at("lateral_step_m").get<double>();
    const auto& p = extra.at("psf");
    rf.psf.center_frequency = p.at("center_frequency_hz").get<double>();
    rf.psf.sound_speed = p.at("sound_speed_m_s").get<double>();
    rf.psf.pulse_cycles = p.at("pulse_cycles").get<double>();
    rf.psf.lateral_fwhm = p.at("lateral_fwhm_m").get<double>();
    rf.psf.truncation = p.value("truncation_sigma", 4.0);
    rf.psf.axial_step = rf.geometry.axial_step;
    rf.psf.lateral_step = rf.geometry.lateral_step;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": not an RF frame (" + e.what() + ")");
  }
  rf.samples = image_from_floats(doc.array("rf"), doc.rows, doc.cols);
  return rf;
}

RfPair simulate_rf_pair(const Mesh& tissue, const NodalField& displacement, const Box& window,
                        const RfPairOptions& o) {
  const double m = o.margin;
  const Box spread{window.x_min - m, window.x_max + m, window.y_min - m, window.y_max + m};
  const ScattererField sf = make_scatterers(spread, o.psf, o.scatterers_per_cell, o.seed, &tissue);
  const RfGeometry g = RfGeometry::covering(window, o.psf);
  RfPair pair;
  pair.scatterers = sf.positions.size();
  pair.fixed = render_rf(sf, g, o.psf);
  pair.moving = render_rf(deform_scatterers(sf, displacement, tissue, &pair.outside), g, o.psf);
  return pair;
}

}  // namespace elasto
