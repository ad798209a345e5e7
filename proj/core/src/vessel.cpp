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

#include "elasto/vessel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "elasto/error.hpp"
#include "elasto/rng.hpp"

namespace elasto {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPhaseOffset = kTwoPi / 7.0;

// Profile targets after min-max normalization.
constexpr double kSectorLow = 1000.0, kSectorHigh = 2000.0;
constexpr double kOutsideLow = 250.0, kOutsideHigh = 10000.0;

double draw_phase(CounterRng& rng, int harmonic) {
  return wrap_angle(rng.uniform(0.0, kTwoPi) + harmonic * kPhaseOffset);
}

VesselSpec draw_spec(std::uint64_t seed) {
  CounterRng rng(seed, 0);
  VesselSpec s;
  s.rng_seed = seed;
  s.base_radius = rng.uniform(0.015, 0.025);
  for (int i = 0; i < 3; ++i) {
    s.radius_harmonics[i].amplitude = rng.uniform(0.0, 0.01);
    s.radius_harmonics[i].phase = draw_phase(rng, i + 1);
  }
  s.base_thickness = 0.005;
  for (int i = 0; i < 2; ++i) {
    s.thickness_harmonics[i].amplitude = rng.uniform(0.0, 0.005);
    s.thickness_harmonics[i].phase = draw_phase(rng, i + 1);
  }
  s.center_offset = {rng.uniform(-0.005, 0.005), rng.uniform(-0.001, 0.001)};
  s.modulus_base = 1000.0;
  for (auto* set : {&s.modulus_harmonics_1, &s.modulus_harmonics_2}) {
    for (int i = 0; i < 3; ++i) {
      (*set)[i].amplitude = rng.uniform(750.0, 1500.0);
      (*set)[i].phase = draw_phase(rng, i + 1);
    }
  }
  s.sector_start = rng.uniform(0.0, kTwoPi);
  s.sector_width = rng.uniform(kTwoPi / 3.0, std::numbers::pi);
  s.smooth = rng.bernoulli(0.5);
  s.smoothing_width = kTwoPi / 36.0;
  s.background_modulus = 5.0;
  return s;
}

// Raw harmonic modulus mu0 + sum C_i (1 + cos(i*theta + psi_i)).
double harmonic_modulus(double base, const std::array<Harmonic, 3>& set, double theta) {
  double v = base;
  for (int i = 0; i < 3; ++i) {
    v += set[i].amplitude * (1.0 + std::cos((i + 1) * theta + set[i].phase));
  }
  return v;
}

std::vector<double> normalized(std::vector<double> v, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double a = *mn, b = *mx;
  if (!(b > a)) {
    std::fill(v.begin(), v.end(), 0.5 * (lo + hi));
    return v;
  }
  for (double& x : v) x = lo + (hi - lo) * (x - a) / (b - a);
  return v;
}

std::vector<double> periodic_gaussian(const std::vector<double>& v, double sigma_samples) {
  const int n = static_cast<int>(v.size());
  if (sigma_samples <= 0.0 || n == 0) return v;
  const int half = static_cast<int>(std::ceil(3.0 * sigma_samples));
  std::vector<double> w(2 * half + 1);
  double sum = 0.0;
  for (int k = -half; k <= half; ++k) {
    w[k + half] = std::exp(-0.5 * (k / sigma_samples) * (k / sigma_samples));
    sum += w[k + half];
  }
  for (double& x : w) x /= sum;
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = -half; k <= half; ++k) {
      const int j = ((i + k) % n + n) % n;
      acc += w[k + half] * v[j];
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace

double wrap_angle(double theta) noexcept {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

int vessel_rejection_count(std::uint64_t seed) {
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, 1000 + attempt);
    if (min_radius(draw_spec(s)) >= kMinLumenRadius) return attempt;
  }
}

VesselSpec sample_vessel_spec(std::uint64_t seed) {
  // A positive polar radius already rules out self-intersection, so only the
  // minimum lumen radius needs checking.
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, 1000 + attempt);
    VesselSpec spec = draw_spec(s);
    if (min_radius(spec) >= kMinLumenRadius) return spec;
  }
}

Vec2 vessel_center(const VesselSpec& spec) {
  return kTissueDomain.center() + spec.center_offset;
}

double radius_at(const VesselSpec& spec, double theta) {
  const double t = wrap_angle(theta);
  double r = spec.base_radius;
  for (int i = 0; i < 3; ++i) {
    r += spec.radius_harmonics[i].amplitude * std::cos((i + 1) * t + spec.radius_harmonics[i].phase);
  }
  return r;
}

double thickness_at(const VesselSpec& spec, double theta) {
  const double t = wrap_angle(theta);
  double h = spec.base_thickness;
  for (int i = 0; i < 2; ++i) {
    const auto& b = spec.thickness_harmonics[i];
    h += b.amplitude * (1.0 + std::cos((i + 1) * t + b.phase));
  }
  return h;
}

double min_radius(const VesselSpec& spec, int samples) {
  double m = radius_at(spec, 0.0);
  for (int k = 1; k < samples; ++k) m = std::min(m, radius_at(spec, kTwoPi * k / samples));
  return m;
}

bool in_sector(const VesselSpec& spec, double theta) {
  return wrap_angle(theta - spec.sector_start) < spec.sector_width;
}

ModulusProfile::ModulusProfile(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw InvalidArgument("modulus profile needs at least one sample");
}

double ModulusProfile::theta(std::size_t k) const noexcept {
  return kTwoPi * static_cast<double>(k) / static_cast<double>(samples_.size());
}

double ModulusProfile::at(double theta) const noexcept {
  const auto n = samples_.size();
  const double pos = wrap_angle(theta) / kTwoPi * static_cast<double>(n);
  auto k = static_cast<std::size_t>(pos);
  if (k >= n) k = n - 1;
  const double f = pos - static_cast<double>(k);
  return (1.0 - f) * samples_[k] + f * samples_[(k + 1) % n];
}

double ModulusProfile::min() const { return *std::min_element(samples_.begin(), samples_.end()); }
double ModulusProfile::max() const { return *std::max_element(samples_.begin(), samples_.end()); }

double ModulusProfile::total_variation() const {
  double tv = 0.0;
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    tv += std::abs(samples_[(k + 1) % samples_.size()] - samples_[k]);
  }
  return tv;
}

ModulusProfile sector_profile(const VesselSpec& spec, int n_theta) {
  if (n_theta < 64) throw InvalidArgument("modulus profile needs n_theta >= 64");
  std::vector<double> mu1(n_theta), mu2(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    const double t = kTwoPi * k / n_theta;
    mu1[k] = harmonic_modulus(spec.modulus_base, spec.modulus_harmonics_1, t);
    mu2[k] = harmonic_modulus(spec.modulus_base, spec.modulus_harmonics_2, t);
  }
  mu1 = normalized(std::move(mu1), kSectorLow, kSectorHigh);
  mu2 = normalized(std::move(mu2), kOutsideLow, kOutsideHigh);
  std::vector<double> mu(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    mu[k] = in_sector(spec, kTwoPi * k / n_theta) ? mu1[k] : mu2[k];
  }
  return ModulusProfile(std::move(mu));
}

ModulusProfile modulus_profile(const VesselSpec& spec, int n_theta) {
  ModulusProfile sharp = sector_profile(spec, n_theta);
  if (!spec.smooth) return sharp;
  const double sigma_samples = spec.smoothing_width / (kTwoPi / n_theta);
  return ModulusProfile(periodic_gaussian(sharp.samples(), sigma_samples));
}

}  // namespace elasto
