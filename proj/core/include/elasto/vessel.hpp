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
#include <cstdint>
#include <vector>

#include "elasto/geometry.hpp"

namespace elasto {

struct Harmonic {
  double amplitude = 0.0;
  double phase = 0.0;  // radians

  friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

/// Random parameters of one vessel: polar wall geometry about a center and
/// an angular shear-modulus profile. Lengths in meters, moduli in pascals.
struct VesselSpec {
  double base_radius = 0.02;
  std::array<Harmonic, 3> radius_harmonics{};
  double base_thickness = 0.005;
  std::array<Harmonic, 2> thickness_harmonics{};
  Vec2 center_offset{};
  double modulus_base = 1000.0;
  std::array<Harmonic, 3> modulus_harmonics_1{};
  std::array<Harmonic, 3> modulus_harmonics_2{};
  double sector_start = 0.0;
  double sector_width = 2.0 * 3.14159265358979323846 / 3.0;
  bool smooth = false;
  double smoothing_width = 2.0 * 3.14159265358979323846 / 36.0;
  double background_modulus = 5.0;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const VesselSpec&, const VesselSpec&) = default;
};

inline constexpr double kMinLumenRadius = 0.005;
inline constexpr int kDefaultProfileSamples = 720;

/// Draws a spec from the generation ranges, resampling (with a derived seed)
/// until the wall is non-degenerate. Deterministic in `seed`.
VesselSpec sample_vessel_spec(std::uint64_t seed);

/// Number of rejected draws before the spec returned by sample_vessel_spec(seed).
int vessel_rejection_count(std::uint64_t seed);

/// Position of the polar origin of the vessel inside the tissue domain.
Vec2 vessel_center(const VesselSpec& spec);

/// Lumen (inner wall) radius r0 + sum A_i cos(i*theta + psi_i).
double radius_at(const VesselSpec& spec, double theta);

/// Wall thickness h0 + sum B_i (1 + cos(i*theta + psi_i)).
double thickness_at(const VesselSpec& spec, double theta);

/// Minimum of radius_at over a dense angular sweep.
double min_radius(const VesselSpec& spec, int samples = 2048);

/// Periodic angular modulus profile on a uniform grid theta_k = 2*pi*k/n.
class ModulusProfile {
 public:
  ModulusProfile() = default;
  explicit ModulusProfile(std::vector<double> samples);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double theta(std::size_t k) const noexcept;

  /// Periodic linear interpolation, theta in radians (any value).
  double at(double theta) const noexcept;

  double min() const;
  double max() const;
  /// Discrete circular total variation sum_k |mu_{k+1} - mu_k|.
  double total_variation() const;

 private:
  std::vector<double> samples_;
};

/// Evaluates the two harmonic moduli, min-max normalizes them to [1, 2] kPa
/// and [0.25, 10] kPa, applies the sector split and, when `spec.smooth`,
/// a periodic Gaussian of width `spec.smoothing_width`.
ModulusProfile modulus_profile(const VesselSpec& spec, int n_theta = kDefaultProfileSamples);

/// Same as modulus_profile but ignoring `spec.smooth` (sector function only).
ModulusProfile sector_profile(const VesselSpec& spec, int n_theta = kDefaultProfileSamples);

/// True when theta lies in [sector_start, sector_start + sector_width) mod 2*pi.
bool in_sector(const VesselSpec& spec, double theta);

/// Wraps an angle to [0, 2*pi).
double wrap_angle(double theta) noexcept;

}  // namespace elasto
