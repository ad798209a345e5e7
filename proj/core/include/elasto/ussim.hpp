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
#include <filesystem>
#include <vector>

#include "elasto/grid.hpp"
#include "elasto/mesh.hpp"

namespace elasto {

/// Separable pulse-echo point spread function: Gaussian-windowed cosine along
/// depth times a Gaussian across the beam.
struct PsfParams {
  double center_frequency = 5.0e6;  // Hz
  double sound_speed = 1540.0;      // m/s
  double pulse_cycles = 2.0;        // axial FWHM in wavelengths
  double lateral_fwhm = 1.2e-3;     // m
  double axial_step = 0.05e-3;      // m between RF samples along depth
  double lateral_step = 0.2e-3;     // m between scan lines
  /// Kernel support in standard deviations.
  double truncation = 4.0;

  double wavelength() const noexcept { return sound_speed / center_frequency; }
  double axial_fwhm() const noexcept { return pulse_cycles * wavelength(); }
  double axial_sigma() const noexcept;
  double lateral_sigma() const noexcept;
  /// Axial FWHM times lateral FWHM (m^2).
  double resolution_cell() const noexcept { return axial_fwhm() * lateral_fwhm; }
  /// PSF value at offset (lateral, depth) from the scatterer.
  double operator()(double d_lateral, double d_depth) const noexcept;
};

/// Sampling lattice of an RF frame. Row r is depth sample y0 - r*axial_step
/// (row 0 nearest the transducer), column c is scan line x0 + c*lateral_step.
struct RfGeometry {
  int rows = 0;
  int cols = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double axial_step = 0.05e-3;
  double lateral_step = 0.2e-3;

  Vec2 position(double row, double col) const noexcept { return {x0 + col * lateral_step, y0 - row * axial_step}; }
  double row_of(double y) const noexcept { return (y0 - y) / axial_step; }
  double col_of(double x) const noexcept { return (x - x0) / lateral_step; }
  Box bounds() const noexcept;

  /// Lattice covering `window` with the PSF sample spacing.
  static RfGeometry covering(const Box& window, const PsfParams& psf);
};

struct RFImage {
  RfGeometry geometry;
  PsfParams psf;
  Image samples;  // rows x cols
};

struct ScattererField {
  std::vector<Vec2> positions;
  std::vector<double> amplitudes;
  std::uint64_t rng_seed = 0;
};

/// Uniformly placed scatterers with N(0,1) amplitudes, `per_cell` of them per
/// PSF resolution cell. When `tissue` is given, scatterers outside its
/// elements (e.g. in the blood lumen) are dropped, leaving it anechoic.
ScattererField make_scatterers(const Box& window, const PsfParams& psf, double per_cell, std::uint64_t seed,
                               const Mesh* tissue = nullptr);

/// Sum of PSF copies evaluated at every sample position; linear in amplitudes
/// and independent of thread scheduling.
RFImage render_rf(const ScattererField& scatterers, const RfGeometry& geometry, const PsfParams& psf);

/// Moves each scatterer by the displacement interpolated at its position.
/// Scatterers outside every element take the clamped value of the element
/// with the nearest centroid; their number is stored in `outside` when given.
ScattererField deform_scatterers(const ScattererField& scatterers, const NodalField& displacement, const Mesh& mesh,
                                 std::size_t* outside = nullptr);

/// Envelope by quadrature demodulation at the center frequency followed by a
/// Gaussian low-pass along depth.
Image envelope(const RFImage& rf);

/// Separable Gaussian blur; sigmas in samples (0 disables an axis).
Image gaussian_blur(const Image& img, double sigma_rows, double sigma_cols);

struct RfPairOptions {
  PsfParams psf;
  double scatterers_per_cell = 10.0;
  std::uint64_t seed = 7;
  /// Scatterers fill the imaged window grown by this margin on every side.
  double margin = 3e-3;
};

struct RfPair {
  RFImage fixed;
  RFImage moving;
  std::size_t scatterers = 0;
  std::size_t outside = 0;  // scatterers displaced with a clamped value
};

/// Frames before and after `displacement` (defined on `tissue`) covering
/// `window`. The lumen of `tissue` stays anechoic.
RfPair simulate_rf_pair(const Mesh& tissue, const NodalField& displacement, const Box& window,
                        const RfPairOptions& options = {});

/// RF frame as an EGRID file with one array "rf" and the lattice/PSF in the header.
void write_rf(const std::filesystem::path& path, const RFImage& rf);
RFImage read_rf(const std::filesystem::path& path);

}  // namespace elasto
