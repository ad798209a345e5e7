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
#include <functional>
#include <string>
#include <vector>

#include "elasto/fem.hpp"
#include "elasto/grid.hpp"
#include "elasto/locate.hpp"
#include "elasto/mesh.hpp"

namespace elasto {

/// Divides every component by the pressure P (Pa); P must be positive.
NodalField pressure_normalize(const NodalField& u, double pressure);

/// Samples nodal fields at the pixel centers of a grid, restricted to the
/// vessel elements; pixels outside every vessel element are 0.
class GridSampler {
 public:
  GridSampler(const Mesh& mesh, const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  /// 1 where the pixel center lies in a vessel element.
  Image mask() const;
  Image sample(const NodalField& field, int component = 0) const;
  /// Samples a region-aware modulus (vessel elements only).
  Image sample(const ModulusField& mu) const;

 private:
  const Mesh* mesh_;
  GridSpec grid_;
  std::vector<Location> locations_;
};

Image interp_to_grid(const NodalField& field, const Mesh& mesh, const GridSpec& grid, int component = 0);

/// Shifts an image by whole pixels (positive = towards larger column / row), zero fill.
Image shift_image(const Image& img, int shift_col, int shift_row);

struct DatagenOptions {
  int width = 128;
  int height = 128;
  double pitch = 0.86e-3;
  ElementKind element_kind = ElementKind::tri3;
  double target_h = 2.0e-3;
  double nu = 0.45;
  double background_modulus = 5.0;
  double pressure_min = 1000.0;
  double pressure_max = 8000.0;
  int max_shift = 10;
  int profile_samples = kDefaultProfileSamples;
  int mesh_attempts = 3;

  friend bool operator==(const DatagenOptions&, const DatagenOptions&) = default;
};

/// Seed of the vessel spec of dataset sample `index`.
std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t index);

/// vesselgen -> forward solve -> pressure normalization -> gridding -> shift.
GridSample generate_sample(std::uint64_t global_seed, std::uint64_t index, const DatagenOptions& options = {});

struct DatasetConfig {
  std::uint64_t global_seed = 0;
  int n_train = 200;
  int n_val = 20;
  int n_test = 20;
  std::filesystem::path out;
  int threads = 1;
  DatagenOptions options;
};

struct ManifestEntry {
  std::string split;
  std::int64_t index = 0;
  std::string file;  // relative to the dataset root
  std::uint64_t seed = 0;
  double pressure = 0.0;
};

struct DatasetSummary {
  std::vector<ManifestEntry> entries;
  int generated = 0;
  int reused = 0;
};

inline constexpr int kDatasetVersion = 1;

/// JSON of the dataset-defining parameters (seed, counts, options); stored as
/// config.json and compared on resume.
std::string dataset_config_json(const DatasetConfig& cfg);

/// Writes <out>/{train,val,test}/sample_NNNNNN.egrid, config.json and
/// manifest.json. Samples already present and readable are kept. Output is
/// identical for any thread count. `progress` (optional) is called after each
/// sample from worker threads.
DatasetSummary generate_dataset(const DatasetConfig& cfg,
                                const std::function<void(const ManifestEntry&, bool reused)>& progress = {});

/// Two-sector circular vessel used to emulate the contrast phantoms.
struct PhantomOptions {
  double contrast = 1.0;
  double lower_modulus = 200e3 / 3.0;     // Pa
  double background_modulus = 10e3 / 3.0;  // Pa
  double pressure = 5330.0;               // Pa
  double lumen_radius = 0.020;
  double wall_thickness = 0.008;
  double nu = 0.495;  // nearly incompressible wall, as in the contrast phantoms
  double target_h = 1.0e-3;
  int width = 128;
  int height = 128;
  double pitch = 0.86e-3;
};

struct DigitalPhantom {
  VesselSpec spec;
  Mesh mesh;
  ModulusField modulus;
  BoundarySpec bc;
  NodalField displacement;  // meters, at the phantom pressure
  GridSample truth;
};

/// Nodal modulus of the two-sector wall: `upper` where the node lies above
/// the vessel center (transducer side), `lower` elsewhere.
ModulusField two_sector_modulus(const Mesh& mesh, double upper, double lower, double background);

DigitalPhantom make_digital_phantom(const PhantomOptions& options);

/// Quad4 mesh of the vessel and a tissue margin around it, as used for
/// registration and reconstruction.
Mesh reconstruction_mesh(const VesselSpec& spec, double margin = 0.008,
                         double target_h = kReconstructionElementSize);

/// Interpolates a nodal field of `from` at the nodes of `to`; nodes outside
/// `from` take the clamped value of the nearest element.
NodalField transfer_field(const NodalField& field, const Mesh& from, const Mesh& to);

}  // namespace elasto
