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

#include <filesystem>
#include <string>
#include <vector>

#include "elasto/grid.hpp"

namespace elasto {

inline constexpr int kEgridVersion = 1;

/// EGRID container: one JSON header line, then the named arrays as raw
/// little-endian float32 in header order, each row-major of shape rows x cols.
struct EgridDocument {
  int rows = 0;
  int cols = 0;
  std::vector<std::string> names;
  std::vector<std::vector<float>> arrays;
  /// Additional header keys, as a JSON object (written in order after the
  /// fixed keys version/shape/dtype/order/arrays).
  std::string extra_json = "{}";

  const std::vector<float>& array(const std::string& name) const;
};

std::string encode_egrid(const EgridDocument& doc);
EgridDocument decode_egrid(const std::string& bytes);

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_egrid(const std::filesystem::path& path, const EgridDocument& doc);
EgridDocument read_egrid(const std::filesystem::path& path);

/// Header of an EGRID file as JSON text; cheap validity check for resumes.
std::string read_egrid_header(const std::filesystem::path& path);

/// GridSample <-> EGRID with arrays [ux, uy, mu, mask] and keys P_pa, seed.
EgridDocument to_egrid(const GridSample& s);
GridSample from_egrid(const EgridDocument& doc);

void write_grid_sample(const std::filesystem::path& path, const GridSample& s);
GridSample read_grid_sample(const std::filesystem::path& path);

/// Modulus-only image (arrays [mu, mask]) used for reconstructions.
void write_modulus_image(const std::filesystem::path& path, const Image& mu, const Image& mask,
                         const GridSpec& grid, const std::string& extra_json = "{}");

Image image_from_floats(const std::vector<float>& v, int rows, int cols);
std::vector<float> floats_from_image(const Image& img);

}  // namespace elasto
