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

#include "elasto/mesh.hpp"
#include "elasto/vessel.hpp"

namespace elasto {

/// Lossless JSON form of a spec (field names as in the struct).
std::string vessel_spec_to_json(const VesselSpec& spec);
VesselSpec vessel_spec_from_json(const std::string& text);

/// Mesh container: one JSON header line with the topology, followed by the
/// node coordinates as little-endian 64-bit floats.
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);
Mesh load_mesh(const std::filesystem::path& path);

/// Nodal field container, same layout as the mesh file.
void save_field(const std::filesystem::path& path, const NodalField& field);
NodalField load_field(const std::filesystem::path& path);

}  // namespace elasto
