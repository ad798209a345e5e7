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

#include "elasto/mesh_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "elasto/error.hpp"

namespace elasto {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

constexpr int kMeshVersion = 1;

json harmonics_to_json(std::span<const Harmonic> hs) {
  json a = json::array();
  for (const Harmonic& h : hs) a.push_back({{"amplitude", h.amplitude}, {"phase", h.phase}});
  return a;
}

template <std::size_t N>
std::array<Harmonic, N> harmonics_from_json(const json& a) {
  if (!a.is_array() || a.size() != N) throw FormatError("harmonic list has the wrong length");
  std::array<Harmonic, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i].amplitude = a[i].at("amplitude").get<double>();
    out[i].phase = a[i].at("phase").get<double>();
  }
  return out;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t n, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double)) {
    throw FormatError("truncated binary payload in " + path.string());
  }
}

json read_header(std::ifstream& in, const std::filesystem::path& path, const char* format) {
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header in " + path.string());
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError("malformed header in " + path.string() + ": " + e.what());
  }
  if (h.value("format", std::string{}) != format) throw FormatError(path.string() + " is not an " + format + " file");
  if (h.value("version", 0) != kMeshVersion) throw FormatError("unsupported version in " + path.string());
  return h;
}

std::vector<int> edges_to_flat(const std::vector<BoundaryEdge>& edges) {
  std::vector<int> flat;
  flat.reserve(2 * edges.size());
  for (const auto& e : edges) {
    flat.push_back(e.a);
    flat.push_back(e.b);
  }
  return flat;
}

std::vector<BoundaryEdge> edges_from_flat(const std::vector<int>& flat) {
  if (flat.size() % 2 != 0) throw FormatError("odd edge list");
  std::vector<BoundaryEdge> edges(flat.size() / 2);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = {flat[2 * i], flat[2 * i + 1]};
  return edges;
}

}  // namespace

std::string vessel_spec_to_json(const VesselSpec& s) {
  ordered_json j;
  j["base_radius"] = s.base_radius;
  j["radius_harmonics"] = harmonics_to_json(s.radius_harmonics);
  j["base_thickness"] = s.base_thickness;
  j["thickness_harmonics"] = harmonics_to_json(s.thickness_harmonics);
  j["center_offset"] = {s.center_offset.x, s.center_offset.y};
  j["modulus_base"] = s.modulus_base;
  j["modulus_harmonics_1"] = harmonics_to_json(s.modulus_harmonics_1);
  j["modulus_harmonics_2"] = harmonics_to_json(s.modulus_harmonics_2);
  j["sector_start"] = s.sector_start;
  j["sector_width"] = s.sector_width;
  j["smooth"] = s.smooth;
  j["smoothing_width"] = s.smoothing_width;
  j["background_modulus"] = s.background_modulus;
  j["rng_seed"] = s.rng_seed;
  return j.dump();
}

VesselSpec vessel_spec_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    VesselSpec s;
    s.base_radius = j.at("base_radius").get<double>();
    s.radius_harmonics = harmonics_from_json<3>(j.at("radius_harmonics"));
    s.base_thickness = j.at("base_thickness").get<double>();
    s.thickness_harmonics = harmonics_from_json<2>(j.at("thickness_harmonics"));
    s.center_offset = {j.at("center_offset").at(0).get<double>(), j.at("center_offset").at(1).get<double>()};
    s.modulus_base = j.at("modulus_base").get<double>();
    s.modulus_harmonics_1 = harmonics_from_json<3>(j.at("modulus_harmonics_1"));
    s.modulus_harmonics_2 = harmonics_from_json<3>(j.at("modulus_harmonics_2"));
    s.sector_start = j.at("sector_start").get<double>();
    s.sector_width = j.at("sector_width").get<double>();
    s.smooth = j.at("smooth").get<bool>();
    s.smoothing_width = j.at("smoothing_width").get<double>();
    s.background_modulus = j.at("background_modulus").get<double>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid vessel spec: ") + e.what());
  }
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  ordered_json h;
  h["format"] = "elasto-mesh";
  h["version"] = kMeshVersion;
  h["element_kind"] = to_string(mesh.kind);
  h["node_count"] = mesh.node_count();
  h["elements"] = mesh.connectivity;
  std::vector<int> regions(mesh.regions.size());
  for (std::size_t e = 0; e < regions.size(); ++e) regions[e] = static_cast<int>(mesh.regions[e]);
  h["regions"] = regions;
  h["lumen_edges"] = edges_to_flat(mesh.lumen_edges);
  h["outer_edges"] = edges_to_flat(mesh.outer_edges);
  h["node_sets"] = {{"top_center", mesh.node_sets.top_center},
                    {"bottom_center", mesh.node_sets.bottom_center},
                    {"top_edge", mesh.node_sets.top_edge},
                    {"bottom_edge", mesh.node_sets.bottom_edge}};
  h["vessel_center"] = {mesh.vessel_center.x, mesh.vessel_center.y};
  h["spec_seed"] = mesh.spec_seed;
  h["arrays"] = {"nodes"};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << h.dump() << '\n';
  std::vector<double> xy(2 * mesh.node_count());
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    xy[2 * n] = mesh.nodes[n].x;
    xy[2 * n + 1] = mesh.nodes[n].y;
  }
  write_doubles(out, xy.data(), xy.size());
  if (!out) throw Error("write failed for " + path.string());
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  const json h = read_header(in, path, "elasto-mesh");
  Mesh m;
  try {
    m.kind = element_kind_from_string(h.at("element_kind").get<std::string>());
    const auto n = h.at("node_count").get<std::size_t>();
    m.connectivity = h.at("elements").get<std::vector<int>>();
    for (int r : h.at("regions").get<std::vector<int>>()) {
      if (r != 0 && r != 1) throw FormatError("unknown region tag");
      m.regions.push_back(static_cast<Region>(r));
    }
    m.lumen_edges = edges_from_flat(h.at("lumen_edges").get<std::vector<int>>());
    m.outer_edges = edges_from_flat(h.at("outer_edges").get<std::vector<int>>());
    const json& ns = h.at("node_sets");
    m.node_sets.top_center = ns.at("top_center").get<int>();
    m.node_sets.bottom_center = ns.at("bottom_center").get<int>();
    m.node_sets.top_edge = ns.at("top_edge").get<std::vector<int>>();
    m.node_sets.bottom_edge = ns.at("bottom_edge").get<std::vector<int>>();
    m.vessel_center = {h.at("vessel_center").at(0).get<double>(), h.at("vessel_center").at(1).get<double>()};
    m.spec_seed = h.at("spec_seed").get<std::uint64_t>();

    std::vector<double> xy(2 * n);
    read_doubles(in, xy.data(), xy.size(), path);
    m.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.nodes[i] = {xy[2 * i], xy[2 * i + 1]};
  } catch (const json::exception& e) {
    throw FormatError("invalid mesh header in " + path.string() + ": " + e.what());
  }
  const auto npe = static_cast<std::size_t>(m.nodes_per_element());
  if (m.connectivity.size() != npe * m.regions.size()) throw FormatError("element count mismatch in " + path.string());
  for (int v : m.connectivity) {
    if (v < 0 || static_cast<std::size_t>(v) >= m.node_count()) throw FormatError("node index out of range");
  }
  return m;
}

void save_field(const std::filesystem::path& path, const NodalField& field) {
  ordered_json h;
  h["format"] = "elasto-field";
  h["version"] = kMeshVersion;
  h["components"] = field.components;
  h["node_count"] = field.node_count();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << h.dump() << '\n';
  write_doubles(out, field.values.data(), field.values.size());
  if (!out) throw Error("write failed for " + path.string());
}

NodalField load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  const json h = read_header(in, path, "elasto-field");
  NodalField f;
  try {
    f.components = h.at("components").get<int>();
    const auto n = h.at("node_count").get<std::size_t>();
    if (f.components < 1) throw FormatError("bad component count");
    f.values.resize(n * static_cast<std::size_t>(f.components));
  } catch (const json::exception& e) {
    throw FormatError("invalid field header in " + path.string() + ": " + e.what());
  }
  read_doubles(in, f.values.data(), f.values.size(), path);
  return f;
}

}  // namespace elasto
