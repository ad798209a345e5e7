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

#include "elasto/egrid.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "elasto/error.hpp"

namespace elasto {
namespace {

using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "EGRID payloads are little-endian");

ordered_json parse_object(const std::string& text, const char* what) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("malformed ") + what + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError(std::string(what) + " is not a JSON object");
  return j;
}

ordered_json header_of(const EgridDocument& doc) {
  ordered_json h;
  h["version"] = kEgridVersion;
  h["shape"] = {doc.rows, doc.cols};
  h["dtype"] = "f32le";
  h["order"] = "row-major";
  h["arrays"] = doc.names;
  const ordered_json extra = parse_object(doc.extra_json, "EGRID extra header");
  for (auto& [k, v] : extra.items()) {
    if (h.contains(k)) throw InvalidArgument("extra header key '" + k + "' collides with a fixed key");
    h[k] = v;
  }
  return h;
}

EgridDocument parse_header(const ordered_json& h) {
  EgridDocument doc;
  try {
    if (h.at("version").get<int>() != kEgridVersion) throw FormatError("unsupported EGRID version");
    if (h.at("dtype").get<std::string>() != "f32le") throw FormatError("unsupported EGRID dtype");
    if (h.at("order").get<std::string>() != "row-major") throw FormatError("unsupported EGRID order");
    doc.rows = h.at("shape").at(0).get<int>();
    doc.cols = h.at("shape").at(1).get<int>();
    doc.names = h.at("arrays").get<std::vector<std::string>>();
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("invalid EGRID header: ") + e.what());
  }
  if (doc.rows <= 0 || doc.cols <= 0) throw FormatError("EGRID shape must be positive");
  ordered_json extra = ordered_json::object();
  for (auto& [k, v] : h.items()) {
    if (k != "version" && k != "shape" && k != "dtype" && k != "order" && k != "arrays") extra[k] = v;
  }
  doc.extra_json = extra.dump();
  return doc;
}

}  // namespace

const std::vector<float>& EgridDocument::array(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return arrays.at(i);
  }
  throw FormatError("EGRID document has no array '" + name + "'");
}

std::string encode_egrid(const EgridDocument& doc) {
  if (doc.names.size() != doc.arrays.size()) throw InvalidArgument("EGRID names and arrays differ in count");
  const auto n = static_cast<std::size_t>(doc.rows) * static_cast<std::size_t>(doc.cols);
  for (const auto& a : doc.arrays) {
    if (a.size() != n) throw InvalidArgument("EGRID array size does not match the shape");
  }
  std::string out = header_of(doc).dump();
  out.push_back('\n');
  const std::size_t head = out.size();
  out.resize(head + doc.arrays.size() * n * sizeof(float));
  char* p = out.data() + head;
  for (const auto& a : doc.arrays) {
    std::memcpy(p, a.data(), n * sizeof(float));
    p += n * sizeof(float);
  }
  return out;
}

EgridDocument decode_egrid(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw FormatError("EGRID header line is not terminated");
  EgridDocument doc = parse_header(parse_object(bytes.substr(0, nl), "EGRID header"));
  const auto n = static_cast<std::size_t>(doc.rows) * static_cast<std::size_t>(doc.cols);
  if (bytes.size() - nl - 1 != doc.names.size() * n * sizeof(float)) {
    throw FormatError("EGRID payload size does not match the header");
  }
  const char* p = bytes.data() + nl + 1;
  doc.arrays.resize(doc.names.size());
  for (auto& a : doc.arrays) {
    a.resize(n);
    std::memcpy(a.data(), p, n * sizeof(float));
    p += n * sizeof(float);
  }
  return doc;
}

void write_egrid(const std::filesystem::path& path, const EgridDocument& doc) {
  const std::string bytes = encode_egrid(doc);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

EgridDocument read_egrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_egrid(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string read_egrid_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || in.eof()) throw FormatError(path.string() + ": missing EGRID header");
  EgridDocument doc = parse_header(parse_object(line, "EGRID header"));
  const auto expected = line.size() + 1 + doc.names.size() * static_cast<std::size_t>(doc.rows) *
                                               static_cast<std::size_t>(doc.cols) * sizeof(float);
  if (std::filesystem::file_size(path) != expected) throw FormatError(path.string() + ": truncated EGRID file");
  return line;
}

Image image_from_floats(const std::vector<float>& v, int rows, int cols) {
  Image img(rows, cols);
  if (v.size() != img.size()) throw FormatError("array size does not match image shape");
  for (std::size_t i = 0; i < v.size(); ++i) img.data[i] = v[i];
  return img;
}

std::vector<float> floats_from_image(const Image& img) {
  std::vector<float> v(img.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(img.data[i]);
  return v;
}

EgridDocument to_egrid(const GridSample& s) {
  EgridDocument doc;
  doc.rows = s.mu.rows;
  doc.cols = s.mu.cols;
  for (const Image* img : {&s.ux, &s.uy, &s.mask}) {
    if (!img->same_shape(s.mu)) throw InvalidArgument("sample images differ in shape");
  }
  doc.names = {"ux", "uy", "mu", "mask"};
  doc.arrays = {floats_from_image(s.ux), floats_from_image(s.uy), floats_from_image(s.mu), floats_from_image(s.mask)};
  ordered_json extra;
  extra["P_pa"] = s.pressure;
  extra["seed"] = s.spec_seed;
  extra["index"] = s.index;
  extra["provenance"] = to_string(s.provenance);
  extra["shift"] = {s.shift_col, s.shift_row};
  extra["pitch_m"] = s.grid.pitch;
  extra["origin_m"] = {s.grid.origin.x, s.grid.origin.y};
  doc.extra_json = extra.dump();
  return doc;
}

GridSample from_egrid(const EgridDocument& doc) {
  GridSample s;
  const ordered_json extra = parse_object(doc.extra_json, "EGRID header");
  try {
    s.pressure = extra.value("P_pa", 0.0);
    s.spec_seed = extra.value("seed", std::uint64_t{0});
    s.index = extra.value("index", std::int64_t{-1});
    s.provenance = provenance_from_string(extra.value("provenance", std::string("generated")));
    if (extra.contains("shift")) {
      s.shift_col = extra["shift"].at(0).get<int>();
      s.shift_row = extra["shift"].at(1).get<int>();
    }
    s.grid.pitch = extra.value("pitch_m", 0.86e-3);
    if (extra.contains("origin_m")) {
      s.grid.origin = {extra["origin_m"].at(0).get<double>(), extra["origin_m"].at(1).get<double>()};
    }
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("invalid sample metadata: ") + e.what());
  }
  s.grid.width = doc.cols;
  s.grid.height = doc.rows;
  auto get = [&](const char* name) {
    for (std::size_t i = 0; i < doc.names.size(); ++i) {
      if (doc.names[i] == name) return image_from_floats(doc.arrays[i], doc.rows, doc.cols);
    }
    return Image(doc.rows, doc.cols, 0.0);
  };
  s.ux = get("ux");
  s.uy = get("uy");
  s.mu = get("mu");
  s.mask = get("mask");
  return s;
}

void write_grid_sample(const std::filesystem::path& path, const GridSample& s) { write_egrid(path, to_egrid(s)); }

GridSample read_grid_sample(const std::filesystem::path& path) { return from_egrid(read_egrid(path)); }

void write_modulus_image(const std::filesystem::path& path, const Image& mu, const Image& mask, const GridSpec& grid,
                         const std::string& extra_json) {
  if (!mu.same_shape(mask)) throw InvalidArgument("modulus and mask differ in shape");
  EgridDocument doc;
  doc.rows = mu.rows;
  doc.cols = mu.cols;
  doc.names = {"mu", "mask"};
  doc.arrays = {floats_from_image(mu), floats_from_image(mask)};
  ordered_json extra = parse_object(extra_json, "extra header");
  if (!extra.contains("pitch_m")) extra["pitch_m"] = grid.pitch;
  if (!extra.contains("origin_m")) extra["origin_m"] = {grid.origin.x, grid.origin.y};
  doc.extra_json = extra.dump();
  write_egrid(path, doc);
}

}  // namespace elasto
