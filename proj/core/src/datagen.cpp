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

#include "elasto/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "elasto/egrid.hpp"
#include "elasto/error.hpp"
#include "elasto/rng.hpp"

namespace elasto {
namespace {

using nlohmann::ordered_json;

// Stream ids of the per-sample generator.
constexpr std::uint64_t kStreamLoad = 1;
constexpr std::uint64_t kStreamShift = 2;
constexpr std::uint64_t kStreamMeshRetry = 2000;

const char* const kSplits[3] = {"train", "val", "test"};

std::string sample_file(const char* split, int local) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/sample_%06d.egrid", split, local);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Column and row extents of the nonzero pixels; false when the mask is empty.
bool mask_extent(const Image& mask, int& c0, int& c1, int& r0, int& r1) {
  c0 = mask.cols;
  r0 = mask.rows;
  c1 = -1;
  r1 = -1;
  for (int r = 0; r < mask.rows; ++r) {
    for (int c = 0; c < mask.cols; ++c) {
      if (mask(r, c) == 0.0) continue;
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
    }
  }
  return c1 >= 0;
}

}  // namespace

NodalField pressure_normalize(const NodalField& u, double pressure) {
  if (!(pressure > 0.0)) throw InvalidArgument("pressure must be positive");
  NodalField out = u;
  for (double& v : out.values) v /= pressure;
  return out;
}

GridSampler::GridSampler(const Mesh& mesh, const GridSpec& grid) : mesh_(&mesh), grid_(grid) {
  const Locator locator(mesh, Region::vessel);
  locations_.resize(static_cast<std::size_t>(grid.width) * grid.height);
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      locations_[static_cast<std::size_t>(r) * grid.width + c] = locator.locate(grid.pixel_center(r, c));
    }
  }
}

Image GridSampler::mask() const {
  Image img(grid_.height, grid_.width);
  for (std::size_t i = 0; i < locations_.size(); ++i) img.data[i] = locations_[i] ? 1.0 : 0.0;
  return img;
}

Image GridSampler::sample(const NodalField& field, int component) const {
  if (field.node_count() != mesh_->node_count()) throw InvalidArgument("field does not match the mesh");
  if (component < 0 || component >= field.components) throw InvalidArgument("component out of range");
  Image img(grid_.height, grid_.width);
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    const Location& loc = locations_[i];
    if (!loc) continue;
    const auto el = mesh_->element(static_cast<std::size_t>(loc.element));
    double v = 0.0;
    for (std::size_t a = 0; a < el.size(); ++a) v += loc.shape[a] * field.at(el[a], component);
    img.data[i] = v;
  }
  return img;
}

Image GridSampler::sample(const ModulusField& mu) const {
  NodalField f;
  f.components = 1;
  f.values = mu.nodal;
  return sample(f, 0);
}

Image interp_to_grid(const NodalField& field, const Mesh& mesh, const GridSpec& grid, int component) {
  return GridSampler(mesh, grid).sample(field, component);
}

Image shift_image(const Image& img, int shift_col, int shift_row) {
  Image out(img.rows, img.cols, 0.0);
  for (int r = 0; r < img.rows; ++r) {
    const int sr = r - shift_row;
    if (sr < 0 || sr >= img.rows) continue;
    for (int c = 0; c < img.cols; ++c) {
      const int sc = c - shift_col;
      if (sc >= 0 && sc < img.cols) out(r, c) = img(sr, sc);
    }
  }
  return out;
}

std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t index) { return derive_seed(global_seed, index); }

GridSample generate_sample(std::uint64_t global_seed, std::uint64_t index, const DatagenOptions& options) {
  const std::uint64_t seed = sample_seed(global_seed, index);
  VesselSpec spec;
  Mesh mesh;
  for (int attempt = 0;; ++attempt) {
    spec = sample_vessel_spec(attempt == 0 ? seed : derive_seed(seed, kStreamMeshRetry + attempt));
    spec.background_modulus = options.background_modulus;
    try {
      MeshOptions mo;
      mo.kind = options.element_kind;
      mo.target_h = options.target_h;
      mesh = build_mesh(spec, mo);
      break;
    } catch (const MeshingError&) {
      if (attempt + 1 >= options.mesh_attempts) throw;
    }
  }

  CounterRng load(seed, kStreamLoad);
  BoundarySpec bc;
  bc.lumen_pressure = load.uniform(options.pressure_min, options.pressure_max);
  bc.top_mode = load.bernoulli(0.5) ? EdgeMode::fixed_lateral : EdgeMode::traction_free;
  bc.bottom_mode = load.bernoulli(0.5) ? EdgeMode::fixed_lateral : EdgeMode::traction_free;

  const ModulusProfile profile = modulus_profile(spec, options.profile_samples);
  const ModulusField mu = vessel_modulus(mesh, profile, options.background_modulus);
  const NodalField u = pressure_normalize(solve_forward(mesh, mu, bc, options.nu), bc.lumen_pressure);

  GridSample s;
  s.grid = GridSpec::centered_on(vessel_center(spec), options.width, options.height, options.pitch);
  const GridSampler sampler(mesh, s.grid);
  s.mask = sampler.mask();
  s.ux = sampler.sample(u, 0);
  s.uy = sampler.sample(u, 1);
  s.mu = sampler.sample(mu);
  s.pressure = bc.lumen_pressure;
  s.spec_seed = spec.rng_seed;
  s.provenance = Provenance::generated;
  s.index = static_cast<std::int64_t>(index);

  // Integer translation drawn from the shifts that keep the whole mask in frame.
  int c0, c1, r0, r1;
  if (options.max_shift > 0 && mask_extent(s.mask, c0, c1, r0, r1)) {
    CounterRng shift(seed, kStreamShift);
    const int col_lo = std::max(-options.max_shift, -c0), col_hi = std::min(options.max_shift, s.mask.cols - 1 - c1);
    const int row_lo = std::max(-options.max_shift, -r0), row_hi = std::min(options.max_shift, s.mask.rows - 1 - r1);
    s.shift_col = static_cast<int>(shift.uniform_int(col_lo, col_hi));
    s.shift_row = static_cast<int>(shift.uniform_int(row_lo, row_hi));
    for (Image* img : {&s.ux, &s.uy, &s.mu, &s.mask}) *img = shift_image(*img, s.shift_col, s.shift_row);
  }
  return s;
}

std::string dataset_config_json(const DatasetConfig& cfg) {
  const DatagenOptions& o = cfg.options;
  ordered_json j;
  j["format"] = "elasto-dataset";
  j["version"] = kDatasetVersion;
  j["egrid_version"] = kEgridVersion;
  j["seed"] = cfg.global_seed;
  j["counts"] = {{"train", cfg.n_train}, {"val", cfg.n_val}, {"test", cfg.n_test}};
  j["grid"] = {{"width", o.width}, {"height", o.height}, {"pitch_m", o.pitch}};
  j["options"] = {{"element_kind", to_string(o.element_kind)},
                  {"target_h_m", o.target_h},
                  {"nu", o.nu},
                  {"background_modulus_pa", o.background_modulus},
                  {"pressure_range_pa", {o.pressure_min, o.pressure_max}},
                  {"max_shift_px", o.max_shift},
                  {"profile_samples", o.profile_samples},
                  {"mesh_attempts", o.mesh_attempts}};
  return j.dump(2);
}

DatasetSummary generate_dataset(const DatasetConfig& cfg,
                                const std::function<void(const ManifestEntry&, bool)>& progress) {
  if (cfg.n_train < 0 || cfg.n_val < 0 || cfg.n_test < 0) throw InvalidArgument("split counts must be non-negative");
  if (cfg.out.empty()) throw InvalidArgument("dataset output path is empty");
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  for (const char* split : kSplits) fs::create_directories(cfg.out / split);

  const std::string config_text = dataset_config_json(cfg);
  const fs::path config_path = cfg.out / "config.json";
  if (fs::exists(config_path)) {
    std::ifstream in(config_path);
    const auto existing = ordered_json::parse(in, nullptr, false);
    if (existing.is_discarded() || existing != ordered_json::parse(config_text)) {
      throw FormatError("existing dataset at " + cfg.out.string() + " was generated with a different configuration");
    }
  } else {
    write_text_atomic(config_path, config_text + "\n");
  }

  const int counts[3] = {cfg.n_train, cfg.n_val, cfg.n_test};
  std::vector<ManifestEntry> entries;
  std::int64_t global = 0;
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < counts[s]; ++i) {
      ManifestEntry e;
      e.split = kSplits[s];
      e.index = global++;
      e.file = sample_file(kSplits[s], i);
      entries.push_back(std::move(e));
    }
  }

  DatasetSummary summary;
  std::atomic<std::size_t> next{0};
  std::atomic<int> generated{0}, reused{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= entries.size() || stop.load()) return;
      ManifestEntry& e = entries[k];
      try {
        const fs::path path = cfg.out / e.file;
        bool have = false;
        if (fs::exists(path)) {
          try {
            const auto h = ordered_json::parse(read_egrid_header(path));
            if (h.value("index", std::int64_t{-1}) == e.index) {
              e.seed = h.at("seed").get<std::uint64_t>();
              e.pressure = h.at("P_pa").get<double>();
              have = true;
            }
          } catch (const std::exception&) {
            have = false;
          }
        }
        if (!have) {
          const GridSample s = generate_sample(cfg.global_seed, static_cast<std::uint64_t>(e.index), cfg.options);
          write_grid_sample(path, s);
          e.seed = s.spec_seed;
          e.pressure = s.pressure;
          ++generated;
        } else {
          ++reused;
        }
        if (progress) progress(e, have);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
    }
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ordered_json manifest = ordered_json::parse(config_text);
  manifest["dtype"] = "f32le";
  manifest["arrays"] = {"ux", "uy", "mu", "mask"};
  ordered_json list = ordered_json::array();
  for (const ManifestEntry& e : entries) {
    list.push_back({{"split", e.split}, {"index", e.index}, {"file", e.file}, {"seed", e.seed}, {"P_pa", e.pressure}});
  }
  manifest["samples"] = std::move(list);
  write_text_atomic(cfg.out / "manifest.json", manifest.dump(2) + "\n");

  summary.entries = std::move(entries);
  summary.generated = generated;
  summary.reused = reused;
  return summary;
}

ModulusField two_sector_modulus(const Mesh& mesh, double upper, double lower, double background) {
  ModulusField mu;
  mu.background = background;
  mu.nodal.assign(mesh.node_count(), background);
  const auto vessel = mesh.vessel_node_mask();
  const Box box = mesh.bounding_box();
  const double tol = 1e-9 * std::max(box.width(), box.height());
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    if (!vessel[n]) continue;
    const double dy = mesh.nodes[n].y - mesh.vessel_center.y;
    mu.nodal[n] = dy > tol ? upper : dy < -tol ? lower : 0.5 * (upper + lower);
  }
  return mu;
}

DigitalPhantom make_digital_phantom(const PhantomOptions& o) {
  if (!(o.contrast > 0.0)) throw InvalidArgument("phantom contrast must be positive");
  DigitalPhantom ph;
  ph.spec = VesselSpec{};
  ph.spec.base_radius = o.lumen_radius;
  ph.spec.base_thickness = o.wall_thickness;
  ph.spec.background_modulus = o.background_modulus;
  MeshOptions mo;
  mo.kind = ElementKind::tri3;
  mo.target_h = o.target_h;
  ph.mesh = build_mesh(ph.spec, mo);
  ph.modulus = two_sector_modulus(ph.mesh, o.contrast * o.lower_modulus, o.lower_modulus, o.background_modulus);
  ph.bc.top_mode = EdgeMode::fixed_lateral;
  ph.bc.bottom_mode = EdgeMode::traction_free;
  ph.bc.lumen_pressure = o.pressure;
  ph.displacement = solve_forward(ph.mesh, ph.modulus, ph.bc, o.nu);

  GridSample& t = ph.truth;
  t.grid = GridSpec::centered_on(ph.mesh.vessel_center, o.width, o.height, o.pitch);
  const GridSampler sampler(ph.mesh, t.grid);
  const NodalField un = pressure_normalize(ph.displacement, o.pressure);
  t.mask = sampler.mask();
  t.ux = sampler.sample(un, 0);
  t.uy = sampler.sample(un, 1);
  t.mu = sampler.sample(ph.modulus);
  t.pressure = o.pressure;
  t.provenance = Provenance::comsol_style;
  return ph;
}

Mesh reconstruction_mesh(const VesselSpec& spec, double margin, double target_h) {
  MeshOptions mo;
  mo.kind = ElementKind::quad4;
  mo.target_h = target_h;
  mo.outer = vessel_window(spec, margin);
  return build_mesh(spec, mo);
}

NodalField transfer_field(const NodalField& field, const Mesh& from, const Mesh& to) {
  if (field.node_count() != from.node_count()) throw InvalidArgument("field does not match the source mesh");
  const Locator loc(from);
  NodalField out(field.components, to.node_count());
  for (std::size_t n = 0; n < to.node_count(); ++n) {
    const Location l = loc.locate_or_nearest(to.nodes[n]);
    for (int c = 0; c < field.components; ++c) out.at(n, c) = loc.interpolate(field, l, c);
  }
  return out;
}

}  // namespace elasto
