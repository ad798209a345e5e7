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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "elasto/datagen.hpp"
#include "elasto/egrid.hpp"
#include "elasto/error.hpp"
#include "elasto/itr.hpp"
#include "elasto/mesh_io.hpp"
#include "elasto/metrics.hpp"
#include "elasto/registration.hpp"
#include "elasto/ussim.hpp"
#include "report.hpp"

namespace elasto::cli {

void Command::setup(CLI::App* app) {
  app->add_option("--config", config_, "JSON file with parameter values (flags take precedence)");
  declare(app);
}

void Command::execute() {
  if (!config_.empty()) params_.apply(load_config(config_));
  run();
}

void Command::persist(const std::filesystem::path& dir) const {
  write_json(dir / (name() + ".config.json"), json{{"command", name()}, {"config", params_.effective()}});
}

void Command::info(const std::string& event, json fields) const { log("info", name(), event, std::move(fields)); }

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw UsageError(what + " must be positive");
}

ElementKind parse_kind(const std::string& s) {
  try {
    return element_kind_from_string(s);
  } catch (const Error&) {
    throw UsageError("unknown element kind: " + s);
  }
}

/// Modulus and mask of an EGRID file; the mask is derived from mu > 0 when absent.
std::pair<Image, Image> read_modulus(const std::filesystem::path& path) {
  const EgridDocument doc = read_egrid(path);
  if (std::find(doc.names.begin(), doc.names.end(), "mu") == doc.names.end()) {
    throw FormatError(path.string() + " has no mu array");
  }
  Image mu = image_from_floats(doc.array("mu"), doc.rows, doc.cols);
  Image mask = std::find(doc.names.begin(), doc.names.end(), "mask") != doc.names.end()
                   ? image_from_floats(doc.array("mask"), doc.rows, doc.cols)
                   : threshold_mask(mu);
  return {std::move(mu), std::move(mask)};
}

json ratio_json(const QuadrantRatio& q) {
  json regions = json::object();
  for (const RegionStats& s : q.stats) {
    regions[to_string(s.region)] = {{"mean", s.mean}, {"std", s.std}, {"pixels", s.pixel_count}};
  }
  return {{"eta", q.eta}, {"regions", regions}};
}

class GenDataset : public Command {
 public:
  std::string name() const override { return "gen-dataset"; }
  std::string description() const override { return "Generate a seeded EGRID training dataset"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add(app, "seed", cfg_.global_seed, "Global seed");
    params_.add(app, "train", cfg_.n_train, "Training samples");
    params_.add(app, "val", cfg_.n_val, "Validation samples");
    params_.add(app, "test", cfg_.n_test, "Test samples");
    params_.add_path(app, "out", out_, "Dataset directory");
    params_.add(app, "threads", cfg_.threads, "Worker threads");
    auto& o = cfg_.options;
    params_.add(app, "width", o.width, "Grid width (pixels)");
    params_.add(app, "height", o.height, "Grid height (pixels)");
    params_.add(app, "pitch", o.pitch, "Pixel pitch (m)");
    params_.add(app, "element", kind_, "Element kind: tri3 or quad4");
    params_.add(app, "target-h", o.target_h, "Mesh size (m)");
    params_.add(app, "nu", o.nu, "Poisson ratio");
    params_.add(app, "background-modulus", o.background_modulus, "Background shear modulus (Pa)");
    params_.add(app, "pressure-min", o.pressure_min, "Lowest lumen pressure (Pa)");
    params_.add(app, "pressure-max", o.pressure_max, "Highest lumen pressure (Pa)");
    params_.add(app, "max-shift", o.max_shift, "Largest translation (pixels)");
    params_.add(app, "profile-samples", o.profile_samples, "Angular samples of the modulus profile");
    params_.add(app, "mesh-attempts", o.mesh_attempts, "Meshing retries per sample");
  }

  void run() override {
    cfg_.options.element_kind = parse_kind(kind_);
    if (cfg_.n_train < 0 || cfg_.n_val < 0 || cfg_.n_test < 0) throw UsageError("sample counts must be non-negative");
    if (cfg_.threads < 1) throw UsageError("threads must be at least 1");
    ensure_directory(out_);
    cfg_.out = out_;
    persist(out_);
    const auto t0 = std::chrono::steady_clock::now();
    const DatasetSummary s = generate_dataset(cfg_, [this](const ManifestEntry& e, bool reused) {
      info("sample", {{"split", e.split}, {"index", e.index}, {"file", e.file}, {"reused", reused}});
    });
    info("done", {{"samples", s.entries.size()}, {"generated", s.generated}, {"reused", s.reused},
                  {"seconds", seconds_since(t0)}});
  }

 private:
  DatasetConfig cfg_;
  std::filesystem::path out_;
  std::string kind_ = "tri3";
};

class DigitalPhantomCmd : public Command {
 public:
  std::string name() const override { return "digital-phantom"; }
  std::string description() const override { return "Two-sector contrast phantom with its forward solution"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add(app, "contrast", o_.contrast, "Upper/lower sector modulus ratio");
    params_.add(app, "lower-modulus", o_.lower_modulus, "Lower-sector shear modulus (Pa)");
    params_.add(app, "background-modulus", o_.background_modulus, "Background shear modulus (Pa)");
    params_.add(app, "pressure", o_.pressure, "Lumen pressure (Pa)");
    params_.add(app, "lumen-radius", o_.lumen_radius, "Lumen radius (m)");
    params_.add(app, "wall-thickness", o_.wall_thickness, "Wall thickness (m)");
    params_.add(app, "nu", o_.nu, "Poisson ratio of the phantom");
    params_.add(app, "target-h", o_.target_h, "Phantom mesh size (m)");
    params_.add(app, "width", o_.width, "Grid width (pixels)");
    params_.add(app, "height", o_.height, "Grid height (pixels)");
    params_.add(app, "pitch", o_.pitch, "Pixel pitch (m)");
    params_.add(app, "recon-margin", margin_, "Tissue margin of the reconstruction mesh (m)");
    params_.add(app, "recon-h", recon_h_, "Reconstruction mesh size (m)");
    params_.add_path(app, "out", out_, "Output directory");
  }

  void run() override {
    require_positive(o_.contrast, "contrast");
    require_positive(margin_, "recon-margin");
    require_positive(recon_h_, "recon-h");
    ensure_directory(out_);
    persist(out_);
    const auto t0 = std::chrono::steady_clock::now();
    const DigitalPhantom ph = make_digital_phantom(o_);
    write_grid_sample(out_ / "truth.egrid", ph.truth);
    save_mesh(out_ / "phantom.mesh", ph.mesh);
    save_field(out_ / "phantom_u.field", ph.displacement);
    const Mesh rec = reconstruction_mesh(ph.spec, margin_, recon_h_);
    save_mesh(out_ / "recon.mesh", rec);
    save_field(out_ / "recon_u.field", transfer_field(ph.displacement, ph.mesh, rec));
    const QuadrantRatio q = quadrant_modular_ratio(ph.truth.mu, ph.truth.mask);
    info("done", {{"phantom_nodes", ph.mesh.node_count()}, {"recon_nodes", rec.node_count()}, {"eta", q.eta},
                  {"seconds", seconds_since(t0)}});
  }

 private:
  PhantomOptions o_;
  double margin_ = 0.008;
  double recon_h_ = kReconstructionElementSize;
  std::filesystem::path out_;
};

class SimulateUs : public Command {
 public:
  std::string name() const override { return "simulate-us"; }
  std::string description() const override { return "Render RF frames before and after a deformation"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add_path(app, "mesh", mesh_, "Tissue mesh of the displacement");
    params_.add_path(app, "displacement", disp_, "Nodal displacement field (m)");
    params_.add_path(app, "window-mesh", window_mesh_, "Mesh whose bounding box is imaged (default: tissue vessel + 8 mm)");
    params_.add(app, "displacement-scale", scale_, "Factor applied to the displacement");
    params_.add(app, "seed", o_.seed, "Scatterer seed");
    params_.add(app, "scatterers-per-cell", o_.scatterers_per_cell, "Scatterers per resolution cell");
    params_.add(app, "margin", o_.margin, "Scatterer margin around the window (m)");
    params_.add(app, "center-frequency", o_.psf.center_frequency, "Transmit center frequency (Hz)");
    params_.add(app, "sound-speed", o_.psf.sound_speed, "Speed of sound (m/s)");
    params_.add(app, "pulse-cycles", o_.psf.pulse_cycles, "Axial FWHM in wavelengths");
    params_.add(app, "lateral-fwhm", o_.psf.lateral_fwhm, "Lateral PSF FWHM (m)");
    params_.add(app, "axial-step", o_.psf.axial_step, "RF sample spacing along depth (m)");
    params_.add(app, "lateral-step", o_.psf.lateral_step, "Scan line spacing (m)");
    params_.add_path(app, "out", out_, "Output directory");
  }

  void run() override {
    require_file(mesh_, "tissue mesh");
    require_file(disp_, "displacement field");
    if (!window_mesh_.empty()) require_file(window_mesh_, "window mesh");
    if (!std::isfinite(scale_)) throw UsageError("displacement-scale must be finite");
    ensure_directory(out_);
    persist(out_);
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh tissue = load_mesh(mesh_);
    NodalField u = load_field(disp_);
    if (u.node_count() != tissue.node_count() || u.components != 2) {
      throw InvalidArgument("displacement does not match the tissue mesh");
    }
    for (double& v : u.values) v *= scale_;
    Box window;
    if (!window_mesh_.empty()) {
      window = load_mesh(window_mesh_).bounding_box();
    } else {
      const auto vessel = tissue.vessel_node_mask();
      window = {std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
                std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
      for (std::size_t n = 0; n < tissue.node_count(); ++n) {
        if (!vessel[n]) continue;
        const Vec2 p = tissue.nodes[n];
        window = {std::min(window.x_min, p.x), std::max(window.x_max, p.x), std::min(window.y_min, p.y),
                  std::max(window.y_max, p.y)};
      }
      constexpr double m = 0.008;
      window = {window.x_min - m, window.x_max + m, window.y_min - m, window.y_max + m};
    }
    const RfPair pair = simulate_rf_pair(tissue, u, window, o_);
    write_rf(out_ / "fixed.rf", pair.fixed);
    write_rf(out_ / "moving.rf", pair.moving);
    info("done", {{"rows", pair.fixed.geometry.rows}, {"cols", pair.fixed.geometry.cols},
                  {"scatterers", pair.scatterers}, {"outside", pair.outside}, {"seconds", seconds_since(t0)}});
  }

 private:
  std::filesystem::path mesh_, disp_, window_mesh_, out_;
  double scale_ = 1.0;
  RfPairOptions o_;
};

class Register : public Command {
 public:
  std::string name() const override { return "register"; }
  std::string description() const override { return "Estimate nodal displacement between two RF frames"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add_path(app, "fixed", fixed_, "RF frame before deformation");
    params_.add_path(app, "moving", moving_, "RF frame after deformation");
    params_.add_path(app, "mesh", mesh_, "Registration mesh");
    params_.add(app, "alpha", cfg_.alpha, "Equilibrium penalty weight");
    params_.add(app, "nu", cfg_.nu, "Poisson ratio of the penalty solid");
    params_.add(app, "levels", cfg_.levels, "Pyramid levels");
    params_.add(app, "max-iterations", cfg_.max_iterations, "Iterations per level");
    params_.add(app, "tolerance", cfg_.tolerance, "Relative decrease that counts as stalled");
    params_.add(app, "memory", cfg_.memory, "L-BFGS memory");
    params_.add(app, "epsilon", cfg_.epsilon, "L1 smoothing");
    params_.add_path(app, "out", out_, "Output directory");
  }

  void run() override {
    require_file(fixed_, "fixed frame");
    require_file(moving_, "moving frame");
    require_file(mesh_, "mesh");
    if (cfg_.levels < 1 || cfg_.max_iterations < 1 || cfg_.memory < 1) throw UsageError("counts must be positive");
    ensure_directory(out_);
    persist(out_);
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = load_mesh(mesh_);
    RegistrationReport rep;
    const NodalField u = register_pair(read_rf(fixed_), read_rf(moving_), mesh, cfg_, &rep);
    save_field(out_ / "displacement.field", u);
    json levels = json::array();
    for (const RegistrationLevel& l : rep.levels) {
      levels.push_back({{"factor", l.factor}, {"iterations", l.iterations}, {"initial", l.initial},
                        {"final", l.final_value}, {"data", l.data_term}, {"penalty", l.penalty_term},
                        {"points", l.points}});
    }
    double peak = 0.0;
    for (std::size_t n = 0; n < u.node_count(); ++n) peak = std::max(peak, norm(u.vec(n)));
    const double secs = seconds_since(t0);
    write_json(out_ / "report.json", {{"levels", levels}, {"functional", rep.functional}, {"max_displacement_m", peak},
                                      {"seconds", secs}});
    info("done", {{"functional", rep.functional}, {"max_displacement_m", peak}, {"seconds", secs}});
  }

 private:
  std::filesystem::path fixed_, moving_, mesh_, out_;
  RegistrationConfig cfg_;
};

class Reconstruct : public Command {
 public:
  std::string name() const override { return "reconstruct"; }
  std::string description() const override { return "Iterative modulus reconstruction from a displacement field"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add_path(app, "mesh", mesh_, "Reconstruction mesh");
    params_.add_path(app, "displacement", disp_, "Measured nodal displacement (m)");
    params_.add(app, "pressure", pressure_, "Pulse pressure (Pa)");
    params_.add(app, "nu", cfg_.nu, "Poisson ratio");
    params_.add(app, "k-s", cfg_.k_s, "Boundary spring weight");
    params_.add(app, "alpha-mu", cfg_.alpha_mu, "Relative TV weight");
    params_.add(app, "outer-iterations", cfg_.outer_iterations, "Boundary/modulus alternations");
    params_.add(app, "bfgs-updates", cfg_.bfgs_updates_per_step, "BFGS updates per modulus step");
    params_.add(app, "g0-vessel", cfg_.G0_vessel, "Prior and initial G in the vessel");
    params_.add(app, "g0-background", cfg_.G0_background, "Fixed G of the background");
    params_.add(app, "tvd-epsilon", cfg_.tvd_epsilon, "TV smoothing");
    params_.add(app, "width", width_, "Output grid width (pixels)");
    params_.add(app, "height", height_, "Output grid height (pixels)");
    params_.add(app, "pitch", pitch_, "Output pixel pitch (m)");
    params_.add_path(app, "out", out_, "Output directory");
  }

  void run() override {
    require_file(mesh_, "mesh");
    require_file(disp_, "displacement field");
    require_positive(pressure_, "pressure");
    require_positive(pitch_, "pitch");
    if (width_ < 1 || height_ < 1) throw UsageError("grid size must be positive");
    ensure_directory(out_);
    persist(out_);
    const Mesh mesh = load_mesh(mesh_);
    const NodalField u = load_field(disp_);
    const GridSpec grid = GridSpec::centered_on(mesh.vessel_center, width_, height_, pitch_);
    const ItrResult res = reconstruct(mesh, u, pressure_, cfg_, &grid);
    const json extra{{"kind", "itr"}, {"pulse_pressure_pa", pressure_}, {"P_it", res.state.boundary.P_it}};
    write_modulus_image(out_ / "modulus.egrid", res.mu, res.mask, res.grid, extra.dump());
    json report = json::parse(itr_report_json(res, cfg_));
    const QuadrantRatio q = quadrant_modular_ratio(res.mu, res.mask);
    report["quadrants"] = ratio_json(q);
    write_json(out_ / "report.json", report);
    info("done", {{"eta", q.eta}, {"P_it", res.state.boundary.P_it}, {"objective", res.state.history.back()},
                  {"line_search_failures", res.state.line_search_failures}, {"seconds", res.seconds}});
  }

 private:
  std::filesystem::path mesh_, disp_, out_;
  double pressure_ = 0.0;
  ItrConfig cfg_;
  int width_ = 128;
  int height_ = 128;
  double pitch_ = 0.86e-3;
};

class Metrics : public Command {
 public:
  std::string name() const override { return "metrics"; }
  std::string description() const override { return "Compare a predicted modulus image with the truth"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add_path(app, "truth", truth_, "Ground-truth EGRID");
    params_.add_path(app, "pred", pred_, "Predicted EGRID");
    params_.add_path(app, "mesh", mesh_, "Mesh of --displacement (for the strain metric)");
    params_.add_path(app, "displacement", disp_, "Nodal displacement (for the strain metric)");
    params_.add(app, "pressure", pressure_, "Pulse pressure for the strain metric (Pa)");
    params_.add_path(app, "out", out_, "Directory for metrics.json (stdout only when unset)");
  }

  void run() override {
    require_file(truth_, "truth image");
    require_file(pred_, "predicted image");
    const bool strain = !disp_.empty() || !mesh_.empty();
    if (strain) {
      require_file(mesh_, "mesh");
      require_file(disp_, "displacement field");
      require_positive(pressure_, "pressure");
    }
    if (!out_.empty()) {
      ensure_directory(out_);
      persist(out_);
    }
    const auto [mu_t, mask_t] = read_modulus(truth_);
    const auto [mu_p, mask_p] = read_modulus(pred_);
    if (!mu_t.same_shape(mu_p)) throw InvalidArgument("truth and prediction differ in shape");
    json r{{"nmse", nmse(mu_t, mu_p)}, {"dsc", dsc(threshold_mask(mu_t), threshold_mask(mu_p))}};
    r["truth"] = ratio_json(quadrant_modular_ratio(mu_t, mask_t));
    r["pred"] = ratio_json(quadrant_modular_ratio(mu_p, mask_p));
    if (strain) {
      r["principal_strain_per_pa"] = pressure_normalized_principal_strain(load_field(disp_), load_mesh(mesh_), pressure_);
    }
    std::printf("%s\n", r.dump(2).c_str());
    if (!out_.empty()) write_json(out_ / "metrics.json", r);
  }

 private:
  std::filesystem::path truth_, pred_, mesh_, disp_, out_;
  double pressure_ = 0.0;
};

class RenderReport : public Command {
 public:
  std::string name() const override { return "render-report"; }
  std::string description() const override { return "Side-by-side PNG of displacements and modulus images"; }

 protected:
  void declare(CLI::App* app) override {
    params_.add_path(app, "displacement", disp_, "EGRID with ux and uy arrays");
    params_.add_path(app, "truth", truth_, "Ground-truth modulus EGRID");
    params_.add_path(app, "dl", dl_, "Network prediction EGRID (optional)");
    params_.add_path(app, "itr", itr_, "Iterative reconstruction EGRID (optional)");
    params_.add(app, "scale", scale_, "Pixel enlargement");
    params_.add_path(app, "out", out_, "Output PNG");
  }

  void run() override {
    require_file(disp_, "displacement image");
    require_file(truth_, "truth image");
    if (!dl_.empty()) require_file(dl_, "DL image");
    if (!itr_.empty()) require_file(itr_, "ITR image");
    if (out_.empty()) throw UsageError("missing output PNG");
    if (scale_ < 1) throw UsageError("scale must be at least 1");
    if (out_.has_parent_path()) ensure_directory(out_.parent_path());

    const EgridDocument d = read_egrid(disp_);
    const bool has_mask = std::find(d.names.begin(), d.names.end(), "mask") != d.names.end();
    std::vector<Panel> panels;
    for (const char* comp : {"ux", "uy"}) {
      Panel p;
      p.image = image_from_floats(d.array(comp), d.rows, d.cols);
      if (has_mask) p.mask = image_from_floats(d.array("mask"), d.rows, d.cols);
      p.lo = std::numeric_limits<double>::max();
      p.hi = std::numeric_limits<double>::lowest();
      for (std::size_t i = 0; i < p.image.data.size(); ++i) {
        if (has_mask && p.mask.data[i] == 0.0) continue;
        p.lo = std::min(p.lo, p.image.data[i]);
        p.hi = std::max(p.hi, p.image.data[i]);
      }
      panels.push_back(std::move(p));
    }
    const auto [mu_t, mask_t] = read_modulus(truth_);
    const double hi = *std::max_element(mu_t.data.begin(), mu_t.data.end());
    panels.push_back({mu_t, mask_t, 0.0, hi});
    for (const auto& path : {dl_, itr_}) {
      if (path.empty()) continue;
      auto [mu, mask] = read_modulus(path);
      panels.push_back({std::move(mu), std::move(mask), 0.0, hi});
    }
    write_panels_png(out_, panels, scale_);
    info("done", {{"panels", panels.size()}, {"file", out_.string()}});
  }

 private:
  std::filesystem::path disp_, truth_, dl_, itr_, out_;
  int scale_ = 2;
};

}  // namespace

std::vector<std::unique_ptr<Command>> make_commands() {
  std::vector<std::unique_ptr<Command>> cmds;
  cmds.push_back(std::make_unique<GenDataset>());
  cmds.push_back(std::make_unique<DigitalPhantomCmd>());
  cmds.push_back(std::make_unique<SimulateUs>());
  cmds.push_back(std::make_unique<Register>());
  cmds.push_back(std::make_unique<Reconstruct>());
  cmds.push_back(std::make_unique<Metrics>());
  cmds.push_back(std::make_unique<RenderReport>());
  return cmds;
}

}  // namespace elasto::cli
