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

// Acceptance checks of the pipeline. Prints one PASS/FAIL line per criterion
// and exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "elasto/datagen.hpp"
#include "elasto/egrid.hpp"
#include "elasto/fem.hpp"
#include "elasto/itr.hpp"
#include "elasto/locate.hpp"
#include "elasto/metrics.hpp"
#include "elasto/registration.hpp"
#include "elasto/rng.hpp"
#include "elasto/ussim.hpp"

namespace fs = std::filesystem;
using namespace elasto;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Runner {
  std::vector<std::pair<std::string, Outcome>> results;
  ordered_json summary = ordered_json::object();

  void run(const std::string& name, const std::function<Outcome(ordered_json&)>& check) {
    ordered_json rec = ordered_json::object();
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = check(rec);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    rec["pass"] = o.pass;
    rec["wall_seconds"] = seconds_since(t0);
    summary[name] = rec;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(name, o);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- forward

// Inner-wall radial displacement of a wall (a < r < b, modulus mu) bonded to an
// unbounded medium (modulus mu_b), plane strain, lumen pressure P.
double lame_inner_displacement(double a, double b, double mu, double mu_b, double nu, double P) {
  const double lam = 2.0 * nu / (1.0 - 2.0 * nu);
  Eigen::Matrix3d M;
  M << 2 * mu * (lam + 1), -2 * mu / (a * a), 0,  //
      b, 1 / b, -1 / b,                           //
      2 * mu * (lam + 1), -2 * mu / (b * b), 2 * mu_b / (b * b);
  const Eigen::Vector3d x = M.fullPivLu().solve(Eigen::Vector3d(-P, 0, 0));
  return x(0) * a + x(1) / a;
}

Outcome forward_lame(ordered_json& rec) {
  VesselSpec spec;
  spec.base_radius = 0.020;
  spec.base_thickness = 0.005;
  const double mu = 1000.0, mu_b = 5.0, nu = 0.45, P = 1000.0;
  const double exact = lame_inner_displacement(0.020, 0.025, mu, mu_b, nu, P);
  std::vector<double> errs;
  double fine_seconds = 0.0;
  for (double h : {4e-3, 2e-3, 1e-3}) {
    const auto t0 = Clock::now();
    const Mesh m = build_mesh(spec, h, ElementKind::tri3);
    ModulusField field{std::vector<double>(m.node_count(), mu), mu_b};
    BoundarySpec bc;
    bc.lumen_pressure = P;
    const NodalField u = solve_forward(m, field, bc, nu);
    double s = 0.0;
    const auto lumen = m.lumen_nodes();
    for (int n : lumen) {
      const Vec2 d = m.nodes[n] - m.vessel_center;
      s += dot(u.vec(n), d) / norm(d);
    }
    const double ur = s / static_cast<double>(lumen.size());
    errs.push_back(std::abs(ur - exact) / exact);
    fine_seconds = seconds_since(t0);
    rec["levels"].push_back({{"target_h_m", h}, {"nodes", m.node_count()}, {"u_r_m", ur}, {"rel_error", errs.back()}});
  }
  rec["exact_u_r_m"] = exact;
  rec["fine_seconds"] = fine_seconds;
  const bool monotone = errs[0] > errs[1] && errs[1] > errs[2];
  const bool pass = errs[2] <= 0.03 && monotone && fine_seconds < 10.0;
  return {pass, fmt("rel error at h=1mm %.4f (<= 0.03), errors %.4f > %.4f > %.4f %s, %.2f s (< 10 s)", errs[2], errs[0],
                    errs[1], errs[2], monotone ? "monotone" : "NOT monotone", fine_seconds)};
}

// ---------------------------------------------------------------- adjoint

Outcome adjoint_fd(ordered_json& rec) {
  const auto t0 = Clock::now();
  VesselSpec spec;
  spec.base_radius = 0.02;
  spec.base_thickness = 0.006;
  MeshOptions mo;
  mo.kind = ElementKind::quad4;
  mo.outer = vessel_window(spec, 0.006);
  mo.angular_divisions = 15;
  mo.vessel_layers = 1;
  mo.background_layers = 2;
  const Mesh m = build_mesh(spec, mo);
  BoundarySpec bc;
  bc.lumen_pressure = 1.0;
  const NodalField um = solve_forward(m, two_sector_modulus(m, 4.0, 1.0, 0.1), bc, 0.45);
  ItrSolver s(m, um);
  std::vector<double> G = s.prior();
  CounterRng r(3);
  for (int n : s.free_nodes()) G[n] *= 1.0 + 0.5 * r.uniform();
  const BoundaryParams b = s.boundary_step(G);
  const ItrEvaluation ev = s.objective_and_gradient(G, b);
  std::vector<double> fd(s.free_nodes().size());
  double fd_max = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const int n = s.free_nodes()[i];
    const double h = 1e-6 * G[n];
    auto gp = G, gm = G;
    gp[n] += h;
    gm[n] -= h;
    fd[i] = (s.objective_and_gradient(gp, b).objective - s.objective_and_gradient(gm, b).objective) / (2.0 * h);
    fd_max = std::max(fd_max, std::abs(fd[i]));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    worst = std::max(worst, std::abs(ev.gradient(static_cast<Eigen::Index>(i)) - fd[i]) /
                                std::max(std::abs(fd[i]), 1e-3 * fd_max));
  }
  const double t = seconds_since(t0);
  rec["vessel_nodes"] = s.free_nodes().size();
  rec["max_rel_error"] = worst;
  rec["seconds"] = t;
  const bool pass = s.free_nodes().size() == 30 && worst <= 1e-4 && t < 60.0;
  return {pass, fmt("%zu vessel nodes, max rel error %.2e (<= 1e-4), %.2f s (< 60 s)", s.free_nodes().size(), worst, t)};
}

// ---------------------------------------------------------------- inverse crime

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1] * (1.0 + 1e-12)) return false;
  }
  return true;
}

Outcome inverse_crime(ordered_json& rec) {
  const auto t0 = Clock::now();
  VesselSpec spec;
  spec.base_radius = 0.020;
  spec.base_thickness = 0.008;
  const Mesh m = reconstruction_mesh(spec);
  BoundarySpec bc;
  bc.lumen_pressure = 1.0;
  const NodalField um = solve_forward(m, two_sector_modulus(m, 4.0, 1.0, 0.1), bc, 0.45);
  const ItrResult res = reconstruct(m, um, 1.0);
  const double t = seconds_since(t0);
  const QuadrantRatio q = quadrant_modular_ratio(res.mu, res.mask);
  const bool mono = non_increasing(res.state.history);
  rec["nodes"] = m.node_count();
  rec["eta"] = q.eta;
  rec["objective"] = res.state.history;
  rec["line_search_failures"] = res.state.line_search_failures;
  rec["seconds"] = t;
  const bool pass = std::abs(q.eta - 4.0) <= 0.8 && mono && t < 300.0;
  return {pass, fmt("eta %.3f (4 +- 20%%), objective %.3e -> %.3e %s, %d line-search failures, %.1f s (< 300 s)", q.eta,
                    res.state.history.front(), res.state.history.back(), mono ? "non-increasing" : "INCREASES",
                    res.state.line_search_failures, t)};
}

// ---------------------------------------------------------------- phantom chain

struct ChainResult {
  double contrast = 0.0;
  double eta = 0.0;
  double eta_direct = 0.0;
  double peak = 0.0;
  double rmse = 0.0;
  double identical_max = -1.0;
  double pressure = 0.0;
  int failures = 0;
  double seconds = 0.0;
};

constexpr double kTargetPeak = 0.6e-3;

// Phantom -> RF pair -> registration -> ITR. The phantom displacement is scaled
// linearly (with the pressure) so that the peak wall displacement stays well
// inside the capture range of the registration.
ChainResult run_chain(double contrast, bool identical_check) {
  const auto t0 = Clock::now();
  PhantomOptions po;
  po.contrast = contrast;
  const DigitalPhantom ph = make_digital_phantom(po);
  const auto vm = ph.mesh.vessel_node_mask();
  double peak = 0.0;
  for (std::size_t n = 0; n < ph.mesh.node_count(); ++n) {
    if (vm[n]) peak = std::max(peak, norm(ph.displacement.vec(n)));
  }
  const double s = kTargetPeak / peak;
  NodalField u = ph.displacement;
  for (double& v : u.values) v *= s;
  ChainResult out;
  out.contrast = contrast;
  out.pressure = po.pressure * s;
  out.peak = kTargetPeak;

  const Mesh rec = reconstruction_mesh(ph.spec);
  const RfPair pair = simulate_rf_pair(ph.mesh, u, rec.bounding_box());
  const NodalField est = register_pair(pair.fixed, pair.moving, rec);

  const NodalField truth = transfer_field(u, ph.mesh, rec);
  const auto rvm = rec.vessel_node_mask();
  double se = 0.0;
  int cnt = 0;
  for (std::size_t n = 0; n < rec.node_count(); ++n) {
    if (!rvm[n]) continue;
    const Vec2 d = est.vec(n) - truth.vec(n);
    se += dot(d, d);
    ++cnt;
  }
  out.rmse = std::sqrt(se / cnt);

  if (identical_check) {
    const NodalField zero = register_pair(pair.fixed, pair.fixed, rec);
    out.identical_max = 0.0;
    for (double v : zero.values) out.identical_max = std::max(out.identical_max, std::abs(v));
  }

  const ItrResult res = reconstruct(rec, est, out.pressure);
  out.eta = quadrant_modular_ratio(res.mu, res.mask).eta;
  out.failures = res.state.line_search_failures;
  // Same reconstruction from the exact FE displacement, for reference.
  const ItrResult direct = reconstruct(rec, truth, out.pressure);
  out.eta_direct = quadrant_modular_ratio(direct.mu, direct.mask).eta;
  out.seconds = seconds_since(t0);
  std::printf("  phantom contrast %.1f: eta %.3f (exact displacement %.3f), registration rmse %.4f mm, %.1f s\n",
              contrast, out.eta, out.eta_direct, out.rmse * 1e3, out.seconds);
  std::fflush(stdout);
  return out;
}

ordered_json chain_json(const ChainResult& c) {
  return {{"contrast", c.contrast},       {"eta", c.eta},
          {"eta_exact_displacement", c.eta_direct}, {"peak_displacement_m", c.peak},
          {"pressure_pa", c.pressure},    {"registration_rmse_m", c.rmse},
          {"line_search_failures", c.failures}, {"seconds", c.seconds}};
}

// ---------------------------------------------------------------- metrics

Outcome metrics_exact(ordered_json& rec) {
  auto three = [](double v) { return fmt("%.3g", v); };
  bool ok = true;
  std::string etas;
  const Image mask(128, 128, 1.0);
  for (auto [up, expect] : {std::pair{48.3e3, "2.78"}, std::pair{95.1e3, "5.47"}, std::pair{170e3, "9.77"}}) {
    Image mu(128, 128);
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) {
        const Quadrant q = quadrant_of(r, c, 128, 128);
        mu(r, c) = q == Quadrant::upper ? up : q == Quadrant::lower ? 17.4e3 : 25e3;
      }
    }
    const double eta = quadrant_modular_ratio(mu, mask).eta;
    ok = ok && three(eta) == expect;
    etas += three(eta) + " ";
    rec["eta"].push_back(eta);
  }
  CounterRng rng(1);
  Image t(128, 128), p(128, 128);
  for (double& v : t.data) v = rng.uniform(1.0, 2.0);
  for (double& v : p.data) v = rng.uniform(1.0, 2.0);
  const double base = nmse(t, p);
  bool scale_ok = nmse(t, t) == 0.0;
  for (double a : {-2.0, 1e-3, 1e4}) {
    Image ts = t, ps = p;
    for (double& v : ts.data) v *= a;
    for (double& v : ps.data) v *= a;
    scale_ok = scale_ok && std::abs(nmse(ts, ps) - base) <= 1e-12 * base;
  }
  const double one = nmse(Image(128, 128, 1.0), Image(128, 128, 1.1));
  Image mt(128, 128), mp(128, 128);
  for (int k = 0; k < 4; ++k) mt(5, 5 + k) = 1.0;
  mp(5, 5) = mp(5, 6) = 1.0;
  const double d = dsc(mt, mp);
  ok = ok && scale_ok && std::abs(one - 0.01) <= 1e-12 && three(d) == "0.667";
  rec["nmse_uniform"] = one;
  rec["dsc_hand_count"] = d;
  return {ok, fmt("eta %s(2.78 5.47 9.77), nmse identity/scale %s, nmse(1, 1.1) %.6f, dsc %.3f", etas.c_str(),
                  scale_ok ? "ok" : "BROKEN", one, d)};
}

// ---------------------------------------------------------------- reproducibility

std::map<std::string, std::string> dataset_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    // The invocation record names the output directory and thread count.
    if (rel == "gen-dataset.config.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[rel] = ss.str();
  }
  return out;
}

std::string quote(const fs::path& p) {
  std::string s = "'";
  for (char c : p.string()) s += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return s + "'";
}

Outcome reproducibility(ordered_json& rec, const fs::path& cli, const fs::path& work) {
  std::vector<std::map<std::string, std::string>> runs;
  double seconds = 0.0;
  for (auto [name, threads] : {std::pair{"run1_t1", 1}, std::pair{"run2_t1", 1}, std::pair{"run3_t4", 4}}) {
    const fs::path out = work / "datasets" / name;
    fs::remove_all(out);
    const std::string cmd = quote(cli) + " gen-dataset --seed 7 --train 200 --val 20 --test 20 --threads " +
                            std::to_string(threads) + " --out " + quote(out) + " 2> " + quote(work / (std::string(name) + ".log"));
    const auto t0 = Clock::now();
    const int rc = std::system(cmd.c_str());
    seconds = std::max(seconds, seconds_since(t0));
    if (rc != 0) return {false, fmt("gen-dataset exited with %d (%s)", rc, name)};
    runs.push_back(dataset_files(out));
  }
  std::size_t egrids = 0;
  for (const auto& [f, _] : runs[0]) egrids += f.ends_with(".egrid");
  const bool same = runs[0] == runs[1] && runs[0] == runs[2];

  const auto manifest = ordered_json::parse(runs[0].at("manifest.json"));
  std::set<std::uint64_t> seeds;
  for (const auto& s : manifest.at("samples")) seeds.insert(s.at("seed").get<std::uint64_t>());
  rec["files"] = runs[0].size();
  rec["egrid_files"] = egrids;
  rec["unique_seeds"] = seeds.size();
  rec["max_run_seconds"] = seconds;
  const bool pass = same && egrids == 240 && seeds.size() == 240 && runs[0].count("manifest.json");
  return {pass, fmt("%zu EGRID files + manifest, %zu distinct seeds, 3 runs (threads 1, 1, 4) %s", egrids,
                    seeds.size(), same ? "bit-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elasto acceptance checks"};
  fs::path cli, work = "acceptance_work";
  app.add_option("--cli", cli, "Path of the elasto executable")->required();
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  Runner r;
  r.run("forward-lame", forward_lame);
  r.run("adjoint-gradient", adjoint_fd);
  r.run("inverse-crime", inverse_crime);

  std::vector<ChainResult> chain;
  r.run("phantom-contrast-table", [&](ordered_json& rec) {
    for (double c : {0.5, 1.0, 2.0, 4.0}) chain.push_back(run_chain(c, c == 1.0));
    for (const auto& c : chain) rec["phantoms"].push_back(chain_json(c));
    const double e05 = chain[0].eta, e1 = chain[1].eta, e2 = chain[2].eta, e4 = chain[3].eta;
    const bool pass = std::abs(e05 - 0.5) <= 0.15 && std::abs(e1 - 1.0) <= 0.15 && e4 >= 2.0 && e4 <= 4.0;
    return Outcome{pass, fmt("eta 0.5 -> %.3f (+-0.15), 1 -> %.3f (+-0.15), 2 -> %.3f, 4 -> %.3f (in [2, 4])", e05, e1,
                             e2, e4)};
  });
  r.run("registration", [&](ordered_json& rec) {
    if (chain.size() != 4) return Outcome{false, "phantom chain did not run"};
    double worst = 0.0;
    for (const auto& c : chain) worst = std::max(worst, c.rmse / c.peak);
    const double zero = chain[1].identical_max;
    rec["worst_rmse_fraction"] = worst;
    rec["identical_frames_max_m"] = zero;
    const bool pass = worst <= 0.10 && kTargetPeak >= 0.5e-3 && zero >= 0.0 && zero <= 1e-9;
    return Outcome{pass, fmt("peak %.2f mm, worst in-vessel rmse %.2f%% of peak (<= 10%%) over 4 phantoms, identical "
                             "frames max |u| %.1e m (<= 1e-9)",
                             kTargetPeak * 1e3, 100.0 * worst, zero)};
  });
  r.run("metrics-exactness", metrics_exact);
  r.run("dataset-reproducibility", [&](ordered_json& rec) { return reproducibility(rec, cli, work); });

  std::ofstream(work / "acceptance.json") << r.summary.dump(2) << "\n";
  int failed = 0;
  for (const auto& [name, o] : r.results) failed += !o.pass;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(r.results.size()) - failed, r.results.size());
  return failed == 0 ? 0 : 1;
}
