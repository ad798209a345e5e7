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

#include <benchmark/benchmark.h>

#include "elasto/datagen.hpp"
#include "elasto/fem.hpp"
#include "elasto/itr.hpp"
#include "elasto/ussim.hpp"

namespace {

using namespace elasto;

const Mesh& domain_mesh(double h) {
  static const Mesh coarse = build_mesh(sample_vessel_spec(1), 2e-3, ElementKind::tri3);
  static const Mesh fine = build_mesh(sample_vessel_spec(1), 1e-3, ElementKind::tri3);
  return h < 1.5e-3 ? fine : coarse;
}

void BM_AssembleStiffness(benchmark::State& state) {
  const Mesh& m = domain_mesh(state.range(0) * 1e-3);
  const ModulusField mu = vessel_modulus(m, modulus_profile(sample_vessel_spec(1)), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(m, mu, 0.45));
  state.counters["nodes"] = static_cast<double>(m.node_count());
}
BENCHMARK(BM_AssembleStiffness)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ForwardSolve(benchmark::State& state) {
  const Mesh& m = domain_mesh(state.range(0) * 1e-3);
  const ModulusField mu = vessel_modulus(m, modulus_profile(sample_vessel_spec(1)), 5.0);
  const BoundarySpec bc;
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(m, mu, bc, 0.45));
  state.counters["nodes"] = static_cast<double>(m.node_count());
}
BENCHMARK(BM_ForwardSolve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_GenerateSample(benchmark::State& state) {
  std::uint64_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_sample(7, index++));
}
BENCHMARK(BM_GenerateSample)->Unit(benchmark::kMillisecond);

void BM_RenderRf(benchmark::State& state) {
  const PsfParams psf;
  const Box window{-0.01, 0.01, 0.09, 0.11};
  const ScattererField sf = make_scatterers(window, psf, static_cast<double>(state.range(0)), 3);
  const RfGeometry g = RfGeometry::covering(window, psf);
  for (auto _ : state) benchmark::DoNotOptimize(render_rf(sf, g, psf));
  state.counters["scatterers"] = static_cast<double>(sf.positions.size());
}
BENCHMARK(BM_RenderRf)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ItrObjectiveGradient(benchmark::State& state) {
  VesselSpec spec;
  spec.base_radius = 0.020;
  spec.base_thickness = 0.008;
  const Mesh m = reconstruction_mesh(spec);
  BoundarySpec bc;
  bc.lumen_pressure = 1.0;
  const NodalField um = solve_forward(m, two_sector_modulus(m, 4.0, 1.0, 0.1), bc, 0.45);
  ItrSolver s(m, um);
  std::vector<double> G = s.prior();
  const BoundaryParams b = s.boundary_step(G);
  int k = 0;
  for (auto _ : state) {
    // Perturb one node so every evaluation refactorizes, as in a line search.
    G[s.free_nodes()[k++ % s.free_nodes().size()]] *= 1.0 + 1e-9;
    benchmark::DoNotOptimize(s.objective_and_gradient(G, b));
  }
  state.counters["nodes"] = static_cast<double>(m.node_count());
}
BENCHMARK(BM_ItrObjectiveGradient)->Unit(benchmark::kMillisecond);

void BM_ItrBoundaryStep(benchmark::State& state) {
  VesselSpec spec;
  spec.base_radius = 0.020;
  spec.base_thickness = 0.008;
  const Mesh m = reconstruction_mesh(spec);
  BoundarySpec bc;
  bc.lumen_pressure = 1.0;
  const NodalField um = solve_forward(m, two_sector_modulus(m, 4.0, 1.0, 0.1), bc, 0.45);
  ItrSolver s(m, um);
  std::vector<double> G = s.prior();
  for (auto _ : state) {
    G[s.free_nodes().front()] *= 1.0 + 1e-9;
    benchmark::DoNotOptimize(s.boundary_step(G));
  }
}
BENCHMARK(BM_ItrBoundaryStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
