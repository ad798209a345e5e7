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

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elasto/fem.hpp"
#include "elasto/grid.hpp"
#include "elasto/mesh.hpp"

namespace elasto {

struct ItrConfig {
  double nu = 0.45;
  /// Weight of the spring traction tying u_p to u_m on the outer boundary.
  double k_s = 1e-3;
  /// TV weight relative to the data energy of u_m per unit vessel-size length.
  double alpha_mu = 1e-3;
  int outer_iterations = 30;
  int bfgs_updates_per_step = 5;
  double G0_vessel = 1.0;
  double G0_background = 0.1;
  double tvd_epsilon = 1e-8;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 20;
  /// Largest change of ln G in the first BFGS step.
  double first_step = 0.2;
};

/// Outer-boundary tractions (2 per outer node, unitless like G) and the
/// lumen pressure.
struct BoundaryParams {
  std::vector<int> outer_nodes;
  Eigen::VectorXd tau;  // (tx, ty) per outer node
  double P_it = 0.0;
};

struct ItrState {
  /// Nodal modulus over the whole mesh; only vessel nodes change.
  std::vector<double> G;
  BoundaryParams boundary;
  /// Total objective after each boundary step.
  std::vector<double> history;
  std::vector<double> p_it_history;
  int line_search_failures = 0;
  /// BFGS inverse Hessian in ln G over the free nodes; empty until the first update.
  Eigen::MatrixXd inverse_hessian;
};

struct ItrEvaluation {
  double objective = 0.0;
  double data = 0.0;
  double regularization = 0.0;
  /// d objective / d G at the free (vessel) nodes, in free-node order.
  Eigen::VectorXd gradient;
};

/// Reconstruction problem on a fixed mesh and measured displacement.
class ItrSolver {
 public:
  ItrSolver(const Mesh& mesh, const NodalField& u_m, const ItrConfig& cfg = {});
  ~ItrSolver();
  ItrSolver(const ItrSolver&) = delete;
  ItrSolver& operator=(const ItrSolver&) = delete;

  const Mesh& mesh() const noexcept { return mesh_; }
  const ItrConfig& config() const noexcept { return cfg_; }
  /// Vessel nodes, in ascending order; the unknowns of the modulus step.
  const std::vector<int>& free_nodes() const noexcept { return free_; }
  /// G0: G0_vessel on vessel nodes, G0_background elsewhere.
  const std::vector<double>& prior() const noexcept { return g0_; }
  double alpha_effective() const noexcept { return alpha_eff_; }

  /// Least-squares optimal boundary parameters for modulus G.
  BoundaryParams boundary_step(const std::vector<double>& G);

  /// Solves (K + k_s F_o) u_p = F_o tau + f_P P_it + k_s F_o u_m.
  NodalField predict_displacement(const std::vector<double>& G, const BoundaryParams& b);

  /// Objective 1/2 (u_p - u_m)^T D (u_p - u_m) + alpha_eff * TV(ln(G/G0)) and
  /// its adjoint gradient with respect to the free-node moduli.
  ItrEvaluation objective_and_gradient(const std::vector<double>& G, const BoundaryParams& b);

  /// Data term alone for a given predicted displacement.
  double data_term(const NodalField& u_p) const;
  double regularization(const std::vector<double>& G) const;

  /// Up to bfgs_updates_per_step BFGS iterations on ln G with Armijo
  /// backtracking; the boundary stays fixed.
  void modulus_step(ItrState& state);

 private:
  struct Factor;
  void factorize(const std::vector<double>& G);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  void check_modulus(const std::vector<double>& G) const;
  Eigen::VectorXd regularization_gradient(const std::vector<double>& G, double& value) const;

  const Mesh& mesh_;
  ItrConfig cfg_;
  Eigen::VectorXd u_m_;
  SparseMatrix D_;
  SparseMatrix F_o_;
  Eigen::VectorXd f_P_;
  std::vector<int> free_;
  std::vector<int> outer_;
  std::vector<double> g0_;
  double alpha_eff_ = 0.0;
  std::unique_ptr<Factor> factor_;
};

struct ItrResult {
  ItrState state;
  /// Quantitative modulus PP * G / P_it at the nodes (Pa).
  std::vector<double> modulus;
  GridSpec grid;
  Image mu;    // gridded, vessel-masked (Pa)
  Image mask;
  double seconds = 0.0;
};

/// Alternates boundary_step and modulus_step for cfg.outer_iterations from
/// G = G0, rescales by the pulse pressure and grids the result. The grid
/// defaults to 128 x 128 at 0.86 mm centered on the mesh's vessel center.
ItrResult reconstruct(const Mesh& mesh, const NodalField& u_m, double pulse_pressure, const ItrConfig& cfg = {},
                      const GridSpec* grid = nullptr);

/// Convergence report: objective history, P_it trace, timing, line-search failures.
std::string itr_report_json(const ItrResult& result, const ItrConfig& cfg);

}  // namespace elasto
