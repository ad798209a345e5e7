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

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "elasto/mesh.hpp"
#include "elasto/vessel.hpp"

namespace elasto {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Shear modulus over the two regions: nodal values interpolated inside
/// vessel elements, one constant inside background elements. Keeping the
/// regions separate avoids smearing the wall stiffness into the tissue.
struct ModulusField {
  std::vector<double> nodal;
  double background = 5.0;
};

/// Samples `profile` at the polar angle of every vessel node about the mesh's
/// vessel center; non-vessel nodes carry the background value.
ModulusField vessel_modulus(const Mesh& mesh, const ModulusProfile& profile, double background);

/// One integration point with physical shape-function gradients.
struct QuadPoint {
  double weight = 0.0;  // quadrature weight times |J|
  std::array<double, 4> shape{};
  std::array<Vec2, 4> grad{};
};

enum class Rule {
  full,     // 3x3 Gauss (quad4), 3-point (tri3)
  reduced,  // single centroid point
};

std::vector<QuadPoint> element_quadrature(const Mesh& mesh, std::size_t e, Rule rule);

/// Modulus of element e at a point with the given shape-function values.
double modulus_at(const Mesh& mesh, const ModulusField& mu, std::size_t e, const std::array<double, 4>& shape);

inline double lame_ratio(double nu) { return 2.0 * nu / (1.0 - 2.0 * nu); }

/// Plane-strain stiffness: full integration of the 2*mu*eps:eps part and
/// one-point integration of the mu * 2nu/(1-2nu) * (div u)^2 part.
/// Degrees of freedom are interleaved (2n, 2n+1) = (lateral, depth).
SparseMatrix assemble_stiffness(const Mesh& mesh, const ModulusField& mu, double nu);

/// Load vector of a unit lumen pressure: integral of N * n over Gamma_P with
/// n pointing from the lumen into the wall, 3-point Gauss per edge.
Eigen::VectorXd assemble_pressure_load(const Mesh& mesh);

/// Boundary mass matrix on Gamma_o (integral of N_a N_b per component), 3-point Gauss.
SparseMatrix assemble_outer_traction(const Mesh& mesh);

/// Domain mass matrix (integral of N_a N_b per component) under the full rule.
SparseMatrix assemble_mass(const Mesh& mesh);

struct ElasticSystem {
  SparseMatrix stiffness;
  Eigen::VectorXd pressure_load;
  SparseMatrix outer_traction;
};

ElasticSystem assemble(const Mesh& mesh, const ModulusField& mu, double nu);

enum class EdgeMode { fixed_lateral, traction_free };

struct BoundarySpec {
  EdgeMode top_mode = EdgeMode::fixed_lateral;
  EdgeMode bottom_mode = EdgeMode::traction_free;
  double lumen_pressure = 1000.0;  // Pa
};

struct Constraint {
  int dof = 0;
  double value = 0.0;
};

/// Top-center node fixed in both components, bottom-center node fixed
/// laterally, top/bottom edges fixed laterally when requested.
std::vector<Constraint> boundary_constraints(const Mesh& mesh, const BoundarySpec& bc);

struct ConstrainedSolution {
  Eigen::VectorXd u;
  /// K u - f; nonzero only at constrained dofs up to round-off.
  Eigen::VectorXd reactions;
  /// ||K u - f|| / ||f|| over the free dofs.
  double relative_residual = 0.0;
};

/// Solves K u = f with prescribed dofs eliminated, by sparse LDL^T.
/// Throws SingularSystemError when the reduced operator is singular.
ConstrainedSolution solve_constrained(const SparseMatrix& K, const Eigen::VectorXd& f,
                                      std::span<const Constraint> constraints);

/// Lumen-pressure forward problem; returns the displacement in meters.
NodalField solve_forward(const Mesh& mesh, const ModulusField& mu, const BoundarySpec& bc, double nu);

/// Infinitesimal strain of element e at its centroid, (exx, eyy, exy).
std::array<double, 3> element_strain(const Mesh& mesh, const NodalField& u, std::size_t e);

/// Larger eigenvalue of the 2x2 strain tensor.
double max_principal(const std::array<double, 3>& strain);

/// Per-element maximum principal strain.
std::vector<double> element_principal_strain(const Mesh& mesh, const NodalField& u);

/// Maximum principal strain averaged (area weighted) from elements to nodes.
NodalField principal_strain_field(const Mesh& mesh, const NodalField& u);

Eigen::VectorXd to_vector(const NodalField& f);
NodalField from_vector(const Eigen::VectorXd& v, int components = 2);

}  // namespace elasto
