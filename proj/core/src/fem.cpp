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

#include "elasto/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "elasto/error.hpp"

namespace elasto {
namespace {

constexpr double kGauss3Points[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGauss3Weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

QuadPoint quad_point(const Mesh& mesh, std::span<const int> el, double xi, double eta, double w) {
  static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  QuadPoint q;
  double dxi[4], deta[4];
  for (int a = 0; a < 4; ++a) {
    q.shape[a] = 0.25 * (1.0 + sx[a] * xi) * (1.0 + sy[a] * eta);
    dxi[a] = 0.25 * sx[a] * (1.0 + sy[a] * eta);
    deta[a] = 0.25 * sy[a] * (1.0 + sx[a] * xi);
  }
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;  // d(x,y)/d(xi,eta)
  for (int a = 0; a < 4; ++a) {
    const Vec2 p = mesh.nodes[el[a]];
    j11 += dxi[a] * p.x;
    j12 += deta[a] * p.x;
    j21 += dxi[a] * p.y;
    j22 += deta[a] * p.y;
  }
  const double det = j11 * j22 - j12 * j21;
  for (int a = 0; a < 4; ++a) {
    q.grad[a] = {(j22 * dxi[a] - j21 * deta[a]) / det, (-j12 * dxi[a] + j11 * deta[a]) / det};
  }
  q.weight = w * det;
  return q;
}

QuadPoint tri_point(const Mesh& mesh, std::span<const int> el, double l1, double l2, double w) {
  const Vec2 p0 = mesh.nodes[el[0]], p1 = mesh.nodes[el[1]], p2 = mesh.nodes[el[2]];
  const double det = cross(p1 - p0, p2 - p0);  // 2 * area
  QuadPoint q;
  q.shape = {1.0 - l1 - l2, l1, l2, 0.0};
  q.grad[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
  q.grad[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
  q.grad[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
  q.weight = w * 0.5 * det;
  return q;
}

void add_mirrored(std::vector<Eigen::Triplet<double>>& trips, const std::vector<int>& dofs,
                  const std::vector<double>& upper, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = i <= j ? upper[i * n + j] : upper[j * n + i];
      if (v != 0.0) trips.emplace_back(dofs[i], dofs[j], v);
    }
  }
}

}  // namespace

std::vector<QuadPoint> element_quadrature(const Mesh& mesh, std::size_t e, Rule rule) {
  const auto el = mesh.element(e);
  std::vector<QuadPoint> pts;
  if (mesh.kind == ElementKind::quad4) {
    if (rule == Rule::reduced) {
      pts.push_back(quad_point(mesh, el, 0.0, 0.0, 4.0));
    } else {
      pts.reserve(9);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          pts.push_back(quad_point(mesh, el, kGauss3Points[i], kGauss3Points[j],
                                   kGauss3Weights[i] * kGauss3Weights[j]));
        }
      }
    }
  } else {
    if (rule == Rule::reduced) {
      pts.push_back(tri_point(mesh, el, 1.0 / 3.0, 1.0 / 3.0, 1.0));
    } else {
      pts.push_back(tri_point(mesh, el, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0));
      pts.push_back(tri_point(mesh, el, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0));
      pts.push_back(tri_point(mesh, el, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0));
    }
  }
  return pts;
}

double modulus_at(const Mesh& mesh, const ModulusField& mu, std::size_t e, const std::array<double, 4>& shape) {
  if (mesh.regions[e] != Region::vessel) return mu.background;
  const auto el = mesh.element(e);
  double v = 0.0;
  for (std::size_t a = 0; a < el.size(); ++a) v += shape[a] * mu.nodal[el[a]];
  return v;
}

ModulusField vessel_modulus(const Mesh& mesh, const ModulusProfile& profile, double background) {
  ModulusField mu;
  mu.background = background;
  mu.nodal.assign(mesh.node_count(), background);
  const auto vessel = mesh.vessel_node_mask();
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    if (!vessel[n]) continue;
    const Vec2 d = mesh.nodes[n] - mesh.vessel_center;
    mu.nodal[n] = profile.at(std::atan2(d.y, d.x));
  }
  return mu;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const ModulusField& mu, double nu) {
  if (!(nu > 0.0 && nu < 0.5)) throw InvalidArgument("Poisson ratio must lie in (0, 0.5)");
  if (!(mu.background > 0.0)) throw InvalidArgument("background modulus must be positive");
  if (mu.nodal.size() != mesh.node_count()) throw InvalidArgument("modulus field size does not match the mesh");
  const auto vessel = mesh.vessel_node_mask();
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    if (vessel[n] && !(mu.nodal[n] > 0.0)) throw InvalidArgument("modulus must be positive at every vessel node");
  }
  const double lam = lame_ratio(nu);
  const int npe = mesh.nodes_per_element();
  const int nd = 2 * npe;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.element_count() * nd * nd);
  std::vector<double> ke(nd * nd);
  std::vector<int> dofs(nd);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    std::fill(ke.begin(), ke.end(), 0.0);
    const auto el = mesh.element(e);
    for (int a = 0; a < npe; ++a) {
      dofs[2 * a] = 2 * el[a];
      dofs[2 * a + 1] = 2 * el[a] + 1;
    }
    for (const QuadPoint& q : element_quadrature(mesh, e, Rule::full)) {
      const double c = q.weight * modulus_at(mesh, mu, e, q.shape);
      for (int a = 0; a < npe; ++a) {
        const Vec2 ga = q.grad[a];
        for (int b = a; b < npe; ++b) {
          const Vec2 gb = q.grad[b];
          ke[(2 * a) * nd + 2 * b] += c * (2.0 * ga.x * gb.x + ga.y * gb.y);
          ke[(2 * a) * nd + 2 * b + 1] += c * (ga.y * gb.x);
          ke[(2 * a + 1) * nd + 2 * b + 1] += c * (2.0 * ga.y * gb.y + ga.x * gb.x);
          if (b != a) ke[(2 * a + 1) * nd + 2 * b] += c * (ga.x * gb.y);
        }
      }
    }
    for (const QuadPoint& q : element_quadrature(mesh, e, Rule::reduced)) {
      const double c = q.weight * modulus_at(mesh, mu, e, q.shape) * lam;
      for (int i = 0; i < nd; ++i) {
        const double gi = i % 2 == 0 ? q.grad[i / 2].x : q.grad[i / 2].y;
        for (int j = i; j < nd; ++j) {
          const double gj = j % 2 == 0 ? q.grad[j / 2].x : q.grad[j / 2].y;
          ke[i * nd + j] += c * gi * gj;
        }
      }
    }
    add_mirrored(trips, dofs, ke, nd);
  }
  const auto n = static_cast<Eigen::Index>(2 * mesh.node_count());
  SparseMatrix K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::VectorXd assemble_pressure_load(const Mesh& mesh) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * mesh.node_count()));
  for (const BoundaryEdge& ed : mesh.lumen_edges) {
    const Vec2 pa = mesh.nodes[ed.a], pb = mesh.nodes[ed.b];
    const Vec2 t = pb - pa;
    const double len = norm(t);
    const Vec2 n{-t.y / len, t.x / len};  // left normal: into the solid
    for (int g = 0; g < 3; ++g) {
      const double s = 0.5 * (1.0 + kGauss3Points[g]);
      const double w = 0.5 * len * kGauss3Weights[g];
      f[2 * ed.a] += w * (1.0 - s) * n.x;
      f[2 * ed.a + 1] += w * (1.0 - s) * n.y;
      f[2 * ed.b] += w * s * n.x;
      f[2 * ed.b + 1] += w * s * n.y;
    }
  }
  return f;
}

SparseMatrix assemble_outer_traction(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  for (const BoundaryEdge& ed : mesh.outer_edges) {
    const double len = norm(mesh.nodes[ed.b] - mesh.nodes[ed.a]);
    double m[2][2] = {{0, 0}, {0, 0}};
    for (int g = 0; g < 3; ++g) {
      const double s = 0.5 * (1.0 + kGauss3Points[g]);
      const double w = 0.5 * len * kGauss3Weights[g];
      const double N[2] = {1.0 - s, s};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m[i][j] += w * N[i] * N[j];
    }
    const int nodes[2] = {ed.a, ed.b};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double v = i <= j ? m[i][j] : m[j][i];
        for (int c = 0; c < 2; ++c) trips.emplace_back(2 * nodes[i] + c, 2 * nodes[j] + c, v);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(2 * mesh.node_count());
  SparseMatrix F(n, n);
  F.setFromTriplets(trips.begin(), trips.end());
  return F;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  const int npe = mesh.nodes_per_element();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.element_count() * npe * npe * 2);
  std::vector<double> me(npe * npe);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    std::fill(me.begin(), me.end(), 0.0);
    for (const QuadPoint& q : element_quadrature(mesh, e, Rule::full)) {
      for (int a = 0; a < npe; ++a)
        for (int b = a; b < npe; ++b) me[a * npe + b] += q.weight * q.shape[a] * q.shape[b];
    }
    const auto el = mesh.element(e);
    for (int a = 0; a < npe; ++a) {
      for (int b = 0; b < npe; ++b) {
        const double v = a <= b ? me[a * npe + b] : me[b * npe + a];
        for (int c = 0; c < 2; ++c) trips.emplace_back(2 * el[a] + c, 2 * el[b] + c, v);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(2 * mesh.node_count());
  SparseMatrix D(n, n);
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

ElasticSystem assemble(const Mesh& mesh, const ModulusField& mu, double nu) {
  return {assemble_stiffness(mesh, mu, nu), assemble_pressure_load(mesh), assemble_outer_traction(mesh)};
}

std::vector<Constraint> boundary_constraints(const Mesh& mesh, const BoundarySpec& bc) {
  const auto& ns = mesh.node_sets;
  if (ns.top_center < 0 || ns.bottom_center < 0) {
    throw InvalidArgument("mesh lacks top/bottom center node sets");
  }
  std::vector<Constraint> cons;
  std::vector<char> seen(2 * mesh.node_count(), 0);
  auto fix = [&](int dof) {
    if (!seen[dof]) {
      seen[dof] = 1;
      cons.push_back({dof, 0.0});
    }
  };
  fix(2 * ns.top_center);
  fix(2 * ns.top_center + 1);
  fix(2 * ns.bottom_center);
  if (bc.top_mode == EdgeMode::fixed_lateral) {
    for (int n : ns.top_edge) fix(2 * n);
  }
  if (bc.bottom_mode == EdgeMode::fixed_lateral) {
    for (int n : ns.bottom_edge) fix(2 * n);
  }
  return cons;
}

ConstrainedSolution solve_constrained(const SparseMatrix& K, const Eigen::VectorXd& f,
                                      std::span<const Constraint> constraints) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || f.size() != n) throw InvalidArgument("system dimensions do not match");
  std::vector<Eigen::Index> reduced(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd u_full = Eigen::VectorXd::Zero(n);
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (const Constraint& c : constraints) {
    if (c.dof < 0 || c.dof >= n) throw InvalidArgument("constraint dof out of range");
    fixed[c.dof] = 1;
    u_full[c.dof] = c.value;
  }
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < n; ++i) reduced[i] = fixed[i] ? -1 : m++;
  if (m == 0) throw InvalidArgument("every dof is constrained");

  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (reduced[i] >= 0) rhs[reduced[i]] = f[i];
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(K.nonZeros()));
  for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const Eigen::Index r = reduced[it.row()], c = reduced[it.col()];
      if (r >= 0 && c >= 0) {
        trips.emplace_back(r, c, it.value());
      } else if (r >= 0 && c < 0) {
        rhs[r] -= it.value() * u_full[it.col()];
      }
    }
  }
  SparseMatrix Kff(m, m);
  Kff.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(Kff);
  if (ldlt.info() != Eigen::Success) throw SingularSystemError("stiffness factorization failed");
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.cwiseAbs().minCoeff();
  if (!(dmin > 1e-12 * dmax) || (d.array() <= 0.0).any()) {
    throw SingularSystemError("constrained stiffness is singular; the constraints leave a rigid-body mode");
  }
  Eigen::VectorXd uf = ldlt.solve(rhs);
  const Eigen::VectorXd r0 = rhs - Kff * uf;
  uf += ldlt.solve(r0);  // one step of iterative refinement
  const Eigen::VectorXd res = rhs - Kff * uf;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (reduced[i] >= 0) u_full[i] = uf[reduced[i]];
  }
  ConstrainedSolution sol;
  sol.u = std::move(u_full);
  sol.reactions = K * sol.u - f;
  const double denom = rhs.norm();
  sol.relative_residual = denom > 0.0 ? res.norm() / denom : res.norm();
  return sol;
}

NodalField solve_forward(const Mesh& mesh, const ModulusField& mu, const BoundarySpec& bc, double nu) {
  const SparseMatrix K = assemble_stiffness(mesh, mu, nu);
  const Eigen::VectorXd f = bc.lumen_pressure * assemble_pressure_load(mesh);
  const auto cons = boundary_constraints(mesh, bc);
  const ConstrainedSolution sol = solve_constrained(K, f, cons);
  return from_vector(sol.u, 2);
}

std::array<double, 3> element_strain(const Mesh& mesh, const NodalField& u, std::size_t e) {
  const QuadPoint q = element_quadrature(mesh, e, Rule::reduced).front();
  const auto el = mesh.element(e);
  double exx = 0, eyy = 0, uxy = 0, uyx = 0;
  for (std::size_t a = 0; a < el.size(); ++a) {
    const Vec2 ua = u.vec(el[a]);
    exx += q.grad[a].x * ua.x;
    eyy += q.grad[a].y * ua.y;
    uxy += q.grad[a].y * ua.x;
    uyx += q.grad[a].x * ua.y;
  }
  return {exx, eyy, 0.5 * (uxy + uyx)};
}

double max_principal(const std::array<double, 3>& s) {
  const double m = 0.5 * (s[0] + s[1]);
  const double r = std::hypot(0.5 * (s[0] - s[1]), s[2]);
  return m + r;
}

std::vector<double> element_principal_strain(const Mesh& mesh, const NodalField& u) {
  if (u.components != 2 || u.node_count() != mesh.node_count()) {
    throw InvalidArgument("displacement must be a 2-vector field on the mesh");
  }
  std::vector<double> out(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) out[e] = max_principal(element_strain(mesh, u, e));
  return out;
}

NodalField principal_strain_field(const Mesh& mesh, const NodalField& u) {
  const auto per_element = element_principal_strain(mesh, u);
  NodalField out(1, mesh.node_count(), 0.0);
  std::vector<double> weight(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double a = mesh.element_area(e);
    for (int n : mesh.element(e)) {
      out.at(n) += a * per_element[e];
      weight[n] += a;
    }
  }
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    if (weight[n] > 0.0) out.at(n) /= weight[n];
  }
  return out;
}

Eigen::VectorXd to_vector(const NodalField& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
}

NodalField from_vector(const Eigen::VectorXd& v, int components) {
  NodalField f;
  f.components = components;
  f.values.assign(v.data(), v.data() + v.size());
  return f;
}

}  // namespace elasto
