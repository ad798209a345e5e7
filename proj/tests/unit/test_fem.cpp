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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "elasto/error.hpp"
#include "elasto/fem.hpp"
#include "elasto/vessel.hpp"

using namespace elasto;

namespace {

ModulusField uniform_modulus(const Mesh& m, double mu, double background) {
  return ModulusField{std::vector<double>(m.node_count(), mu), background};
}

// Inner-wall radial displacement of a wall (a < r < b, modulus mu) bonded to an
// unbounded medium (modulus mu_b) in plane strain under lumen pressure P.
// Wall: u = A r + B / r; medium: u = C / r.
double lame_inner_displacement(double a, double b, double mu, double mu_b, double nu, double P) {
  const double lam = 2.0 * nu / (1.0 - 2.0 * nu);
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  // sigma_rr(a) = 2 mu [(lam + 1) A - B / a^2] = -P
  M << 2 * mu * (lam + 1), -2 * mu / (a * a), 0,
      // u continuous at b
      b, 1 / b, -1 / b,
      // sigma_rr continuous at b
      2 * mu * (lam + 1), -2 * mu / (b * b), 2 * mu_b / (b * b);
  rhs << -P, 0, 0;
  const Eigen::Vector3d x = M.fullPivLu().solve(rhs);
  return x(0) * a + x(1) / a;
}

double mean_radial_lumen_displacement(const Mesh& m, const NodalField& u) {
  double s = 0.0;
  const auto lumen = m.lumen_nodes();
  for (int n : lumen) {
    const Vec2 d = m.nodes[n] - m.vessel_center;
    s += dot(u.vec(n), d) / norm(d);
  }
  return s / static_cast<double>(lumen.size());
}

NodalField affine_field(const Mesh& m, double exx, double eyy, double exy, double w) {
  NodalField u(2, m.node_count());
  for (std::size_t n = 0; n < m.node_count(); ++n) {
    const Vec2 p = m.nodes[n];
    u.at(n, 0) = exx * p.x + (exy - w) * p.y;
    u.at(n, 1) = (exy + w) * p.x + eyy * p.y;
  }
  return u;
}

}  // namespace

TEST_SUITE("fem") {
  TEST_CASE("stiffness is exactly symmetric with rigid-body null space") {
    for (ElementKind kind : {ElementKind::tri3, ElementKind::quad4}) {
      const Mesh m = build_mesh(sample_vessel_spec(4), 3e-3, kind);
      const ModulusField mu = vessel_modulus(m, modulus_profile(sample_vessel_spec(4)), 5.0);
      const SparseMatrix K = assemble_stiffness(m, mu, 0.45);
      const SparseMatrix Kt = K.transpose();
      CHECK((K - Kt).norm() == 0.0);
      const double kmax = Eigen::MatrixXd(K.toDense()).cwiseAbs().maxCoeff();
      const auto n = static_cast<Eigen::Index>(m.node_count());
      Eigen::VectorXd tx = Eigen::VectorXd::Zero(2 * n), rot = Eigen::VectorXd::Zero(2 * n);
      for (Eigen::Index i = 0; i < n; ++i) {
        tx(2 * i) = 1.0;
        rot(2 * i) = -m.nodes[i].y;
        rot(2 * i + 1) = m.nodes[i].x;
      }
      CHECK((K * tx).cwiseAbs().maxCoeff() <= 1e-9 * kmax);
      CHECK((K * rot).cwiseAbs().maxCoeff() <= 1e-9 * kmax);
    }
  }

  TEST_CASE("non-positive modulus is rejected") {
    const Mesh m = build_mesh(VesselSpec{}, 4e-3, ElementKind::tri3);
    ModulusField mu = uniform_modulus(m, 1000.0, 5.0);
    mu.nodal[m.lumen_nodes().front()] = 0.0;
    CHECK_THROWS_AS(assemble_stiffness(m, mu, 0.45), InvalidArgument);
    CHECK_THROWS_AS(assemble_stiffness(m, uniform_modulus(m, 1000.0, -1.0), 0.45), InvalidArgument);
    CHECK_THROWS_AS(assemble_stiffness(m, uniform_modulus(m, 1000.0, 5.0), 0.5), InvalidArgument);
  }

  TEST_CASE("pressure load of a closed lumen has zero resultant") {
    const Mesh m = build_mesh(VesselSpec{}, 1e-3, ElementKind::tri3);
    const Eigen::VectorXd f = assemble_pressure_load(m);
    double fx = 0.0, fy = 0.0, mag = 0.0;
    for (std::size_t n = 0; n < m.node_count(); ++n) {
      fx += f(2 * n);
      fy += f(2 * n + 1);
      mag += std::hypot(f(2 * n), f(2 * n + 1));
    }
    CHECK(std::abs(fx) < 1e-12);
    CHECK(std::abs(fy) < 1e-12);
    CHECK(mag == doctest::Approx(2 * std::numbers::pi * 0.02).epsilon(0.005));
    // The load pushes the wall outward.
    for (int n : m.lumen_nodes()) CHECK(dot(Vec2{f(2 * n), f(2 * n + 1)}, m.nodes[n] - m.vessel_center) > 0.0);
  }

  TEST_CASE("outer traction operator integrates the perimeter") {
    const Mesh m = build_mesh(VesselSpec{}, 4e-3, ElementKind::quad4);
    const SparseMatrix F = assemble_outer_traction(m);
    const auto n = static_cast<Eigen::Index>(m.node_count());
    Eigen::VectorXd ones_x = Eigen::VectorXd::Zero(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) ones_x(2 * i) = 1.0;
    const double perimeter = 2 * (kTissueDomain.width() + kTissueDomain.height());
    CHECK(ones_x.dot(F * ones_x) == doctest::Approx(perimeter).epsilon(1e-12));
  }

  TEST_CASE("mass matrix integrates the domain area") {
    const Mesh m = build_mesh(VesselSpec{}, 4e-3, ElementKind::tri3);
    const SparseMatrix D = assemble_mass(m);
    const auto n = static_cast<Eigen::Index>(m.node_count());
    Eigen::VectorXd ones_y = Eigen::VectorXd::Zero(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) ones_y(2 * i + 1) = 1.0;
    const double area = m.region_area(Region::vessel) + m.region_area(Region::background);
    CHECK(ones_y.dot(D * ones_y) == doctest::Approx(area).epsilon(1e-12));
  }

  TEST_CASE("forward solve is linear in pressure and inverse in modulus") {
    const VesselSpec spec = sample_vessel_spec(6);
    const Mesh m = build_mesh(spec, 3e-3, ElementKind::tri3);
    const ModulusField mu = vessel_modulus(m, modulus_profile(spec), 5.0);
    BoundarySpec bc;
    bc.lumen_pressure = 2000.0;
    const NodalField u1 = solve_forward(m, mu, bc, 0.45);
    bc.lumen_pressure = 4000.0;
    const NodalField u2 = solve_forward(m, mu, bc, 0.45);
    ModulusField mu2 = mu;
    for (double& v : mu2.nodal) v *= 2.0;
    mu2.background *= 2.0;
    const NodalField u3 = solve_forward(m, mu2, bc, 0.45);
    double scale = 0.0;
    for (double v : u2.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < u1.values.size(); ++i) {
      REQUIRE(std::abs(u2.values[i] - 2.0 * u1.values[i]) <= 1e-14 * scale);
      REQUIRE(std::abs(u3.values[i] - u1.values[i]) <= 1e-10 * scale);
    }
  }

  TEST_CASE("constrained solve meets the residual bound and balances reactions") {
    const VesselSpec spec = sample_vessel_spec(9);
    const Mesh m = build_mesh(spec, 3e-3, ElementKind::tri3);
    const ElasticSystem sys = assemble(m, vessel_modulus(m, modulus_profile(spec), 5.0), 0.45);
    BoundarySpec bc;
    bc.top_mode = EdgeMode::fixed_lateral;
    bc.bottom_mode = EdgeMode::fixed_lateral;
    const Eigen::VectorXd f = bc.lumen_pressure * sys.pressure_load;
    const ConstrainedSolution s = solve_constrained(sys.stiffness, f, boundary_constraints(m, bc));
    CHECK(s.relative_residual <= 1e-10);
    double rx = 0.0, ry = 0.0, fx = 0.0, fy = 0.0;
    for (Eigen::Index i = 0; i < f.size(); i += 2) {
      rx += s.reactions(i);
      ry += s.reactions(i + 1);
      fx += f(i);
      fy += f(i + 1);
    }
    // K u sums to zero per component, so the reactions cancel the applied load.
    const double scale = f.cwiseAbs().sum();
    CHECK(std::abs(rx + fx) <= 1e-8 * scale);
    CHECK(std::abs(ry + fy) <= 1e-8 * scale);
  }

  TEST_CASE("missing constraints are reported as a singular system") {
    const Mesh m = build_mesh(VesselSpec{}, 4e-3, ElementKind::tri3);
    const ElasticSystem sys = assemble(m, uniform_modulus(m, 1000.0, 5.0), 0.45);
    CHECK_THROWS_AS(solve_constrained(sys.stiffness, sys.pressure_load, {}), SingularSystemError);
  }

  TEST_CASE("patch test reproduces a constant strain") {
    for (ElementKind kind : {ElementKind::tri3, ElementKind::quad4}) {
      const Mesh m = build_mesh(sample_vessel_spec(1), 4e-3, kind);
      const SparseMatrix K = assemble_stiffness(m, uniform_modulus(m, 1000.0, 1000.0), 0.45);
      const NodalField exact = affine_field(m, 1e-3, -2e-3, 5e-4, 0.0);
      std::vector<Constraint> cons;
      for (const auto* loop : {&m.outer_edges, &m.lumen_edges}) {
        for (const auto& e : *loop) {
          cons.push_back({2 * e.a, exact.at(e.a, 0)});
          cons.push_back({2 * e.a + 1, exact.at(e.a, 1)});
        }
      }
      const auto s = solve_constrained(K, Eigen::VectorXd::Zero(2 * m.node_count()), cons);
      const NodalField u = from_vector(s.u);
      for (std::size_t e = 0; e < m.element_count(); ++e) {
        const auto eps = element_strain(m, u, e);
        REQUIRE(eps[0] == doctest::Approx(1e-3).epsilon(1e-8));
        REQUIRE(eps[1] == doctest::Approx(-2e-3).epsilon(1e-8));
        REQUIRE(eps[2] == doctest::Approx(5e-4).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("principal strain of analytic fields") {
    const Mesh m = build_mesh(VesselSpec{}, 4e-3, ElementKind::quad4);
    SUBCASE("uniform stretch") {
      const NodalField p = principal_strain_field(m, affine_field(m, 2e-3, 0.0, 0.0, 0.0));
      for (double v : p.values) REQUIRE(v == doctest::Approx(2e-3).epsilon(1e-10));
    }
    SUBCASE("pure shear u = (g y, 0)") {
      const double g = 4e-3;
      NodalField u(2, m.node_count());
      for (std::size_t n = 0; n < m.node_count(); ++n) u.at(n, 0) = g * m.nodes[n].y;
      for (double v : element_principal_strain(m, u)) REQUIRE(v == doctest::Approx(g / 2).epsilon(1e-10));
    }
    SUBCASE("small rigid rotation") {
      const double w = 1e-4;
      NodalField u(2, m.node_count());
      for (std::size_t n = 0; n < m.node_count(); ++n) {
        const Vec2 p = m.nodes[n];
        u.at(n, 0) = (std::cos(w) - 1) * p.x - std::sin(w) * p.y;
        u.at(n, 1) = std::sin(w) * p.x + (std::cos(w) - 1) * p.y;
      }
      for (double v : element_principal_strain(m, u)) REQUIRE(std::abs(v) <= w * w);
    }
  }

  TEST_CASE("annulus in soft tissue matches the Lame solution") {
    const Mesh m = build_mesh(VesselSpec{}, 2e-3, ElementKind::tri3);
    BoundarySpec bc;
    bc.lumen_pressure = 1000.0;
    const NodalField u = solve_forward(m, uniform_modulus(m, 1000.0, 5.0), bc, 0.45);
    const double exact = lame_inner_displacement(0.020, 0.025, 1000.0, 5.0, 0.45, 1000.0);
    CHECK(mean_radial_lumen_displacement(m, u) == doctest::Approx(exact).epsilon(0.03));
  }

  TEST_CASE("volumetric strain falls as the wall approaches incompressibility") {
    const Mesh m = build_mesh(VesselSpec{}, 2e-3, ElementKind::quad4);
    BoundarySpec bc;
    double prev_div = 1e30, first_norm = 0.0;
    for (double nu : {0.45, 0.49, 0.495}) {
      const NodalField u = solve_forward(m, uniform_modulus(m, 1000.0, 5.0), bc, nu);
      double div = 0.0;
      for (std::size_t e = 0; e < m.element_count(); ++e) {
        if (m.regions[e] != Region::vessel) continue;
        const auto eps = element_strain(m, u, e);
        div += std::abs(eps[0] + eps[1]) * m.element_area(e);
      }
      const double un = Eigen::Map<const Eigen::VectorXd>(u.values.data(), u.values.size()).norm();
      if (first_norm == 0.0) first_norm = un;
      CHECK(div < prev_div);
      CHECK(un < 2.0 * first_norm);
      CHECK(un > 0.5 * first_norm);
      prev_div = div;
    }
  }
}
