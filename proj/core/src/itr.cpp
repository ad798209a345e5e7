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

#include "elasto/itr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "elasto/datagen.hpp"
#include "elasto/error.hpp"

namespace elasto {

struct ItrSolver::Factor {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool analyzed = false;
  std::vector<double> G;  // modulus of the current factorization
};

ItrSolver::ItrSolver(const Mesh& mesh, const NodalField& u_m, const ItrConfig& cfg)
    : mesh_(mesh), cfg_(cfg), factor_(std::make_unique<Factor>()) {
  if (u_m.components != 2 || u_m.node_count() != mesh.node_count()) {
    throw InvalidArgument("measured displacement does not match the mesh");
  }
  if (!(cfg.k_s > 0.0)) throw InvalidArgument("k_s must be positive");
  if (!(cfg.alpha_mu >= 0.0)) throw InvalidArgument("alpha_mu must be non-negative");
  if (!(cfg.G0_vessel > 0.0 && cfg.G0_background > 0.0)) throw InvalidArgument("G0 must be positive");
  if (cfg.outer_iterations < 0 || cfg.bfgs_updates_per_step < 0) throw InvalidArgument("negative iteration count");
  if (!(cfg.nu > 0.0 && cfg.nu < 0.5)) throw InvalidArgument("Poisson ratio must lie in (0, 0.5)");
  if (mesh.outer_edges.empty()) throw InvalidArgument("mesh has no outer boundary");
  if (mesh.lumen_edges.empty()) throw InvalidArgument("mesh has no lumen boundary");

  u_m_ = to_vector(u_m);
  D_ = assemble_mass(mesh);
  F_o_ = assemble_outer_traction(mesh);
  f_P_ = assemble_pressure_load(mesh);
  outer_ = mesh.outer_nodes();

  const auto vessel = mesh.vessel_node_mask();
  g0_.assign(mesh.node_count(), cfg.G0_background);
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    if (vessel[n]) {
      free_.push_back(static_cast<int>(n));
      g0_[n] = cfg.G0_vessel;
    }
  }
  if (free_.empty()) throw InvalidArgument("mesh has no vessel nodes");

  const double data0 = 0.5 * u_m_.dot(D_ * u_m_);
  alpha_eff_ = cfg.alpha_mu * data0 / std::sqrt(mesh.region_area(Region::vessel));
}

ItrSolver::~ItrSolver() = default;

void ItrSolver::check_modulus(const std::vector<double>& G) const {
  if (G.size() != mesh_.node_count()) throw InvalidArgument("modulus size does not match the mesh");
  for (int n : free_) {
    if (!(G[n] > 0.0) || !std::isfinite(G[n])) throw InvalidArgument("modulus must be positive and finite");
  }
}

void ItrSolver::factorize(const std::vector<double>& G) {
  check_modulus(G);
  if (factor_->analyzed && factor_->G == G) return;
  const SparseMatrix K = assemble_stiffness(mesh_, ModulusField{G, cfg_.G0_background}, cfg_.nu);
  const SparseMatrix A = K + cfg_.k_s * F_o_;
  if (!factor_->analyzed) {
    factor_->ldlt.analyzePattern(A);
    factor_->analyzed = true;
  }
  factor_->ldlt.factorize(A);
  factor_->G.clear();
  if (factor_->ldlt.info() != Eigen::Success) throw SingularSystemError("ITR forward operator is singular");
  const auto& d = factor_->ldlt.vectorD();
  if (d.minCoeff() <= 1e-14 * d.maxCoeff()) throw SingularSystemError("ITR forward operator is singular");
  factor_->G = G;
}

Eigen::VectorXd ItrSolver::solve(const Eigen::VectorXd& rhs) const { return factor_->ldlt.solve(rhs); }

BoundaryParams ItrSolver::boundary_step(const std::vector<double>& G) {
  factorize(G);
  const auto no = static_cast<Eigen::Index>(outer_.size());
  const Eigen::Index m = 2 * no + 1;
  const Eigen::Index N = u_m_.size();

  // u_p = M p + c0 with p = (tau, P_it)
  Eigen::MatrixXd M(N, m);
  for (Eigen::Index j = 0; j < 2 * no; ++j) {
    const int dof = 2 * outer_[j / 2] + static_cast<int>(j % 2);
    M.col(j) = solve(Eigen::VectorXd(F_o_.col(dof)));
  }
  M.col(m - 1) = solve(f_P_);
  const Eigen::VectorXd c0 = solve(cfg_.k_s * (F_o_ * u_m_));

  const Eigen::MatrixXd DM = D_ * M;
  Eigen::MatrixXd normal = M.transpose() * DM;
  Eigen::VectorXd rhs = DM.transpose() * (u_m_ - c0);
  Eigen::VectorXd scale(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(normal(i, i) > 0.0)) throw SingularSystemError("boundary normal equations are rank deficient");
    scale(i) = 1.0 / std::sqrt(normal(i, i));
  }
  normal = scale.asDiagonal() * normal * scale.asDiagonal();
  rhs = scale.asDiagonal() * rhs;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-13 * d.maxCoeff()) {
    throw SingularSystemError("boundary normal equations are rank deficient");
  }
  Eigen::VectorXd p = scale.asDiagonal() * ldlt.solve(rhs);
  // Forming M^T D M squares the conditioning; one refinement step against the
  // true residual recovers the lost digits.
  const Eigen::VectorXd r = u_m_ - c0 - M * p;
  p += scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * (DM.transpose() * r));

  BoundaryParams b;
  b.outer_nodes = outer_;
  b.tau = p.head(2 * no);
  b.P_it = p(m - 1);
  return b;
}

NodalField ItrSolver::predict_displacement(const std::vector<double>& G, const BoundaryParams& b) {
  if (b.tau.size() != static_cast<Eigen::Index>(2 * b.outer_nodes.size())) {
    throw InvalidArgument("boundary traction size does not match its node list");
  }
  factorize(G);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(u_m_.size());
  for (std::size_t i = 0; i < b.outer_nodes.size(); ++i) {
    t(2 * b.outer_nodes[i]) = b.tau(2 * i);
    t(2 * b.outer_nodes[i] + 1) = b.tau(2 * i + 1);
  }
  const Eigen::VectorXd rhs = F_o_ * (t + cfg_.k_s * u_m_) + b.P_it * f_P_;
  return from_vector(solve(rhs));
}

double ItrSolver::data_term(const NodalField& u_p) const {
  const Eigen::VectorXd r = to_vector(u_p) - u_m_;
  return 0.5 * r.dot(D_ * r);
}

Eigen::VectorXd ItrSolver::regularization_gradient(const std::vector<double>& G, double& value) const {
  const std::size_t n = mesh_.node_count();
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = std::log(G[i] / g0_[i]);
  const double eps = cfg_.tvd_epsilon;
  const double root_eps = std::sqrt(eps);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));  // d/dc
  value = 0.0;
  const int npe = mesh_.nodes_per_element();
  for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
    const auto el = mesh_.element(e);
    for (const QuadPoint& q : element_quadrature(mesh_, e, Rule::full)) {
      Vec2 gc{0.0, 0.0};
      for (int a = 0; a < npe; ++a) gc = gc + c[el[a]] * q.grad[a];
      const double s = std::sqrt(dot(gc, gc) + eps);
      value += q.weight * (s - root_eps);
      for (int a = 0; a < npe; ++a) grad(el[a]) += q.weight * dot(gc, q.grad[a]) / s;
    }
  }
  value *= alpha_eff_;
  return alpha_eff_ * grad;
}

double ItrSolver::regularization(const std::vector<double>& G) const {
  check_modulus(G);
  double value = 0.0;
  regularization_gradient(G, value);
  return value;
}

ItrEvaluation ItrSolver::objective_and_gradient(const std::vector<double>& G, const BoundaryParams& b) {
  const NodalField up = predict_displacement(G, b);
  const Eigen::VectorXd u = to_vector(up);
  const Eigen::VectorXd r = u - u_m_;
  const Eigen::VectorXd Dr = D_ * r;
  ItrEvaluation ev;
  ev.data = 0.5 * r.dot(Dr);

  // A lambda = D r; dJ/dG_a = -lambda^T (dK/dG_a) u.
  const Eigen::VectorXd lambda = solve(Dr);
  Eigen::VectorXd dG = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_.node_count()));
  const double lam = lame_ratio(cfg_.nu);
  const int npe = mesh_.nodes_per_element();
  for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
    if (mesh_.regions[e] != Region::vessel) continue;
    const auto el = mesh_.element(e);
    auto strain = [&](const QuadPoint& q, const Eigen::VectorXd& v) {
      double xx = 0, yy = 0, xy = 0, yx = 0;
      for (int a = 0; a < npe; ++a) {
        const double vx = v(2 * el[a]), vy = v(2 * el[a] + 1);
        xx += q.grad[a].x * vx;
        yy += q.grad[a].y * vy;
        xy += q.grad[a].y * vx;
        yx += q.grad[a].x * vy;
      }
      return std::array<double, 3>{xx, yy, xy + yx};
    };
    for (const QuadPoint& q : element_quadrature(mesh_, e, Rule::full)) {
      const auto el_ = strain(q, lambda);
      const auto eu = strain(q, u);
      const double form = 2.0 * (el_[0] * eu[0] + el_[1] * eu[1]) + el_[2] * eu[2];
      for (int a = 0; a < npe; ++a) dG(el[a]) -= q.weight * q.shape[a] * form;
    }
    for (const QuadPoint& q : element_quadrature(mesh_, e, Rule::reduced)) {
      const auto el_ = strain(q, lambda);
      const auto eu = strain(q, u);
      const double form = lam * (el_[0] + el_[1]) * (eu[0] + eu[1]);
      for (int a = 0; a < npe; ++a) dG(el[a]) -= q.weight * q.shape[a] * form;
    }
  }

  const Eigen::VectorXd dc = regularization_gradient(G, ev.regularization);
  ev.objective = ev.data + ev.regularization;
  ev.gradient.resize(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t i = 0; i < free_.size(); ++i) {
    const int n = free_[i];
    ev.gradient(static_cast<Eigen::Index>(i)) = dG(n) + dc(n) / G[n];
  }
  return ev;
}

void ItrSolver::modulus_step(ItrState& state) {
  check_modulus(state.G);
  const auto nf = static_cast<Eigen::Index>(free_.size());
  std::vector<double> G = state.G;
  ItrEvaluation ev = objective_and_gradient(G, state.boundary);
  Eigen::VectorXd g = ev.gradient;
  for (Eigen::Index i = 0; i < nf; ++i) g(i) *= G[free_[i]];  // d/d ln G
  Eigen::MatrixXd& H = state.inverse_hessian;
  auto reset = [&] {
    const double gmax = g.cwiseAbs().maxCoeff();
    H = Eigen::MatrixXd::Identity(nf, nf) * (gmax > 0.0 ? cfg_.first_step / gmax : 1.0);
  };
  if (H.rows() != nf) reset();

  for (int k = 0; k < cfg_.bfgs_updates_per_step; ++k) {
    if (!(g.cwiseAbs().maxCoeff() > 0.0)) break;
    Eigen::VectorXd d = -(H * g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      reset();
      d = -(H * g);
      slope = g.dot(d);
    }
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial(G);
    ItrEvaluation tev;
    for (int ls = 0; ls < cfg_.max_backtracks; ++ls, t *= cfg_.backtrack_factor) {
      bool finite = true;
      for (Eigen::Index i = 0; i < nf; ++i) {
        const int n = free_[i];
        trial[n] = G[n] * std::exp(t * d(i));
        if (!(trial[n] > 0.0) || !std::isfinite(trial[n])) finite = false;
      }
      if (!finite) continue;
      try {
        tev = objective_and_gradient(trial, state.boundary);
      } catch (const SingularSystemError&) {
        continue;
      }
      if (std::isfinite(tev.objective) && tev.objective <= ev.objective + cfg_.armijo_c1 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ++state.line_search_failures;
      reset();
      break;
    }
    Eigen::VectorXd g_new = tev.gradient;
    for (Eigen::Index i = 0; i < nf; ++i) g_new(i) *= trial[free_[i]];
    const Eigen::VectorXd s = t * d;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 0.0) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      const double yHy = y.dot(Hy);
      H -= rho * (Hy * s.transpose() + s * Hy.transpose());
      H += (rho * rho * yHy + rho) * (s * s.transpose());
    }
    G = trial;
    ev = tev;
    g = g_new;
  }
  state.G = G;
}

ItrResult reconstruct(const Mesh& mesh, const NodalField& u_m, double pulse_pressure, const ItrConfig& cfg,
                      const GridSpec* grid) {
  if (!(pulse_pressure > 0.0)) throw InvalidArgument("pulse pressure must be positive");
  const auto start = std::chrono::steady_clock::now();
  ItrSolver solver(mesh, u_m, cfg);
  ItrResult res;
  ItrState& st = res.state;
  st.G = solver.prior();
  auto record = [&] {
    st.boundary = solver.boundary_step(st.G);
    const NodalField up = solver.predict_displacement(st.G, st.boundary);
    st.history.push_back(solver.data_term(up) + solver.regularization(st.G));
    st.p_it_history.push_back(st.boundary.P_it);
  };
  for (int it = 0; it < cfg.outer_iterations; ++it) {
    record();
    solver.modulus_step(st);
  }
  record();
  const double p_it = st.boundary.P_it;
  if (!(p_it > 0.0)) throw ConvergenceError("predicted lumen pressure is not positive");

  const double scale = pulse_pressure / p_it;
  res.modulus.resize(st.G.size());
  for (std::size_t n = 0; n < st.G.size(); ++n) res.modulus[n] = scale * st.G[n];
  res.grid = grid ? *grid : GridSpec::centered_on(mesh.vessel_center);
  const GridSampler sampler(mesh, res.grid);
  res.mask = sampler.mask();
  res.mu = sampler.sample(ModulusField{res.modulus, scale * cfg.G0_background});
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::string itr_report_json(const ItrResult& result, const ItrConfig& cfg) {
  nlohmann::json j;
  j["config"] = {{"nu", cfg.nu},
                 {"k_s", cfg.k_s},
                 {"alpha_mu", cfg.alpha_mu},
                 {"outer_iterations", cfg.outer_iterations},
                 {"bfgs_updates_per_step", cfg.bfgs_updates_per_step},
                 {"G0_vessel", cfg.G0_vessel},
                 {"G0_background", cfg.G0_background},
                 {"tvd_epsilon", cfg.tvd_epsilon}};
  j["objective"] = result.state.history;
  j["P_it"] = result.state.p_it_history;
  j["line_search_failures"] = result.state.line_search_failures;
  j["seconds"] = result.seconds;
  return j.dump(2);
}

}  // namespace elasto
