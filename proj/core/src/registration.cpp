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

#include "elasto/registration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "elasto/error.hpp"
#include "elasto/fem.hpp"
#include "elasto/locate.hpp"

namespace elasto {
namespace {

struct IntegrationPoint {
  int row = 0;
  int col = 0;
  int element = 0;
  std::array<double, 4> shape{};
};

/// Catmull-Rom weights and derivatives for fractional offset t in [0, 1).
void cubic_weights(double t, double w[4], double dw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
  w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
  w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
  dw[0] = 0.5 * (-3.0 * t2 + 4.0 * t - 1.0);
  dw[1] = 0.5 * (9.0 * t2 - 10.0 * t);
  dw[2] = 0.5 * (-9.0 * t2 + 8.0 * t + 1.0);
  dw[3] = 0.5 * (3.0 * t2 - 2.0 * t);
}

/// Value and index-space gradient of `img` at fractional (row, col), edge-clamped.
double sample_cubic(const Image& img, double row, double col, double& d_row, double& d_col) {
  const double fr = std::floor(row), fc = std::floor(col);
  const int r = static_cast<int>(fr), c = static_cast<int>(fc);
  double wr[4], dwr[4], wc[4], dwc[4];
  cubic_weights(row - fr, wr, dwr);
  cubic_weights(col - fc, wc, dwc);
  double v = 0.0;
  d_row = 0.0;
  d_col = 0.0;
  for (int i = 0; i < 4; ++i) {
    const int rr = std::clamp(r - 1 + i, 0, img.rows - 1);
    double row_v = 0.0, row_dc = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double s = img(rr, std::clamp(c - 1 + j, 0, img.cols - 1));
      row_v += wc[j] * s;
      row_dc += dwc[j] * s;
    }
    v += wr[i] * row_v;
    d_row += dwr[i] * row_v;
    d_col += wr[i] * row_dc;
  }
  return v;
}

class Problem {
 public:
  Problem(const Mesh& mesh, const SparseMatrix& k1, const std::vector<char>& interior, const Image& fixed,
          const Image& moving, const RfGeometry& g, std::vector<IntegrationPoint> points, double alpha, double eps)
      : mesh_(mesh), k1_(k1), interior_(interior), fixed_(fixed), moving_(moving), g_(g),
        points_(std::move(points)), alpha_(alpha), eps_(eps) {
    double mean = 0.0;
    for (const auto& p : points_) mean += fixed_(p.row, p.col);
    mean /= static_cast<double>(points_.size());
    double var = 0.0;
    for (const auto& p : points_) var += (fixed_(p.row, p.col) - mean) * (fixed_(p.row, p.col) - mean);
    var /= static_cast<double>(points_.size());
    data_weight_ = var > 0.0 ? 1.0 / (static_cast<double>(points_.size()) * var) : 0.0;
    n_interior_ = static_cast<double>(std::count(interior_.begin(), interior_.end(), 1));
  }

  /// Functional value; fills `grad` (same size as u) and the two terms.
  /// `diag` receives the Gauss-Newton diagonal used as preconditioner.
  double evaluate(const Eigen::VectorXd& u, Eigen::VectorXd& grad, Eigen::VectorXd& diag, double& data,
                  double& penalty) const {
    grad.setZero(u.size());
    diag.setZero(u.size());
    data = 0.0;
    for (const auto& p : points_) {
      const auto el = mesh_.element(static_cast<std::size_t>(p.element));
      double ux = 0.0, uy = 0.0;
      for (std::size_t a = 0; a < el.size(); ++a) {
        ux += p.shape[a] * u[2 * el[a]];
        uy += p.shape[a] * u[2 * el[a] + 1];
      }
      const double row = p.row - uy / g_.axial_step;
      const double col = p.col + ux / g_.lateral_step;
      double dr, dc;
      const double res = sample_cubic(moving_, row, col, dr, dc) - fixed_(p.row, p.col);
      data += res * res;
      const double gx = res * dc / g_.lateral_step;
      const double gy = -res * dr / g_.axial_step;
      const double hx = dc * dc / (g_.lateral_step * g_.lateral_step);
      const double hy = dr * dr / (g_.axial_step * g_.axial_step);
      for (std::size_t a = 0; a < el.size(); ++a) {
        const double na = data_weight_ * p.shape[a];
        grad[2 * el[a]] += na * gx;
        grad[2 * el[a] + 1] += na * gy;
        diag[2 * el[a]] += na * p.shape[a] * hx;
        diag[2 * el[a] + 1] += na * p.shape[a] * hy;
      }
    }
    data *= 0.5 * data_weight_;
    penalty = 0.0;
    if (alpha_ > 0.0 && n_interior_ > 0.0) {
      const Eigen::VectorXd r = k1_ * u;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(u.size());
      const double scale = 1.0 / g_.axial_step;
      const double c = alpha_ / n_interior_;
      const double root_eps = std::sqrt(eps_);
      for (std::size_t n = 0; n < interior_.size(); ++n) {
        if (!interior_[n]) continue;
        const double tx = r[2 * n] * scale, ty = r[2 * n + 1] * scale;
        const double s = std::sqrt(tx * tx + ty * ty + eps_);
        penalty += c * (s - root_eps);
        w[2 * n] = c * tx / s * scale;
        w[2 * n + 1] = c * ty / s * scale;
      }
      grad += k1_ * w;  // k1 is symmetric
    }
    return data + penalty;
  }

  std::size_t point_count() const noexcept { return points_.size(); }

 private:
  const Mesh& mesh_;
  const SparseMatrix& k1_;
  const std::vector<char>& interior_;
  const Image& fixed_;
  const Image& moving_;
  RfGeometry g_;
  std::vector<IntegrationPoint> points_;
  double alpha_;
  double eps_;
  double data_weight_ = 0.0;
  double n_interior_ = 0.0;
};

Image level_image(const RFImage& rf, int factor) {
  if (factor == 1) return rf.samples;
  return gaussian_blur(envelope(rf), 2.0 * factor, 0.5 * factor);
}

}  // namespace

NodalField register_pair(const RFImage& fixed, const RFImage& moving, const Mesh& mesh, const RegistrationConfig& cfg,
                         RegistrationReport* report) {
  const RfGeometry& g = fixed.geometry;
  const RfGeometry& gm = moving.geometry;
  if (g.rows != gm.rows || g.cols != gm.cols || g.x0 != gm.x0 || g.y0 != gm.y0 || g.axial_step != gm.axial_step ||
      g.lateral_step != gm.lateral_step) {
    throw InvalidArgument("fixed and moving frames have different geometry");
  }
  if (!(cfg.alpha >= 0.0) || cfg.levels < 1 || cfg.max_iterations < 1 || cfg.memory < 1) {
    throw InvalidArgument("invalid registration configuration");
  }

  ModulusField unit;
  unit.nodal.assign(mesh.node_count(), 1.0);
  unit.background = 1.0;
  const SparseMatrix k1 = assemble_stiffness(mesh, unit, cfg.nu);
  std::vector<char> interior(mesh.node_count(), 1);
  for (const auto& e : mesh.lumen_edges) interior[e.a] = interior[e.b] = 0;
  for (const auto& e : mesh.outer_edges) interior[e.a] = interior[e.b] = 0;

  const Locator locator(mesh);
  const auto n = static_cast<Eigen::Index>(2 * mesh.node_count());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  RegistrationReport rep;

  for (int level = cfg.levels - 1; level >= 0; --level) {
    const int factor = 1 << level;
    std::vector<IntegrationPoint> points;
    for (int r = 0; r < g.rows; r += factor) {
      for (int c = 0; c < g.cols; ++c) {
        const Location loc = locator.locate(g.position(r, c));
        if (loc) points.push_back({r, c, loc.element, loc.shape});
      }
    }
    if (points.empty()) throw InvalidArgument("mesh does not cover any RF sample");
    const Image fi = level_image(fixed, factor);
    const Image mi = level_image(moving, factor);
    const Problem problem(mesh, k1, interior, fi, mi, g, std::move(points), cfg.alpha, cfg.epsilon);

    RegistrationLevel lv;
    lv.factor = factor;
    lv.points = problem.point_count();
    Eigen::VectorXd grad(n), grad_new(n), trial(n), diag(n), diag_new(n);
    double data = 0.0, penalty = 0.0;
    double f = problem.evaluate(u, grad, diag, data, penalty);
    lv.initial = f;

    // Jacobi preconditioner from the Gauss-Newton diagonal, floored so nodes
    // without image support stay well conditioned.
    auto precondition = [](const Eigen::VectorXd& d) {
      const double floor = std::max(1e-3 * d.maxCoeff(), std::numeric_limits<double>::min());
      return Eigen::VectorXd(d.cwiseMax(floor).cwiseInverse());
    };
    Eigen::VectorXd h0 = precondition(diag);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    int stalled = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      if (grad.squaredNorm() == 0.0) break;
      // Two-loop recursion for the L-BFGS direction.
      Eigen::VectorXd q = grad;
      std::vector<double> a(s_hist.size());
      for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
        a[k] = rho_hist[k] * s_hist[k].dot(q);
        q -= a[k] * y_hist[k];
      }
      q = q.cwiseProduct(h0);
      for (std::size_t k = 0; k < s_hist.size(); ++k) {
        const double b = rho_hist[k] * y_hist[k].dot(q);
        q += (a[k] - b) * s_hist[k];
      }
      Eigen::VectorXd dir = -q;
      double slope = grad.dot(dir);
      if (!(slope < 0.0)) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        dir = -grad.cwiseProduct(h0);
        slope = grad.dot(dir);
      }
      // Never move a node by more than one coarse sample in a single step.
      const double max_move = factor * g.axial_step;
      double step = std::min(1.0, max_move / dir.cwiseAbs().maxCoeff());

      bool accepted = false;
      double f_new = f, d_new = data, p_new = penalty;
      for (int trial_k = 0; trial_k < 30; ++trial_k) {
        trial = u + step * dir;
        f_new = problem.evaluate(trial, grad_new, diag_new, d_new, p_new);
        if (f_new <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        if (it == 0 && lv.iterations == 0) {
          throw ConvergenceError("registration made no progress at pyramid factor " + std::to_string(factor) +
                                 " (functional " + std::to_string(f) + ", gradient norm " +
                                 std::to_string(grad.norm()) + ")");
        }
        break;
      }
      const Eigen::VectorXd s = trial - u;
      const Eigen::VectorXd y = grad_new - grad;
      const double sy = s.dot(y);
      if (sy > 1e-300) {
        s_hist.push_back(s);
        y_hist.push_back(y);
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > cfg.memory) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      const double decrease = f - f_new;
      u = trial;
      grad = grad_new;
      h0 = precondition(diag_new);
      f = f_new;
      data = d_new;
      penalty = p_new;
      ++lv.iterations;
      stalled = decrease < cfg.tolerance * std::abs(f) ? stalled + 1 : 0;
      if (stalled >= 3 && lv.iterations >= 10) break;
    }
    lv.final_value = f;
    lv.data_term = data;
    lv.penalty_term = penalty;
    rep.levels.push_back(lv);
    rep.functional = f;
  }
  if (report) *report = rep;
  return from_vector(u, 2);
}

}  // namespace elasto
