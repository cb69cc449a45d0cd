// Copyright 2026 The HetNet-AF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hetnet/convex.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "hetnet/error.h"

namespace hetnet::convex {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> SortedUnique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

int PositionOf(const std::vector<int>& sorted, int index) {
  return static_cast<int>(
      std::lower_bound(sorted.begin(), sorted.end(), index) - sorted.begin());
}

// f(x) - x_s, used by phase I.
class ShiftedFunction : public ConvexFunction {
 public:
  ShiftedFunction(FunctionPtr f, int s) : f_(std::move(f)), s_(s) {
    support_ = f_->Support();
    support_.push_back(s);
  }
  const std::vector<int>& Support() const override { return support_; }
  double Value(const Vector& x) const override { return f_->Value(x) - x[s_]; }
  void Gradient(const Vector& x, std::span<double> grad) const override {
    f_->Gradient(x, grad.first(grad.size() - 1));
    grad.back() = -1.0;
  }
  void AddHessian(const Vector& x, double scale,
                  HessianBuilder& h) const override {
    f_->AddHessian(x, scale, h);
  }

 private:
  FunctionPtr f_;
  int s_;
  std::vector<int> support_;
};

// Newton solve for the barrier problem, one instance per (phase, problem).
class BarrierSolver {
 public:
  BarrierSolver(const ConvexProblem& p, const Tolerances& tol)
      : p_(p), tol_(tol), n_(p.num_vars) {
    has_lower_ = p.lower.size() == n_;
    has_upper_ = p.upper.size() == n_;
    num_box_ = 0;
    for (int i = 0; i < n_; ++i) {
      if (has_lower_ && std::isfinite(p.lower[i])) ++num_box_;
      if (has_upper_ && std::isfinite(p.upper[i])) ++num_box_;
    }
    m_ = static_cast<int>(p.inequalities.size()) + num_box_;
    dense_ = n_ <= tol.dense_limit;
    has_eq_ = p.equality_matrix.rows() > 0;
    if (has_eq_) {
      a_dense_ = Eigen::MatrixXd(p.equality_matrix);
      aat_ldlt_.compute(a_dense_ * a_dense_.transpose());
    }
  }

  int m() const { return m_; }

  double Lower(int i) const { return has_lower_ ? p_.lower[i] : -kInf; }
  double Upper(int i) const { return has_upper_ ? p_.upper[i] : kInf; }

  bool InBox(const Vector& x) const {
    for (int i = 0; i < n_; ++i) {
      if (!(x[i] > Lower(i) && x[i] < Upper(i))) return false;
    }
    return true;
  }

  // t f0 + barrier; +inf when not strictly feasible.
  double Phi(const Vector& x, double t) const {
    if (!InBox(x)) return kInf;
    double v = t * p_.objective->Value(x);
    if (!std::isfinite(v)) return kInf;
    for (const auto& f : p_.inequalities) {
      const double fi = f->Value(x);
      if (!(fi < 0.0)) return kInf;
      v -= std::log(-fi);
    }
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(Lower(i))) v -= std::log(x[i] - Lower(i));
      if (std::isfinite(Upper(i))) v -= std::log(Upper(i) - x[i]);
    }
    return v;
  }

  void AddGradient(const ConvexFunction& f, const Vector& x, double scale,
                   Vector& g) const {
    const auto& sup = f.Support();
    scratch_.assign(sup.size(), 0.0);
    f.Gradient(x, scratch_);
    for (size_t j = 0; j < sup.size(); ++j) g[sup[j]] += scale * scratch_[j];
  }

  void GradHess(const Vector& x, double t, Vector& g,
                HessianBuilder& h) const {
    g.setZero(n_);
    h.Clear();
    AddGradient(*p_.objective, x, t, g);
    p_.objective->AddHessian(x, t, h);
    for (const auto& f : p_.inequalities) {
      const double fi = f->Value(x);
      const double inv = -1.0 / fi;
      const auto& sup = f->Support();
      scratch_.assign(sup.size(), 0.0);
      f->Gradient(x, scratch_);
      for (size_t j = 0; j < sup.size(); ++j) g[sup[j]] += inv * scratch_[j];
      h.AddOuter(sup, scratch_, inv * inv);
      f->AddHessian(x, inv, h);
    }
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(Lower(i))) {
        const double d = x[i] - Lower(i);
        g[i] -= 1.0 / d;
        h.AddDiagonal(i, 1.0 / (d * d));
      }
      if (std::isfinite(Upper(i))) {
        const double d = Upper(i) - x[i];
        g[i] += 1.0 / d;
        h.AddDiagonal(i, 1.0 / (d * d));
      }
    }
  }

  // Diagonal shift for the Newton solve: relative per entry, with a floor
  // tied to the largest entry. A single global shift would swamp the small
  // entries when a constraint is nearly active.
  static Vector Shift(const Vector& diag) {
    const double top = diag.cwiseAbs().maxCoeff();
    const double floor = std::max(1e-20 * top, 1e-300);
    return (1e-14 * diag.cwiseAbs()).cwiseMax(floor);
  }

  // Solves [H A^T; A 0][dx; w] = [-g; b - A x]. The second block is only
  // rounding drift once x is feasible.
  bool NewtonStep(const HessianBuilder& h, const Vector& g, const Vector& x,
                  Vector& dx, Vector& w) const {
    std::function<Vector(const Vector&)> solve;
    Eigen::LDLT<Eigen::MatrixXd> dense_ldlt;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> sparse_ldlt;
    Vector diag_inv;
    if (dense_) {
      Eigen::MatrixXd hm = h.dense_matrix();
      hm.diagonal() += Shift(hm.diagonal());
      dense_ldlt.compute(hm);
      if (dense_ldlt.info() != Eigen::Success) return false;
      solve = [&](const Vector& r) -> Vector { return dense_ldlt.solve(r); };
    } else if (h.IsDiagonal()) {
      diag_inv = h.Diagonal();
      diag_inv = (diag_inv + Shift(diag_inv)).cwiseInverse();
      solve = [&](const Vector& r) -> Vector {
        return r.cwiseProduct(diag_inv);
      };
    } else {
      Eigen::SparseMatrix<double> hm = h.SparseMatrix();
      const Vector shift = Shift(h.Diagonal());
      Eigen::SparseMatrix<double> reg(n_, n_);
      for (int i = 0; i < n_; ++i) reg.insert(i, i) = shift[i];
      hm += reg;
      sparse_ldlt.compute(hm);
      if (sparse_ldlt.info() != Eigen::Success) return false;
      solve = [&](const Vector& r) -> Vector { return sparse_ldlt.solve(r); };
    }
    const Vector hg = solve(g);
    if (!hg.allFinite()) return false;
    if (!has_eq_) {
      dx = -hg;
      w.resize(0);
      return true;
    }
    const int rows = static_cast<int>(a_dense_.rows());
    Eigen::MatrixXd y(n_, rows);
    for (int r = 0; r < rows; ++r) y.col(r) = solve(a_dense_.row(r).transpose());
    Eigen::MatrixXd s = a_dense_ * y;
    // Relative: S scales like 1 / t and gets tiny late in the solve.
    s.diagonal().array() += 1e-14 * s.diagonal().cwiseAbs().maxCoeff();
    Eigen::LDLT<Eigen::MatrixXd> s_ldlt(s);
    if (s_ldlt.info() != Eigen::Success) return false;
    const Vector drift = p_.equality_rhs - a_dense_ * x;
    w = -s_ldlt.solve(drift + a_dense_ * hg);
    dx = -(hg + y * w);
    // H may be badly conditioned near active constraints; put the step
    // back on the affine set with the well-conditioned A A^T.
    const Vector miss = drift - a_dense_ * dx;
    dx += a_dense_.transpose() * aat_ldlt_.solve(miss);
    return dx.allFinite() && w.allFinite();
  }

  double Curvature(const HessianBuilder& h, const Vector& dx) const {
    if (dense_) return dx.dot(h.dense_matrix() * dx);
    if (h.IsDiagonal()) return dx.dot(h.Diagonal().cwiseProduct(dx));
    return dx.dot(h.SparseMatrix() * dx);
  }

  // Largest step in (0, 1] keeping x + s dx strictly inside the box.
  double BoxStep(const Vector& x, const Vector& dx) const {
    double s = 1.0;
    for (int i = 0; i < n_; ++i) {
      if (dx[i] < 0.0 && std::isfinite(Lower(i))) {
        s = std::min(s, 0.99 * (x[i] - Lower(i)) / -dx[i]);
      } else if (dx[i] > 0.0 && std::isfinite(Upper(i))) {
        s = std::min(s, 0.99 * (Upper(i) - x[i]) / dx[i]);
      }
    }
    return s;
  }

  // Multipliers and stationarity residual at x for barrier weight t. The
  // multipliers include the first-order correction from the Newton step dx
  // (and w) taken at x, which removes the barrier curvature from the
  // residual near active constraints.
  void Certify(const Vector& x, double t, const Vector& dx, SolveReport& r) const {
    Vector g = Vector::Zero(n_);
    AddGradient(*p_.objective, x, 1.0, g);
    const double g0_norm = g.cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, g0_norm);
    // Every constraint as (gradient on support, multiplier). Inequalities
    // first, then box sides.
    struct Column {
      std::vector<int> support;
      std::vector<double> grad;
      double lambda;
    };
    std::vector<Column> cols;
    const int num_ineq = static_cast<int>(p_.inequalities.size());
    for (int i = 0; i < num_ineq; ++i) {
      const auto& f = *p_.inequalities[i];
      const double slack = -f.Value(x);
      Column c{f.Support(), std::vector<double>(f.Support().size()), 0.0};
      f.Gradient(x, c.grad);
      double dir = 0.0;
      for (size_t j = 0; j < c.support.size(); ++j) dir += c.grad[j] * dx[c.support[j]];
      c.lambda = (1.0 + dir / slack) / (t * slack);
      cols.push_back(std::move(c));
      r.max_violation = std::max(r.max_violation, -slack);
    }
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(Lower(i))) {
        const double d = x[i] - Lower(i);
        cols.push_back({{i}, {-1.0}, (1.0 - dx[i] / d) / (t * d)});
      }
      if (std::isfinite(Upper(i))) {
        const double d = Upper(i) - x[i];
        cols.push_back({{i}, {1.0}, (1.0 + dx[i] / d) / (t * d)});
      }
      r.max_violation = std::max(
          {r.max_violation, Lower(i) - x[i], x[i] - Upper(i)});
    }
    for (const Column& c : cols) {
      for (size_t j = 0; j < c.support.size(); ++j) g[c.support[j]] += c.lambda * c.grad[j];
    }
    Vector nu;
    if (has_eq_) {
      nu = aat_ldlt_.solve(-(a_dense_ * g));
      g += a_dense_.transpose() * nu;
      const Vector res = a_dense_ * x - p_.equality_rhs;
      r.max_violation = std::max(r.max_violation, res.cwiseAbs().maxCoeff());
    }
    // The barrier estimates are limited by how finely x can sit near an
    // active constraint. Polish the multipliers of the clearly active
    // constraints (and nu) by least squares when that is cheap.
    if (dense_) {
      std::vector<int> active;
      for (size_t c = 0; c < cols.size(); ++c) {
        double gn = 0.0;
        for (double v : cols[c].grad) gn = std::max(gn, std::abs(v));
        if (cols[c].lambda * gn >= 1e-6 * scale) active.push_back(static_cast<int>(c));
      }
      const int p = has_eq_ ? static_cast<int>(a_dense_.rows()) : 0;
      const int na = static_cast<int>(active.size());
      if (na + p > 0 && na + p <= n_) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, na + p);
        for (int a = 0; a < na; ++a) {
          const Column& c = cols[active[a]];
          for (size_t j = 0; j < c.support.size(); ++j) m(c.support[j], a) = c.grad[j];
        }
        if (p > 0) m.rightCols(p) = a_dense_.transpose();
        const Vector delta = m.colPivHouseholderQr().solve(-g);
        const Vector g_new = g + m * delta;
        bool ok = delta.allFinite() &&
                  g_new.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff();
        for (int a = 0; ok && a < na; ++a) ok = cols[active[a]].lambda + delta[a] >= 0.0;
        if (ok) {
          for (int a = 0; a < na; ++a) cols[active[a]].lambda += delta[a];
          if (p > 0) nu += delta.tail(p);
          g = g_new;
        }
      }
    }
    r.inequality_multipliers.resize(num_ineq);
    for (int i = 0; i < num_ineq; ++i) r.inequality_multipliers[i] = cols[i].lambda;
    r.equality_multipliers = nu;
    const double stationarity = g.size() ? g.cwiseAbs().maxCoeff() / scale : 0.0;
    const double f0 = p_.objective->Value(x);
    r.duality_gap = m_ > 0 ? m_ / t : 0.0;
    const double gap_rel = r.duality_gap / std::max(1.0, std::abs(f0));
    r.kkt_residual = std::max(stationarity, gap_rel);
    r.objective = f0;
    r.max_violation = std::max(0.0, r.max_violation);
  }

  // Runs the barrier method from a strictly feasible x. `stop` is checked
  // after every Newton step (phase I uses it to quit early).
  SolveReport Run(Vector x, int budget,
                  const std::function<bool(const Vector&)>& stop,
                  double t0 = 0.0) const {
    SolveReport r;
    const double f0_start = p_.objective->Value(x);
    double t = m_ > 0 ? std::max(1e-4, m_ / (1.0 + std::abs(f0_start))) : 1.0;
    if (t0 > 0.0) t = t0;
    HessianBuilder h(n_, dense_);
    Vector g, dx, w;
    bool stopped_early = false;
    while (true) {
      // Centering.
      bool centered = false;
      while (r.iterations < budget) {
        GradHess(x, t, g, h);
        if (!NewtonStep(h, g, x, dx, w)) {
          throw SolverError("singular Newton system");
        }
        // dx' H dx rather than -g' dx: the latter picks up rounding from
        // the equality block.
        const double lambda2 = Curvature(h, dx);
        if (!(lambda2 >= 0.0) || lambda2 / 2.0 <= 1e-11) {
          centered = true;
          break;
        }
        const double phi = Phi(x, t);
        double s = BoxStep(x, dx);
        Vector xn = x + s * dx;
        double phin = Phi(xn, t);
        const double slope = g.dot(dx);
        const double noise = 1e-13 * std::max(1.0, std::abs(phi));
        int halvings = 0;
        while (!(phin <= phi + 0.25 * s * slope + noise) && halvings < 60) {
          s *= 0.5;
          xn = x + s * dx;
          phin = Phi(xn, t);
          ++halvings;
        }
        ++r.iterations;
        if (!(phin <= phi + noise)) {
          // No representable progress at this t.
          centered = true;
          break;
        }
        r.merit_decrease.push_back(phi - phin);
        x = xn;
        if (stop && stop(x)) {
          stopped_early = true;
          break;
        }
      }
      if (stopped_early) break;
      const double f0 = p_.objective->Value(x);
      const bool gap_ok =
          m_ == 0 || m_ / t <= tol_.opt_tol * std::max(1.0, std::abs(f0));
      if ((centered && gap_ok) || r.iterations >= budget) break;
      if (m_ == 0) break;
      t *= tol_.mu;
    }
    r.x = x;
    GradHess(x, t, g, h);
    if (!NewtonStep(h, g, x, dx, w)) throw SolverError("singular Newton system");
    Certify(x, t, dx, r);
    r.converged = !stopped_early && r.kkt_residual <= tol_.opt_tol &&
                  r.max_violation <= tol_.feas_tol;
    return r;
  }

 private:
  const ConvexProblem& p_;
  const Tolerances& tol_;
  int n_;
  int m_;
  int num_box_;
  bool has_lower_;
  bool has_upper_;
  bool has_eq_;
  bool dense_;
  Eigen::MatrixXd a_dense_;
  Eigen::LDLT<Eigen::MatrixXd> aat_ldlt_;
  mutable std::vector<double> scratch_;
};

bool StrictlyFeasible(const ConvexProblem& p, const Vector& x) {
  for (const auto& f : p.inequalities) {
    if (!(f->Value(x) < 0.0)) return false;
  }
  return true;
}

}  // namespace

HessianBuilder::HessianBuilder(int n, bool dense) : n_(n), dense_(dense) {
  if (dense_) dense_matrix_ = Eigen::MatrixXd::Zero(n, n);
}

void HessianBuilder::Add(int i, int j, double v) {
  if (i != j) diagonal_only_ = false;
  if (dense_) {
    dense_matrix_(i, j) += v;
  } else {
    triplets_.emplace_back(i, j, v);
  }
}

void HessianBuilder::AddOuter(std::span<const int> support,
                              std::span<const double> u, double scale) {
  for (size_t a = 0; a < support.size(); ++a) {
    if (u[a] == 0.0) continue;
    const double sa = scale * u[a];
    for (size_t b = 0; b < support.size(); ++b) {
      if (u[b] != 0.0) Add(support[a], support[b], sa * u[b]);
    }
  }
}

void HessianBuilder::Clear() {
  diagonal_only_ = true;
  if (dense_) {
    dense_matrix_.setZero();
  } else {
    triplets_.clear();
  }
}

Eigen::SparseMatrix<double> HessianBuilder::SparseMatrix() const {
  Eigen::SparseMatrix<double> m(n_, n_);
  if (dense_) {
    m = dense_matrix_.sparseView();
  } else {
    m.setFromTriplets(triplets_.begin(), triplets_.end());
  }
  return m;
}

Vector HessianBuilder::Diagonal() const {
  if (dense_) return dense_matrix_.diagonal();
  Vector d = Vector::Zero(n_);
  for (const auto& t : triplets_) {
    if (t.row() == t.col()) d[t.row()] += t.value();
  }
  return d;
}

AffineFunction::AffineFunction(std::vector<std::pair<int, double>> coefficients,
                               double constant)
    : constant_(constant) {
  std::map<int, double> merged;
  for (const auto& [i, c] : coefficients) merged[i] += c;
  for (const auto& [i, c] : merged) {
    support_.push_back(i);
    coef_.push_back(c);
  }
}

double AffineFunction::Value(const Vector& x) const {
  double v = constant_;
  for (size_t j = 0; j < support_.size(); ++j) v += coef_[j] * x[support_[j]];
  return v;
}

void AffineFunction::Gradient(const Vector&, std::span<double> grad) const {
  std::copy(coef_.begin(), coef_.end(), grad.begin());
}

LogSumExpFunction::LogSumExpFunction(std::vector<AffineTerm> terms) {
  if (terms.empty()) throw SolverError("log-sum-exp of no terms");
  std::vector<int> all;
  for (const auto& t : terms) {
    for (const auto& [i, c] : t.coefficients) all.push_back(i);
  }
  support_ = SortedUnique(std::move(all));
  for (const auto& t : terms) {
    std::map<int, double> merged;
    for (const auto& [i, c] : t.coefficients) merged[PositionOf(support_, i)] += c;
    local_.emplace_back(merged.begin(), merged.end());
    constants_.push_back(t.constant);
  }
}

double LogSumExpFunction::Weights(const Vector& x,
                                  std::vector<double>& p) const {
  const size_t n = constants_.size();
  p.resize(n);
  double top = -kInf;
  for (size_t i = 0; i < n; ++i) {
    double v = constants_[i];
    for (const auto& [j, c] : local_[i]) v += c * x[support_[j]];
    p[i] = v;
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    p[i] = std::exp(p[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return top + std::log(sum);
}

double LogSumExpFunction::Value(const Vector& x) const {
  std::vector<double> p;
  const double v = Weights(x, p);
  return std::isnan(v) ? kInf : v;
}

void LogSumExpFunction::Gradient(const Vector& x,
                                 std::span<double> grad) const {
  std::vector<double> p;
  Weights(x, p);
  std::fill(grad.begin(), grad.end(), 0.0);
  for (size_t i = 0; i < p.size(); ++i) {
    for (const auto& [j, c] : local_[i]) grad[j] += p[i] * c;
  }
}

void LogSumExpFunction::AddHessian(const Vector& x, double scale,
                                   HessianBuilder& h) const {
  std::vector<double> p;
  Weights(x, p);
  std::vector<double> mean(support_.size(), 0.0);
  for (size_t i = 0; i < p.size(); ++i) {
    for (const auto& [j, c] : local_[i]) mean[j] += p[i] * c;
  }
  // sum_i p_i a_i a_i^T - mean mean^T
  std::vector<int> sup;
  std::vector<double> u;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0 || local_[i].empty()) continue;
    sup.clear();
    u.clear();
    for (const auto& [j, c] : local_[i]) {
      sup.push_back(support_[j]);
      u.push_back(c);
    }
    h.AddOuter(sup, u, scale * p[i]);
  }
  h.AddOuter(support_, mean, -scale);
}

ExpAffineFunction::ExpAffineFunction(AffineTerm term, double scale)
    : constant_(term.constant), scale_(scale) {
  std::map<int, double> merged;
  for (const auto& [i, c] : term.coefficients) merged[i] += c;
  for (const auto& [i, c] : merged) {
    support_.push_back(i);
    coef_.push_back(c);
  }
}

double ExpAffineFunction::Value(const Vector& x) const {
  double v = constant_;
  for (size_t j = 0; j < support_.size(); ++j) v += coef_[j] * x[support_[j]];
  return scale_ * std::exp(v);
}

void ExpAffineFunction::Gradient(const Vector& x,
                                 std::span<double> grad) const {
  const double e = Value(x);
  for (size_t j = 0; j < support_.size(); ++j) grad[j] = e * coef_[j];
}

void ExpAffineFunction::AddHessian(const Vector& x, double scale,
                                   HessianBuilder& h) const {
  h.AddOuter(support_, coef_, scale * Value(x));
}

SeparableQuadratic::SeparableQuadratic(std::vector<int> indices,
                                       std::vector<double> curvature,
                                       std::vector<double> center) {
  std::vector<size_t> order(indices.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return indices[a] < indices[b]; });
  for (size_t i : order) {
    if (!support_.empty() && support_.back() == indices[i]) {
      throw SolverError("duplicate index in separable quadratic");
    }
    support_.push_back(indices[i]);
    curvature_.push_back(curvature[i]);
    center_.push_back(center[i]);
  }
}

double SeparableQuadratic::Value(const Vector& x) const {
  double v = 0.0;
  for (size_t j = 0; j < support_.size(); ++j) {
    const double d = x[support_[j]] - center_[j];
    v += 0.5 * curvature_[j] * d * d;
  }
  return v;
}

void SeparableQuadratic::Gradient(const Vector& x,
                                  std::span<double> grad) const {
  for (size_t j = 0; j < support_.size(); ++j) {
    grad[j] = curvature_[j] * (x[support_[j]] - center_[j]);
  }
}

void SeparableQuadratic::AddHessian(const Vector&, double scale,
                                    HessianBuilder& h) const {
  for (size_t j = 0; j < support_.size(); ++j) {
    h.AddDiagonal(support_[j], scale * curvature_[j]);
  }
}

SumFunction::SumFunction(std::vector<FunctionPtr> parts)
    : parts_(std::move(parts)) {
  std::vector<int> all;
  for (const auto& f : parts_) {
    all.insert(all.end(), f->Support().begin(), f->Support().end());
  }
  support_ = SortedUnique(std::move(all));
  for (const auto& f : parts_) {
    std::vector<int> pos;
    for (int i : f->Support()) pos.push_back(PositionOf(support_, i));
    position_.push_back(std::move(pos));
  }
}

double SumFunction::Value(const Vector& x) const {
  double v = 0.0;
  for (const auto& f : parts_) v += f->Value(x);
  return v;
}

void SumFunction::Gradient(const Vector& x, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> part;
  for (size_t i = 0; i < parts_.size(); ++i) {
    part.assign(position_[i].size(), 0.0);
    parts_[i]->Gradient(x, part);
    for (size_t j = 0; j < part.size(); ++j) grad[position_[i][j]] += part[j];
  }
}

void SumFunction::AddHessian(const Vector& x, double scale,
                             HessianBuilder& h) const {
  for (const auto& f : parts_) f->AddHessian(x, scale, h);
}

SolveReport Solve(const ConvexProblem& problem, const Tolerances& tol) {
  const int n = problem.num_vars;
  if (!problem.objective) throw SolverError("problem has no objective");
  if (problem.start.size() != n) throw SolverError("start has wrong size");
  const bool has_lower = problem.lower.size() == n;
  const bool has_upper = problem.upper.size() == n;
  const bool has_eq = problem.equality_matrix.rows() > 0;

  Vector x = problem.start;
  if (has_eq) {
    const Eigen::MatrixXd a(problem.equality_matrix);
    const Vector res = a * x - problem.equality_rhs;
    if (res.cwiseAbs().maxCoeff() > 0.0) {
      x -= a.transpose() * (a * a.transpose()).ldlt().solve(res);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double lo = has_lower ? problem.lower[i] : -kInf;
    const double hi = has_upper ? problem.upper[i] : kInf;
    if (!(lo < hi)) throw InfeasibleError("empty box for variable " + std::to_string(i));
    if (x[i] > lo && x[i] < hi) continue;
    if (has_eq) {
      throw InfeasibleError("start leaves the box after equality projection");
    }
    const double span = std::isfinite(hi - lo) ? hi - lo : 2.0;
    const double margin = std::min(0.25 * span, 1e-3 * (1.0 + std::abs(x[i])));
    x[i] = std::clamp(x[i], lo + margin, hi - margin);
  }

  int used = 0;
  if (!StrictlyFeasible(problem, x)) {
    // Phase I: minimize s s.t. f_i(x) <= s, s >= -1. A weak pull towards
    // the start keeps directions the constraints do not see bounded.
    ConvexProblem p1;
    p1.num_vars = n + 1;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    p1.objective = std::make_shared<SumFunction>(std::vector<FunctionPtr>{
        std::make_shared<AffineFunction>(
            std::vector<std::pair<int, double>>{{n, 1.0}}, 0.0),
        std::make_shared<SeparableQuadratic>(
            idx, std::vector<double>(n, 1e-6),
            std::vector<double>(x.data(), x.data() + n))});
    double worst = -kInf;
    for (const auto& f : problem.inequalities) {
      const double v = f->Value(x);
      if (!std::isfinite(v)) {
        throw InfeasibleError("start outside a constraint's domain");
      }
      worst = std::max(worst, v);
      p1.inequalities.push_back(std::make_shared<ShiftedFunction>(f, n));
    }
    if (has_eq) {
      p1.equality_matrix = problem.equality_matrix;
      p1.equality_matrix.conservativeResize(problem.equality_matrix.rows(),
                                            n + 1);
      p1.equality_rhs = problem.equality_rhs;
    }
    p1.lower = Vector::Constant(n + 1, -kInf);
    p1.upper = Vector::Constant(n + 1, kInf);
    if (has_lower) p1.lower.head(n) = problem.lower;
    if (has_upper) p1.upper.head(n) = problem.upper;
    p1.lower[n] = -1.0;
    p1.start.resize(n + 1);
    p1.start.head(n) = x;
    p1.start[n] = std::max(worst, 0.0) + 1.0;
    Tolerances t1 = tol;
    BarrierSolver phase1(p1, t1);
    const SolveReport r1 = phase1.Run(
        p1.start, tol.max_iterations,
        [&](const Vector& y) {
          return y[n] < -1e-3 && StrictlyFeasible(problem, y.head(n));
        },
        1.0);
    used = r1.iterations;
    x = r1.x.head(n);
    if (!StrictlyFeasible(problem, x)) {
      throw InfeasibleError("no strictly feasible point (phase I s* = " +
                            std::to_string(r1.x[n]) + ")");
    }
  }

  BarrierSolver main(problem, tol);
  SolveReport r = main.Run(x, std::max(1, tol.max_iterations - used), nullptr);
  r.iterations += used;
  return r;
}

FunctionPtr PosynomialInLogSpace(const Posynomial& p) {
  if (p.empty()) throw SolverError("empty posynomial");
  std::vector<AffineTerm> terms;
  for (const Monomial& m : p) {
    if (!(m.coefficient > 0.0) || !std::isfinite(m.coefficient)) {
      throw SolverError("posynomial term has non-positive coefficient");
    }
    for (const auto& [i, e] : m.exponents) {
      if (!std::isfinite(e)) throw SolverError("non-finite exponent");
    }
    terms.push_back({std::log(m.coefficient), m.exponents});
  }
  if (terms.size() == 1) {
    return std::make_shared<AffineFunction>(terms[0].coefficients,
                                            terms[0].constant);
  }
  return std::make_shared<LogSumExpFunction>(std::move(terms));
}

GpSolution SolveGpLogForm(const GeometricProgram& gp, const Tolerances& tol) {
  if (gp.start.size() != gp.num_vars) throw SolverError("bad GP start size");
  for (int i = 0; i < gp.num_vars; ++i) {
    if (!(gp.start[i] > 0.0)) throw SolverError("GP start must be positive");
  }
  ConvexProblem p;
  p.num_vars = gp.num_vars;
  p.objective = PosynomialInLogSpace(gp.objective);
  for (const auto& c : gp.constraints) {
    p.inequalities.push_back(PosynomialInLogSpace(c));
  }
  p.lower = gp.log_lower;
  p.upper = gp.log_upper;
  p.start = gp.start.array().log();
  GpSolution out;
  out.log_report = Solve(p, tol);
  out.x = out.log_report.x.array().exp();
  out.objective = std::exp(out.log_report.objective);
  return out;
}

}  // namespace hetnet::convex
