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

// Small smooth convex programs solved with a log-barrier Newton method:
//
//   minimize f0(x)  s.t.  f_i(x) <= 0,  A x = b,  lower <= x <= upper.
//
// Functions expose their variable support so that Hessians can be
// assembled as dense or sparse matrices depending on the problem size.
// A phase-I solve finds a strictly feasible point when the start is not.

#ifndef HETNET_CONVEX_H_
#define HETNET_CONVEX_H_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace hetnet::convex {

using Vector = Eigen::VectorXd;

// Accumulates a symmetric Hessian. Entries are added for both (i, j) and
// (j, i) by the helpers; Add() is raw.
class HessianBuilder {
 public:
  HessianBuilder(int n, bool dense);

  int size() const { return n_; }
  bool dense() const { return dense_; }
  void Add(int i, int j, double v);
  void AddDiagonal(int i, double v) { Add(i, i, v); }
  // scale * u u^T with u given on `support` (global indices).
  void AddOuter(std::span<const int> support, std::span<const double> u,
                double scale);
  void Clear();

  const Eigen::MatrixXd& dense_matrix() const { return dense_matrix_; }
  Eigen::SparseMatrix<double> SparseMatrix() const;
  bool IsDiagonal() const { return diagonal_only_; }
  Vector Diagonal() const;

 private:
  int n_;
  bool dense_;
  bool diagonal_only_ = true;
  Eigen::MatrixXd dense_matrix_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;
  // Sorted global indices of the variables the function depends on.
  virtual const std::vector<int>& Support() const = 0;
  // +infinity outside the domain.
  virtual double Value(const Vector& x) const = 0;
  // Gradient on Support(), in the same order.
  virtual void Gradient(const Vector& x, std::span<double> grad) const = 0;
  // hessian += scale * Hessian(x).
  virtual void AddHessian(const Vector& x, double scale,
                          HessianBuilder& hessian) const = 0;
};

using FunctionPtr = std::shared_ptr<const ConvexFunction>;

// c^T x + d on a sparse support.
class AffineFunction : public ConvexFunction {
 public:
  AffineFunction(std::vector<std::pair<int, double>> coefficients,
                 double constant);
  const std::vector<int>& Support() const override { return support_; }
  double Value(const Vector& x) const override;
  void Gradient(const Vector& x, std::span<double> grad) const override;
  void AddHessian(const Vector&, double, HessianBuilder&) const override {}

 private:
  std::vector<int> support_;
  std::vector<double> coef_;
  double constant_;
};

// One exponent of a log-sum-exp term: c + sum_j a_j x_j.
struct AffineTerm {
  double constant = 0.0;
  std::vector<std::pair<int, double>> coefficients;
};

// log sum_i exp(c_i + a_i^T x), evaluated with the max shift.
class LogSumExpFunction : public ConvexFunction {
 public:
  explicit LogSumExpFunction(std::vector<AffineTerm> terms);
  const std::vector<int>& Support() const override { return support_; }
  double Value(const Vector& x) const override;
  void Gradient(const Vector& x, std::span<double> grad) const override;
  void AddHessian(const Vector& x, double scale,
                  HessianBuilder& hessian) const override;

 private:
  // Softmax weights of the terms at x, and the shifted log-sum.
  double Weights(const Vector& x, std::vector<double>& p) const;

  std::vector<int> support_;
  // Per term: (position in support_, coefficient).
  std::vector<std::vector<std::pair<int, double>>> local_;
  std::vector<double> constants_;
};

// scale * exp(a^T x + c).
class ExpAffineFunction : public ConvexFunction {
 public:
  ExpAffineFunction(AffineTerm term, double scale);
  const std::vector<int>& Support() const override { return support_; }
  double Value(const Vector& x) const override;
  void Gradient(const Vector& x, std::span<double> grad) const override;
  void AddHessian(const Vector& x, double scale,
                  HessianBuilder& hessian) const override;

 private:
  std::vector<int> support_;
  std::vector<double> coef_;
  double constant_;
  double scale_;
};

// sum_i 0.5 c_i (x_i - m_i)^2 (c_i >= 0).
class SeparableQuadratic : public ConvexFunction {
 public:
  SeparableQuadratic(std::vector<int> indices, std::vector<double> curvature,
                     std::vector<double> center);
  const std::vector<int>& Support() const override { return support_; }
  double Value(const Vector& x) const override;
  void Gradient(const Vector& x, std::span<double> grad) const override;
  void AddHessian(const Vector& x, double scale,
                  HessianBuilder& hessian) const override;

 private:
  std::vector<int> support_;
  std::vector<double> curvature_;
  std::vector<double> center_;
};

// Sum of functions (used for composite objectives).
class SumFunction : public ConvexFunction {
 public:
  explicit SumFunction(std::vector<FunctionPtr> parts);
  const std::vector<int>& Support() const override { return support_; }
  double Value(const Vector& x) const override;
  void Gradient(const Vector& x, std::span<double> grad) const override;
  void AddHessian(const Vector& x, double scale,
                  HessianBuilder& hessian) const override;

 private:
  std::vector<FunctionPtr> parts_;
  std::vector<int> support_;
  // Per part: positions of its support inside support_.
  std::vector<std::vector<int>> position_;
};

struct ConvexProblem {
  int num_vars = 0;
  FunctionPtr objective;
  // f_i(x) <= 0.
  std::vector<FunctionPtr> inequalities;
  // Optional A x = b.
  Eigen::SparseMatrix<double> equality_matrix;
  Vector equality_rhs;
  // Box; entries may be +-infinity. Empty means unbounded.
  Vector lower;
  Vector upper;
  Vector start;
};

struct Tolerances {
  double feas_tol = 1e-9;
  // Relative duality gap and stationarity target.
  double opt_tol = 1e-8;
  int max_iterations = 500;
  // Barrier parameter growth per outer step.
  double mu = 20.0;
  // Use dense linear algebra up to this many variables.
  int dense_limit = 600;
};

struct SolveReport {
  Vector x;
  double objective = 0.0;
  double max_violation = 0.0;
  // Newton steps (phase I included).
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  // Barrier gap m / t at exit, an upper bound on f0(x) - p*.
  double duality_gap = 0.0;
  Vector inequality_multipliers;
  Vector equality_multipliers;
  // Barrier merit decrease of each accepted Newton step (all >= 0).
  std::vector<double> merit_decrease;
};

// Throws InfeasibleError when no strictly feasible point exists and
// SolverError on numerical breakdown. Hitting max_iterations returns a
// report with converged = false.
SolveReport Solve(const ConvexProblem& problem, const Tolerances& tol = {});

// Posynomial programs in the usual form: minimize a posynomial subject to
// posynomials <= 1, variables x > 0. Solved in y = log x.
struct Monomial {
  double coefficient = 1.0;
  std::vector<std::pair<int, double>> exponents;
};
using Posynomial = std::vector<Monomial>;

struct GeometricProgram {
  int num_vars = 0;
  Posynomial objective;
  std::vector<Posynomial> constraints;
  // Bounds on log x; empty means unbounded.
  Vector log_lower;
  Vector log_upper;
  // Positive start point (x, not log x).
  Vector start;
};

struct GpSolution {
  SolveReport log_report;
  // exp of the log-space solution.
  Vector x;
  // Posynomial objective at x.
  double objective = 0.0;
};

// Throws SolverError on a non-posynomial term (coefficient <= 0 or
// non-finite data).
GpSolution SolveGpLogForm(const GeometricProgram& gp,
                          const Tolerances& tol = {});
// log(p(exp(y))) as a convex function of y.
FunctionPtr PosynomialInLogSpace(const Posynomial& p);

}  // namespace hetnet::convex

#endif  // HETNET_CONVEX_H_
