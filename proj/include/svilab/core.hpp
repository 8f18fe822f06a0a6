#pragma once

// Problem model for two-player stochastic Nash equilibrium problems written
// as variational inequalities VI(Omega, F): find x* in Omega with
// <F(x*), x - x*> >= 0 for every feasible x.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svilab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a computed value is NaN or infinite. `index()` names the
/// offending coordinate (or sample, for oracle draws).
class NumericError : public Error {
 public:
  NumericError(const std::string& what, Index index) : Error(what), index_(index) {}
  Index index() const { return index_; }

 private:
  Index index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Joint decision col(x_g, x_d). Block sizes are fixed at construction and
/// every binary operation checks that both operands share them.
class JointPoint {
 public:
  JointPoint() = default;
  JointPoint(Vector g_block, Vector d_block);

  static JointPoint zeros(Index n_g, Index n_d);
  static JointPoint constant(Index n_g, Index n_d, double value);
  static JointPoint from_flat(Vector flat, Index n_g);

  Index n_g() const { return n_g_; }
  Index n_d() const { return data_.size() - n_g_; }
  Index size() const { return data_.size(); }

  const Vector& flat() const { return data_; }
  Vector& flat() { return data_; }

  auto g_block() const { return data_.head(n_g_); }
  auto g_block() { return data_.head(n_g_); }
  auto d_block() const { return data_.tail(n_d()); }
  auto d_block() { return data_.tail(n_d()); }

  double operator[](Index i) const { return data_[i]; }
  double& operator[](Index i) { return data_[i]; }

  bool same_shape(const JointPoint& other) const {
    return n_g_ == other.n_g_ && data_.size() == other.data_.size();
  }
  void require_shape(const JointPoint& other, const char* where) const;

  JointPoint& operator+=(const JointPoint& rhs);
  JointPoint& operator-=(const JointPoint& rhs);
  JointPoint& operator*=(double s);

  double dot(const JointPoint& rhs) const;
  double squared_norm() const { return data_.squaredNorm(); }
  double norm() const { return data_.norm(); }

  bool operator==(const JointPoint& rhs) const {
    return same_shape(rhs) && data_ == rhs.data_;
  }

 private:
  Vector data_;
  Index n_g_ = 0;
};

JointPoint operator+(JointPoint lhs, const JointPoint& rhs);
JointPoint operator-(JointPoint lhs, const JointPoint& rhs);
JointPoint operator*(double s, JointPoint x);
JointPoint operator*(JointPoint x, double s);

/// Per-coordinate interval bounds. All bounds are finite and lower <= upper.
class BoxConstraint {
 public:
  BoxConstraint() = default;  // zero-dimensional
  BoxConstraint(Vector lower, Vector upper);
  static BoxConstraint symmetric(Index n, double halfwidth);

  Index size() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool contains(const Eigen::Ref<const Vector>& v, double tol = 0.0) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Omega = Omega_g x Omega_d.
struct FeasibleSet {
  BoxConstraint g;
  BoxConstraint d;

  bool contains(const JointPoint& x, double tol = 0.0) const;
};

/// Counter-keyed random source handed to per-sample gradient evaluators.
class SampleRng;

/// Stochastic variational inequality with an analytic expected mapping and
/// a per-sample gradient. `per_sample_gradient` writes into `out`, which is
/// already shaped like `x`.
struct ViProblem {
  using ExactMap = std::function<JointPoint(const JointPoint&)>;
  using SampleMap = std::function<void(const JointPoint& x, SampleRng& rng, JointPoint& out)>;

  std::string name;
  Index n_g = 0;
  Index n_d = 0;
  FeasibleSet feasible;
  ExactMap exact_pseudogradient;
  SampleMap per_sample_gradient;
  std::optional<JointPoint> known_solution;
  std::optional<double> lipschitz;
  std::optional<JointPoint> default_start;
  std::vector<std::string> warnings;

  Index dim() const { return n_g + n_d; }
  void require_dims(const JointPoint& x, const char* where) const;
};

/// Componentwise clamp of `v` into the box.
Vector project(const BoxConstraint& box, const Eigen::Ref<const Vector>& v);

/// Blockwise projection onto Omega_g x Omega_d.
JointPoint joint_project(const ViProblem& problem, const JointPoint& x);

/// Squared Euclidean diameter of a product of boxes.
double diameter_sq(std::span<const BoxConstraint> boxes);
double diameter_sq(const FeasibleSet& set);

/// Exact expected pseudogradient. Throws NumericError on non-finite output.
JointPoint evaluate_F(const ViProblem& problem, const JointPoint& x);

/// First index of a non-finite entry, if any.
std::optional<Index> first_non_finite(const Vector& v);

}  // namespace svilab
