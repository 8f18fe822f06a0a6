#include "svilab/core.hpp"

#include <cmath>

#include <fmt/format.h>

namespace svilab {

JointPoint::JointPoint(Vector g_block, Vector d_block) : n_g_(g_block.size()) {
  data_.resize(g_block.size() + d_block.size());
  data_ << g_block, d_block;
}

JointPoint JointPoint::zeros(Index n_g, Index n_d) { return constant(n_g, n_d, 0.0); }

JointPoint JointPoint::constant(Index n_g, Index n_d, double value) {
  if (n_g < 0 || n_d < 0) throw DimensionError("negative block size");
  return JointPoint(Vector::Constant(n_g, value), Vector::Constant(n_d, value));
}

JointPoint JointPoint::from_flat(Vector flat, Index n_g) {
  if (n_g < 0 || n_g > flat.size()) {
    throw DimensionError(fmt::format("block size {} does not fit a vector of length {}", n_g,
                                     flat.size()));
  }
  JointPoint p;
  p.data_ = std::move(flat);
  p.n_g_ = n_g;
  return p;
}

void JointPoint::require_shape(const JointPoint& other, const char* where) const {
  if (!same_shape(other)) {
    throw DimensionError(fmt::format("{}: shape ({}, {}) does not match ({}, {})", where, n_g(),
                                     n_d(), other.n_g(), other.n_d()));
  }
}

JointPoint& JointPoint::operator+=(const JointPoint& rhs) {
  require_shape(rhs, "operator+");
  data_ += rhs.data_;
  return *this;
}

JointPoint& JointPoint::operator-=(const JointPoint& rhs) {
  require_shape(rhs, "operator-");
  data_ -= rhs.data_;
  return *this;
}

JointPoint& JointPoint::operator*=(double s) {
  data_ *= s;
  return *this;
}

double JointPoint::dot(const JointPoint& rhs) const {
  require_shape(rhs, "dot");
  return data_.dot(rhs.data_);
}

JointPoint operator+(JointPoint lhs, const JointPoint& rhs) { return lhs += rhs; }
JointPoint operator-(JointPoint lhs, const JointPoint& rhs) { return lhs -= rhs; }
JointPoint operator*(double s, JointPoint x) { return x *= s; }
JointPoint operator*(JointPoint x, double s) { return x *= s; }

BoxConstraint::BoxConstraint(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw DimensionError(fmt::format("box bounds have lengths {} and {}", lower_.size(),
                                     upper_.size()));
  }
  for (Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
      throw ConfigError(fmt::format("box bound {} is not finite", i));
    }
    if (lower_[i] > upper_[i]) {
      throw ConfigError(fmt::format("box bound {}: lower {} exceeds upper {}", i, lower_[i],
                                    upper_[i]));
    }
  }
}

BoxConstraint BoxConstraint::symmetric(Index n, double halfwidth) {
  if (!(halfwidth >= 0.0)) throw ConfigError("box halfwidth must be nonnegative");
  return BoxConstraint(Vector::Constant(n, -halfwidth), Vector::Constant(n, halfwidth));
}

bool BoxConstraint::contains(const Eigen::Ref<const Vector>& v, double tol) const {
  if (v.size() != size()) return false;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] < lower_[i] - tol || v[i] > upper_[i] + tol) return false;
  }
  return true;
}

bool FeasibleSet::contains(const JointPoint& x, double tol) const {
  return x.n_g() == g.size() && x.n_d() == d.size() && g.contains(x.g_block(), tol) &&
         d.contains(x.d_block(), tol);
}

void ViProblem::require_dims(const JointPoint& x, const char* where) const {
  if (x.n_g() != n_g || x.n_d() != n_d) {
    throw DimensionError(fmt::format("{}: point has blocks ({}, {}), problem '{}' expects ({}, {})",
                                     where, x.n_g(), x.n_d(), name, n_g, n_d));
  }
}

Vector project(const BoxConstraint& box, const Eigen::Ref<const Vector>& v) {
  if (v.size() != box.size()) {
    throw DimensionError(fmt::format("project: vector of length {} onto box of length {}",
                                     v.size(), box.size()));
  }
  return v.cwiseMax(box.lower()).cwiseMin(box.upper());
}

JointPoint joint_project(const ViProblem& problem, const JointPoint& x) {
  problem.require_dims(x, "joint_project");
  return JointPoint(project(problem.feasible.g, x.g_block()),
                    project(problem.feasible.d, x.d_block()));
}

double diameter_sq(std::span<const BoxConstraint> boxes) {
  double total = 0.0;
  for (const auto& box : boxes) total += (box.upper() - box.lower()).squaredNorm();
  return total;
}

double diameter_sq(const FeasibleSet& set) {
  const BoxConstraint boxes[] = {set.g, set.d};
  return diameter_sq(boxes);
}

std::optional<Index> first_non_finite(const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return i;
  }
  return std::nullopt;
}

JointPoint evaluate_F(const ViProblem& problem, const JointPoint& x) {
  problem.require_dims(x, "evaluate_F");
  JointPoint value = problem.exact_pseudogradient(x);
  if (!value.same_shape(x)) {
    throw DimensionError(fmt::format("pseudogradient of '{}' changed block structure",
                                     problem.name));
  }
  if (auto bad = first_non_finite(value.flat())) {
    throw NumericError(fmt::format("pseudogradient of '{}' is not finite at coordinate {}",
                                   problem.name, *bad),
                       *bad);
  }
  return value;
}

}  // namespace svilab
