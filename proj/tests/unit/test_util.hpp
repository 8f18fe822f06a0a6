#pragma once

#include "svilab/benchmarks.hpp"
#include "svilab/core.hpp"

#include <random>

namespace svilab::testing {

inline JointPoint jp(std::initializer_list<double> g, std::initializer_list<double> d) {
  Vector vg(static_cast<Index>(g.size())), vd(static_cast<Index>(d.size()));
  Index i = 0;
  for (double v : g) vg[i++] = v;
  i = 0;
  for (double v : d) vd[i++] = v;
  return JointPoint(vg, vd);
}

/// F(x) = scale * x + shift on [-h, h]^(n_g + n_d).
inline ViProblem linear_problem(Index n_g, Index n_d, double scale, double shift = 0.0,
                                double h = 1.0) {
  ViProblem p;
  p.name = "linear";
  p.n_g = n_g;
  p.n_d = n_d;
  p.feasible = FeasibleSet{BoxConstraint::symmetric(n_g, h), BoxConstraint::symmetric(n_d, h)};
  p.exact_pseudogradient = [scale, shift](const JointPoint& x) {
    JointPoint out = x;
    out.flat() = scale * x.flat().array() + shift;
    return out;
  };
  p.lipschitz = std::abs(scale);
  return p;
}

inline ViProblem zero_problem(Index n_g, Index n_d, double h = 1.0) {
  return linear_problem(n_g, n_d, 0.0, 0.0, h);
}

/// Deterministic 1x1 bilinear game with E[M] = mean.
inline ViProblem bilinear_1d(double a, double b, double mean = 1.0, double sd = 0.0) {
  BilinearGameSpec spec;
  spec.n_g = 1;
  spec.n_d = 1;
  spec.a = Vector::Constant(1, a);
  spec.b = Vector::Constant(1, b);
  spec.matrix_mean = mean;
  spec.matrix_noise_sd = sd;
  return build_bilinear(spec);
}

inline JointPoint random_point(std::mt19937_64& gen, Index n_g, Index n_d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  JointPoint p = JointPoint::zeros(n_g, n_d);
  for (Index i = 0; i < p.size(); ++i) p[i] = u(gen);
  return p;
}

}  // namespace svilab::testing
