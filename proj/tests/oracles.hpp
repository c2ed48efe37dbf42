#pragma once

// Independent reference computations used by the unit and acceptance
// suites. Nothing here calls into the library code paths being checked.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// AP@k by recounting every prefix from scratch.
inline double brute_force_ap(const std::vector<int>& ranked, const std::vector<int>& relevant, std::size_t k) {
  auto is_rel = [&](int x) { return std::find(relevant.begin(), relevant.end(), x) != relevant.end(); };
  double sum = 0.0;
  for (std::size_t i = 1; i <= std::min(k, ranked.size()); ++i) {
    if (!is_rel(ranked[i - 1])) continue;
    std::size_t in_prefix = 0;
    for (std::size_t j = 0; j < i; ++j) in_prefix += is_rel(ranked[j]) ? 1 : 0;
    sum += static_cast<double>(in_prefix) / static_cast<double>(i);
  }
  return sum / static_cast<double>(std::min(relevant.size(), k));
}

// Central finite difference of f along every coordinate of x.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                        double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x(i);
    x(i) = orig + h;
    const double up = f(x);
    x(i) = orig - h;
    const double down = f(x);
    x(i) = orig;
    g(i) = (up - down) / (2 * h);
  }
  return g;
}

// Max-norm error scaled by the larger gradient's max norm, so near-zero
// components do not dominate.
inline double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max({analytic.lpNorm<Eigen::Infinity>(), numeric.lpNorm<Eigen::Infinity>(), 1e-8});
  return (analytic - numeric).lpNorm<Eigen::Infinity>() / scale;
}

// Best second-order split gain over the given thresholds (x <= t goes
// left), summing each side directly from the rows. Returns 0 when no
// split has positive gain.
inline double best_split_gain(const std::vector<double>& x, const std::vector<double>& g, const std::vector<double>& h,
                              const std::vector<double>& thresholds, std::size_t min_leaf, double eps = 1e-6) {
  double best = 0.0;
  for (double t : thresholds) {
    double gl = 0, hl = 0, gr = 0, hr = 0, gt = 0, ht = 0;
    std::size_t nl = 0, nr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      gt += g[i];
      ht += h[i];
      if (x[i] <= t) {
        gl += g[i];
        hl += h[i];
        ++nl;
      } else {
        gr += g[i];
        hr += h[i];
        ++nr;
      }
    }
    if (nl < min_leaf || nr < min_leaf) continue;
    const double gain = gl * gl / (hl + eps) + gr * gr / (hr + eps) - gt * gt / (ht + eps);
    best = std::max(best, gain);
  }
  return best;
}

}  // namespace oracle
