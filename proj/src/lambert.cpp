#include "lyricalign/lambert.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lyricalign/error.hpp"

namespace lyricalign {

namespace {

constexpr double kE = 2.718281828459045;

// Series around the branch point x = -1/e in p = +-sqrt(2 (e x + 1)).
double branch_point_guess(double x, double sign) {
  const double p = sign * std::sqrt(std::max(0.0, 2.0 * (kE * x + 1.0)));
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

double initial_guess(double x, LambertBranch branch) {
  if (branch == LambertBranch::principal) {
    if (x < -0.32) return branch_point_guess(x, 1.0);
    if (x < 3.0) return std::log1p(x) * (1.0 - std::log1p(std::log1p(x)) / (2.0 + std::log1p(x)));
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
  }
  if (x < -0.32) return branch_point_guess(x, -1.0);
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

double lambert_w(double x, LambertBranch branch) {
  if (!std::isfinite(x)) fail(ErrorKind::invalid_input, "lambert_w: non-finite argument");
  // A hair of slack below -1/e absorbs rounding in callers that hit the branch point.
  if (x < -kInvE) {
    if (x > -kInvE * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return -1.0;
    fail(ErrorKind::invalid_input, "lambert_w: argument below -1/e");
  }
  if (branch == LambertBranch::lower && x >= 0.0)
    fail(ErrorKind::invalid_input, "lambert_w: lower branch needs a negative argument");
  if (x == 0.0) return 0.0;
  if (x == -kInvE) return -1.0;

  double w = initial_guess(x, branch);
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0 || !std::isfinite(denom)) break;
    const double step = f / denom;
    double next = w - step;
    // Halley can overshoot past the branch point; keep the iterate on its branch.
    if (branch == LambertBranch::principal && next < -1.0) next = 0.5 * (w - 1.0);
    if (branch == LambertBranch::lower && next > -1.0) next = 0.5 * (w - 1.0);
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(next));
    w = next;
    if (done) break;
  }
  return w;
}

}  // namespace lyricalign
