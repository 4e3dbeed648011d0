// Row-wise projection under the entropic sparsity prior.
//
// For a row b with positive entries and weight l > 0 the stationary point of
//   sum_k b_k log x_k + l sum_k x_k log x_k   subject to   sum_k x_k = 1
// is x_k = (-b_k / l) / W(-b_k e^{1 + rho / l} / l) for a multiplier rho.
// With t = 1 + rho / l and z_k = -(b_k / l) e^t this simplifies to
// x_k = exp(W(z_k) - t), which stays finite even when z_k underflows.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lyricalign/kernels.hpp"
#include "lyricalign/lambert.hpp"

namespace lyricalign::kernels {

namespace {

// W_{-1}(-e^s) for s <= -1. Away from the branch point solve w + log(-w) = s
// directly, which needs no exponentials and survives underflow.
double lower_branch_neg_exp(double s) {
  if (s >= -1.0) return -1.0;
  if (s > -2.0) return lambert_w(-std::exp(s), LambertBranch::lower);
  double w = s - std::log(-s);
  for (int it = 0; it < 50; ++it) {
    const double g = w + std::log(-w) - s;
    const double step = g / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 1e-15 * std::abs(w)) break;
  }
  return w;
}

// W_0(-e^s) for s <= -1.
double principal_branch_neg_exp(double s) {
  if (s >= -1.0) return -1.0;
  if (s < -700.0) return 0.0;
  return lambert_w(-std::exp(s), LambertBranch::principal);
}

struct RowSolver {
  std::vector<double> log_ratio;  // log(b_k / l), only for positive entries
  std::vector<std::size_t> index;
  std::vector<bool> principal;    // which entries sit on W_0

  // Sum of x_k(t) - 1 and its derivative in t.
  void evaluate(double t, double& f, double& df) const {
    f = -1.0;
    df = 0.0;
    for (std::size_t i = 0; i < log_ratio.size(); ++i) {
      const double s = log_ratio[i] + t;
      const double w = principal[i] ? principal_branch_neg_exp(s) : lower_branch_neg_exp(s);
      const double x = std::exp(w - t);
      f += x;
      const double denom = 1.0 + w;
      if (denom != 0.0) df += -x / denom;
    }
  }

  double value(double t) const {
    double f = 0.0;
    double df = 0.0;
    evaluate(t, f, df);
    return f;
  }

  void fill(double t, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < log_ratio.size(); ++i) {
      const double s = log_ratio[i] + t;
      const double w = principal[i] ? principal_branch_neg_exp(s) : lower_branch_neg_exp(s);
      out[index[i]] = std::exp(w - t);
      total += out[index[i]];
    }
    for (double& x : out) x /= total;
  }
};

// Root of the (increasing) lower-branch sum on (-inf, t_max]. In the tail
// W_{-1}(-e^s) ~ s - log(-s), so x_k ~ c_k / (-log c_k - t); sharing the
// largest entry's denominator gives the cold start t0 = t_max + 1 - sum c_k.
// A caller-supplied `guess` (the previous root of a similar row) replaces it.
bool solve_lower(const RowSolver& solver, double t_max, double sum_ratio, const double* guess, double& root) {
  constexpr double kTol = 1e-12;
  double t = std::min(t_max - 1e-3, t_max + 1.0 - sum_ratio);
  if (guess != nullptr && std::isfinite(*guess)) t = std::min(*guess, t_max - 1e-12 * (1.0 + std::abs(t_max)));
  double f = 0.0;
  double df = 0.0;
  solver.evaluate(t, f, df);
  double lo = t;
  double hi = t_max;
  if (f > 0.0) {
    hi = t;
    double step = guess ? 1e-3 * (1.0 + std::abs(t)) : std::max(1.0, t_max - t);
    for (;;) {
      lo = hi - step;
      if (solver.value(lo) <= 0.0) break;
      hi = lo;
      step *= 2.0;
      if (step > 1e12) return false;
    }
  }
  for (int it = 0; it < 200 && std::abs(f) >= kTol; ++it) {
    double next = (df > 0.0 && std::isfinite(df)) ? t - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool tiny = std::abs(next - t) <= 1e-15 * (1.0 + std::abs(t));
    t = next;
    if (tiny) break;
    solver.evaluate(t, f, df);
    if (f > 0.0) hi = t; else lo = t;
  }
  root = t;
  return true;
}

// Sign-change bisection when the largest entries use W_0.
bool solve_mixed(const RowSolver& solver, double t_max, double& root) {
  const double f_hi = solver.value(t_max);
  double step = 1.0;
  double lo = t_max - step;
  while (solver.value(lo) * f_hi > 0.0) {
    step *= 2.0;
    lo = t_max - step;
    if (step > 1e6) return false;
  }
  double hi = t_max;
  double f_lo = solver.value(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = solver.value(mid);
    if (f_mid == 0.0) { lo = hi = mid; break; }
    if ((f_mid > 0.0) == (f_lo > 0.0)) { lo = mid; f_lo = f_mid; } else { hi = mid; }
  }
  root = 0.5 * (lo + hi);
  return true;
}

void plain_normalize(std::span<const double> in, std::span<double> out, double total) {
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = std::max(in[k], 0.0) / total;
}

}  // namespace

RowStatus entropic_row(std::span<const double> in, std::span<double> out, double sparsity, double* multiplier) {
  const std::size_t k_count = in.size();
  double total = 0.0;
  double peak = 0.0;
  for (double v : in) {
    const double c = std::max(v, 0.0);
    total += c;
    peak = std::max(peak, c);
  }
  const double warm = multiplier ? *multiplier : std::numeric_limits<double>::quiet_NaN();
  if (multiplier) *multiplier = std::numeric_limits<double>::quiet_NaN();
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(k_count));
    return RowStatus::zero_row;
  }
  if (sparsity <= 0.0) {
    plain_normalize(in, out, total);
    return RowStatus::solved;
  }

  RowSolver solver;
  double sum_ratio = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (in[k] > 0.0) {
      sum_ratio += in[k] / sparsity;
      solver.log_ratio.push_back(std::log(in[k] / sparsity));
      solver.index.push_back(k);
    }
  }
  solver.principal.assign(solver.log_ratio.size(), false);
  if (solver.log_ratio.size() == 1) {
    std::fill(out.begin(), out.end(), 0.0);
    out[solver.index.front()] = 1.0;
    return RowStatus::solved;
  }

  const double log_peak = std::log(peak / sparsity);
  const double t_max = -1.0 - log_peak;
  double root = 0.0;
  bool ok = false;
  if (solver.value(t_max) >= 0.0) {
    ok = solve_lower(solver, t_max, sum_ratio, multiplier ? &warm : nullptr, root);
    if (ok && multiplier) *multiplier = root;
  } else {
    for (std::size_t i = 0; i < solver.log_ratio.size(); ++i)
      solver.principal[i] = solver.log_ratio[i] >= log_peak - 1e-12;
    ok = solve_mixed(solver, t_max, root);
  }
  if (ok) {
    solver.fill(root, out);
    bool finite = true;
    for (double x : out) finite = finite && std::isfinite(x) && x >= 0.0;
    if (finite) return RowStatus::solved;
  }
  plain_normalize(in, out, total);
  return RowStatus::fallback;
}

}  // namespace lyricalign::kernels
