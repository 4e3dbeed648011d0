#include "lyricalign/ctw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Eigenvalues>

#include "lyricalign/error.hpp"
#include "lyricalign/kernels.hpp"

namespace lyricalign::ctw {

namespace {

WarpPath backtrack(const Eigen::MatrixXd& acc) {
  WarpPath path;
  auto i = acc.rows() - 1;
  auto j = acc.cols() - 1;
  path.a.push_back(static_cast<std::size_t>(i));
  path.b.push_back(static_cast<std::size_t>(j));
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = acc(i - 1, j - 1);
      const double up = acc(i - 1, j);
      const double left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    path.a.push_back(static_cast<std::size_t>(i));
    path.b.push_back(static_cast<std::size_t>(j));
  }
  std::reverse(path.a.begin(), path.a.end());
  std::reverse(path.b.begin(), path.b.end());
  return path;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& mean, const Eigen::MatrixXd& v) {
  return (x.rowwise() - mean) * v.transpose();
}

}  // namespace

DtwResult dtw_from_cost(const Eigen::MatrixXd& local_cost) {
  require(local_cost.rows() >= 1 && local_cost.cols() >= 1, "dtw: empty sequence");
  if (!local_cost.allFinite()) fail(ErrorKind::numerical, "dtw: non-finite local cost");
  DtwResult out;
  out.accumulated = kernels::dtw_accumulate(local_cost);
  out.cost = out.accumulated(local_cost.rows() - 1, local_cost.cols() - 1);
  out.path = backtrack(out.accumulated);
  return out;
}

DtwResult dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  require(x.rows() >= 1 && y.rows() >= 1, "dtw: empty sequence");
  require(x.cols() == y.cols(), "dtw: feature dimensions differ");
  return dtw_from_cost(kernels::cross_sq_distances(x, y));
}

bool is_valid_path(const WarpPath& path, std::size_t m, std::size_t n) {
  if (path.a.empty() || path.a.size() != path.b.size()) return false;
  if (path.a.front() != 0 || path.b.front() != 0) return false;
  if (path.a.back() != m - 1 || path.b.back() != n - 1) return false;
  for (std::size_t t = 1; t < path.size(); ++t) {
    const auto da = path.a[t] - path.a[t - 1];
    const auto db = path.b[t] - path.b[t - 1];
    if (path.a[t] < path.a[t - 1] || path.b[t] < path.b[t - 1]) return false;
    if (da > 1 || db > 1 || da + db == 0) return false;
  }
  return true;
}

std::vector<std::size_t> uniform_map(std::size_t len, std::size_t h) {
  require(len >= 1 && h >= len, "uniform_map: need 1 <= len <= h");
  std::vector<std::size_t> out(h);
  for (std::size_t t = 0; t < h; ++t) out[t] = ((t + 1) * len + h - 1) / h - 1;
  return out;
}

WarpPath utw_init(std::size_t m, std::size_t n, double h_scale) {
  require(m >= 1 && n >= 1, "utw: empty sequence");
  require(h_scale >= 1.0, "utw: h_scale must be at least 1");
  const auto h = static_cast<std::size_t>(std::ceil(h_scale * static_cast<double>(std::max(m, n)) - 1e-9));
  return {uniform_map(m, h), uniform_map(n, h)};
}

Eigen::MatrixXd warp_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& index) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(index.size()), x.cols());
  for (std::size_t t = 0; t < index.size(); ++t) {
    require(index[t] < static_cast<std::size_t>(x.rows()), "warp_rows: index out of range");
    out.row(static_cast<Eigen::Index>(t)) = x.row(static_cast<Eigen::Index>(index[t]));
  }
  return out;
}

ProjectionPair cca(const Eigen::MatrixXd& a_bar, const Eigen::MatrixXd& b_bar, double energy, double ridge) {
  require(a_bar.rows() == b_bar.rows(), "cca: views must have the same number of rows");
  require(a_bar.rows() >= 2, "cca: need at least two rows");
  require(a_bar.cols() >= 1 && b_bar.cols() >= 1, "cca: empty view");
  require(energy > 0.0 && energy <= 1.0, "cca: energy must be in (0, 1]");
  require(ridge >= 0.0, "cca: ridge must be non-negative");

  const auto h = static_cast<double>(a_bar.rows());
  const auto l = a_bar.cols();
  const auto k = b_bar.cols();
  ProjectionPair out;
  out.mean_a = a_bar.colwise().mean();
  out.mean_b = b_bar.colwise().mean();
  const Eigen::MatrixXd ac = a_bar.rowwise() - out.mean_a;
  const Eigen::MatrixXd bc = b_bar.rowwise() - out.mean_b;

  Eigen::MatrixXd caa = ac.transpose() * ac / h;
  Eigen::MatrixXd cbb = bc.transpose() * bc / h;
  const Eigen::MatrixXd cab = ac.transpose() * bc / h;
  const auto regularize = [ridge](Eigen::MatrixXd& c) {
    double r = ridge * c.trace() / static_cast<double>(c.rows());
    if (r <= 0.0) r = ridge > 0.0 ? ridge : 0.0;
    c.diagonal().array() += r;
  };
  regularize(caa);
  regularize(cbb);

  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(l + k, l + k);
  lhs.topRightCorner(l, k) = cab;
  lhs.bottomLeftCorner(k, l) = cab.transpose();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(l + k, l + k);
  rhs.topLeftCorner(l, l) = caa;
  rhs.bottomRightCorner(k, k) = cbb;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(lhs, rhs,
                                                                   Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    fail(ErrorKind::numerical, "cca: covariance blocks are singular beyond the ridge repair");

  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const auto max_dims = std::min(l, k);
  std::vector<Eigen::Index> positive;
  for (Eigen::Index i = values.size() - 1; i >= 0 && static_cast<Eigen::Index>(positive.size()) < max_dims; --i) {
    if (values(i) <= 1e-10) break;
    positive.push_back(i);
  }
  if (positive.empty()) fail(ErrorKind::numerical, "cca: no positive canonical correlation (Z = 0)");

  out.all_correlations.resize(static_cast<Eigen::Index>(positive.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    out.all_correlations(static_cast<Eigen::Index>(i)) = values(positive[i]);
    total += values(positive[i]);
  }
  std::size_t z = 0;
  double kept = 0.0;
  while (z < positive.size()) {
    kept += values(positive[z]);
    ++z;
    if (kept >= energy * total * (1.0 - 1e-12)) break;
  }
  out.energy_kept = kept / total;
  out.correlations = out.all_correlations.head(static_cast<Eigen::Index>(z));

  out.v_a.resize(static_cast<Eigen::Index>(z), l);
  out.v_b.resize(static_cast<Eigen::Index>(z), k);
  for (std::size_t i = 0; i < z; ++i) {
    const Eigen::VectorXd v = solver.eigenvectors().col(positive[i]);
    Eigen::VectorXd va = v.head(l);
    Eigen::VectorXd vb = v.tail(k);
    const double na = std::sqrt(std::max(va.dot(caa * va), 1e-300));
    const double nb = std::sqrt(std::max(vb.dot(cbb * vb), 1e-300));
    va /= na;
    vb /= nb;
    Eigen::Index pivot = 0;
    va.cwiseAbs().maxCoeff(&pivot);
    if (va(pivot) < 0.0) {
      va = -va;
      vb = -vb;
    }
    out.v_a.row(static_cast<Eigen::Index>(i)) = va.transpose();
    out.v_b.row(static_cast<Eigen::Index>(i)) = vb.transpose();
  }
  if (!out.v_a.allFinite() || !out.v_b.allFinite()) fail(ErrorKind::numerical, "cca: non-finite projection");
  return out;
}

double ctw_objective(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const WarpPath& path,
                     const ProjectionPair& projections) {
  const Eigen::MatrixXd x = project(warp_rows(a, path.a), projections.mean_a, projections.v_a);
  const Eigen::MatrixXd y = project(warp_rows(b, path.b), projections.mean_b, projections.v_b);
  return (x - y).squaredNorm();
}

CtwResult ctw_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const CtwConfig& config) {
  require(a.rows() >= 2 && b.rows() >= 2, "ctw: both sequences need at least two rows");
  require(a.allFinite() && b.allFinite(), "ctw: inputs contain NaN or Inf");
  require(config.max_cycles >= 1 && config.tolerance >= 0.0, "ctw: invalid configuration");

  CtwResult result;
  result.path = utw_init(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()), config.h_scale);
  double previous = std::numeric_limits<double>::infinity();

  for (int cycle = 0; cycle < config.max_cycles; ++cycle) {
    ProjectionPair proj =
        cca(warp_rows(a, result.path.a), warp_rows(b, result.path.b), config.energy, config.ridge);
    DtwResult step = dtw(project(a, proj.mean_a, proj.v_a), project(b, proj.mean_b, proj.v_b));
    const double j = step.cost;
    if (!std::isfinite(j)) fail(ErrorKind::numerical, "ctw: objective is not finite");

    // Both half-steps minimize J only for a fixed normalization, and the CCA
    // constraint moves with the warp. A cycle that raises J is discarded.
    if (j > previous) {
      result.stopped_on_increase = true;
      break;
    }
    result.path = std::move(step.path);
    result.projections = std::move(proj);
    result.accumulated = std::move(step.accumulated);
    result.j_trace.push_back(j);
    result.cycles = cycle + 1;
    if (previous - j < config.tolerance) {
      result.converged = true;
      break;
    }
    previous = j;
  }
  return result;
}

LogicalMatrix correspondence(const WarpPath& path, std::size_t m, std::size_t n) {
  LogicalMatrix q = LogicalMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < path.size(); ++t) {
    require(path.a[t] < m && path.b[t] < n, "correspondence: path leaves the matrix");
    q(static_cast<Eigen::Index>(path.a[t]), static_cast<Eigen::Index>(path.b[t])) = 1;
  }
  return q;
}

void write_svg(const std::filesystem::path& file, const Eigen::MatrixXd& accumulated, const WarpPath& path) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "cannot write SVG: " + file.string());
  const Eigen::Index rows = accumulated.rows();
  const Eigen::Index cols = accumulated.cols();
  // Coarsen large matrices so the file stays small.
  const Eigen::Index step_r = std::max<Eigen::Index>(1, (rows + 199) / 200);
  const Eigen::Index step_c = std::max<Eigen::Index>(1, (cols + 199) / 200);
  const double cell = 4.0;
  const double width = static_cast<double>((cols + step_c - 1) / step_c) * cell;
  const double height = static_cast<double>((rows + step_r - 1) / step_r) * cell;
  const double lo = accumulated.size() ? accumulated.minCoeff() : 0.0;
  const double hi = accumulated.size() ? accumulated.maxCoeff() : 1.0;
  const double span = hi > lo ? hi - lo : 1.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  for (Eigen::Index r = 0; r < rows; r += step_r) {
    for (Eigen::Index c = 0; c < cols; c += step_c) {
      const double v = std::sqrt((accumulated(r, c) - lo) / span);
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      out << "<rect x=\"" << static_cast<double>(c / step_c) * cell << "\" y=\""
          << static_cast<double>(r / step_r) * cell << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
    }
  }
  out << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1\" points=\"";
  for (std::size_t t = 0; t < path.size(); ++t) {
    out << (static_cast<double>(path.b[t]) / static_cast<double>(step_c) + 0.5) * cell << ','
        << (static_cast<double>(path.a[t]) / static_cast<double>(step_r) + 0.5) * cell << ' ';
  }
  out << "\"/>\n</svg>\n";
}

}  // namespace lyricalign::ctw
