#include "lyricalign/wsnmf.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "lyricalign/error.hpp"
#include "lyricalign/io.hpp"

namespace lyricalign::wsnmf {

namespace {

void check_shapes(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w) {
  require(s.rows() == s.cols(), "wsnmf: S must be square");
  require(b.rows() == s.rows(), "wsnmf: B must have one row per frame");
  require(w.rows() == b.cols() && w.cols() == b.cols(), "wsnmf: W must be K x K");
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) fail(ErrorKind::numerical, std::string("wsnmf: non-finite values in ") + what);
}

Eigen::MatrixXd w_step(const Eigen::MatrixXd& btsb, const Eigen::MatrixXd& gram, const Eigen::MatrixXd& w,
                       double epsilon) {
  const Eigen::MatrixXd denom = gram * w * gram;
  return (w.array() * btsb.array() / (denom.array() + epsilon)).matrix();
}

Eigen::MatrixXd b_step(const Eigen::MatrixXd& sbw, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                       const Eigen::MatrixXd& gram, double epsilon) {
  const Eigen::MatrixXd denom = b * (w * gram * w);
  return (b.array() * (0.5 + 0.5 * sbw.array() / (denom.array() + epsilon))).matrix();
}

// ||S||^2 - 2<S, BWB'> + ||BWB'||^2 using the cached SB.
double expanded_objective(double s_norm2, const Eigen::MatrixXd& b, const Eigen::MatrixXd& sb,
                          const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd gram = b.transpose() * b;
  const Eigen::MatrixXd btsb = b.transpose() * sb;
  const double cross = (btsb.array() * w.array()).sum();
  const double fit = ((w * gram * w.transpose()).array() * gram.array()).sum();
  return std::max(0.0, s_norm2 - 2.0 * cross + fit);
}

}  // namespace

int choose_k(std::size_t l_prime, int offset) {
  require(l_prime >= 1, "choose_k: lyrics contain no vowel class");
  const long k = static_cast<long>(l_prime) + offset;
  require(k >= 1, "choose_k: K = L' + i must be at least 1");
  return static_cast<int>(k);
}

Eigen::MatrixXd update_w(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                         double epsilon, bool wtbw_numerator) {
  check_shapes(s, b, w);
  require(epsilon > 0.0, "wsnmf: epsilon must be positive");
  const Eigen::MatrixXd gram = b.transpose() * b;
  Eigen::MatrixXd numer;
  if (wtbw_numerator) {
    require(b.rows() == w.rows(), "wsnmf: the W'BW numerator needs N == K (W'BW is undefined otherwise)");
    numer = w.transpose() * b * w;
  } else {
    numer = b.transpose() * (s * b);
  }
  Eigen::MatrixXd out = w_step(numer, gram, w, epsilon);
  check_finite(out, "W");
  return out;
}

Eigen::MatrixXd update_b(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                         double epsilon) {
  check_shapes(s, b, w);
  require(epsilon > 0.0, "wsnmf: epsilon must be positive");
  const Eigen::MatrixXd gram = b.transpose() * b;
  Eigen::MatrixXd out = b_step(s * b * w, b, w, gram, epsilon);
  check_finite(out, "B");
  return out;
}

Eigen::MatrixXd sparsify_rows(const Eigen::MatrixXd& b_tilde, double sparsity, kernels::RowProjectionStats* stats) {
  require(sparsity >= 0.0, "wsnmf: sparsity must be non-negative");
  return kernels::entropic_rows(b_tilde, sparsity, stats);
}

double objective(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b, const Eigen::MatrixXd& w) {
  check_shapes(s, b, w);
  return (s - b * w * b.transpose()).squaredNorm();
}

void initialize(std::size_t n, const WsnmfConfig& config, Eigen::MatrixXd& b, Eigen::MatrixXd& w) {
  require(config.k >= 1, "wsnmf: K must be at least 1");
  require(config.init_low >= 0.0 && config.init_high > config.init_low, "wsnmf: invalid init range");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> dist(config.init_low, config.init_high);
  const auto k = static_cast<Eigen::Index>(config.k);
  b.resize(static_cast<Eigen::Index>(n), k);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < k; ++j) b(i, j) = dist(rng);
  w.resize(k, k);
  if (config.w_init == WInit::identity) {
    w.setIdentity();
    return;
  }
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) w(i, j) = w(j, i) = dist(rng);
}

WInit parse_w_init(const std::string& name) {
  if (name == "uniform") return WInit::uniform;
  if (name == "identity") return WInit::identity;
  fail(ErrorKind::invalid_input, "w_init must be \"uniform\" or \"identity\", got \"" + name + "\"");
}

const char* w_init_name(WInit init) { return init == WInit::identity ? "identity" : "uniform"; }

Factorization factorize(const Eigen::MatrixXd& s, const WsnmfConfig& config) {
  Eigen::MatrixXd b, w;
  initialize(static_cast<std::size_t>(s.rows()), config, b, w);
  return factorize(s, config, std::move(b), std::move(w));
}

Factorization factorize(const Eigen::MatrixXd& s, const WsnmfConfig& config, Eigen::MatrixXd b0,
                        Eigen::MatrixXd w0) {
  check_shapes(s, b0, w0);
  require(config.k >= 1 && b0.cols() == config.k, "wsnmf: initial B does not have K columns");
  require(config.epsilon > 0.0 && config.sparsity >= 0.0 && config.max_iterations >= 1 && config.window >= 1,
          "wsnmf: invalid configuration");
  check_finite(s, "S");
  require(s.minCoeff() >= 0.0, "wsnmf: S must be non-negative");

  Factorization f;
  f.b = std::move(b0);
  f.w = std::move(w0);
  const double s_norm2 = s.squaredNorm();
  f.objective_trace.reserve(static_cast<std::size_t>(config.max_iterations));

  Eigen::MatrixXd sb = s * f.b;
  std::vector<double> multipliers;  // warm starts for the row projection
  for (int it = 0; it < config.max_iterations; ++it) {
    const Eigen::MatrixXd gram = f.b.transpose() * f.b;
    if (config.wtbw_w_update) {
      f.w = update_w(s, f.b, f.w, config.epsilon, true);
    } else {
      f.w = w_step(f.b.transpose() * sb, gram, f.w, config.epsilon);
    }
    const Eigen::MatrixXd b_tilde = b_step(sb * f.w, f.b, f.w, gram, config.epsilon);
    check_finite(b_tilde, "B");
    check_finite(f.w, "W");
    kernels::RowProjectionStats stats;
    f.b = kernels::entropic_rows(b_tilde, config.sparsity, &stats, &multipliers);
    f.projection.zero_rows += stats.zero_rows;
    f.projection.fallback_rows += stats.fallback_rows;
    if (config.check_invariants) {
      if (f.b.minCoeff() < 0.0 || f.w.minCoeff() < 0.0) fail(ErrorKind::numerical, "wsnmf: negative factor entry");
      const double worst = (f.b.rowwise().sum().array() - 1.0).abs().maxCoeff();
      if (worst > 1e-8) fail(ErrorKind::numerical, "wsnmf: B row left the simplex");
    }

    sb.noalias() = s * f.b;
    const double obj = expanded_objective(s_norm2, f.b, sb, f.w);
    if (!std::isfinite(obj)) fail(ErrorKind::numerical, "wsnmf: objective is not finite");
    f.objective_trace.push_back(obj);
    f.iterations = it + 1;

    const auto n = f.objective_trace.size();
    const auto win = static_cast<std::size_t>(config.window);
    if (n > win) {
      const double past = f.objective_trace[n - 1 - win];
      const double change = std::abs(past - obj) / std::max(past, 1e-300);
      if (change < config.tolerance) {
        f.converged = true;
        break;
      }
    }
  }
  return f;
}

void write_csv(const std::filesystem::path& directory, const Factorization& f) {
  std::filesystem::create_directories(directory);
  io::write_matrix_csv(directory / "b.csv", f.b);
  io::write_matrix_csv(directory / "w.csv", f.w);
  std::ofstream out(directory / "objective.csv");
  require(static_cast<bool>(out), "cannot write " + (directory / "objective.csv").string());
  out << "iteration,objective\n";
  out.precision(17);
  for (std::size_t i = 0; i < f.objective_trace.size(); ++i) out << i + 1 << ',' << f.objective_trace[i] << '\n';
}

}  // namespace lyricalign::wsnmf
