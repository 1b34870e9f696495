#include "mcqsgd/qsgd.h"

#include <cmath>

#include <Eigen/Cholesky>

namespace mcqsgd {

void QsgdConfig::validate(int d) const {
  if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("QsgdConfig: g must be > 0");
  if (!(rho > 0.5 && rho <= 1.0)) throw std::invalid_argument("QsgdConfig: rho must be in (0.5, 1]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("QsgdConfig: epsilon must be > 0");
  }
  if (n_iters < 1) throw std::invalid_argument("QsgdConfig: n_iters must be >= 1");
  if (!(divergence_bound > 0.0)) {
    throw std::invalid_argument("QsgdConfig: divergence_bound must be > 0");
  }
  if (gain_matrix.size() == 0) return;
  if (gain_matrix.rows() != d || gain_matrix.cols() != d) {
    throw std::invalid_argument("QsgdConfig: gain matrix must be " + std::to_string(d) + "x" +
                                std::to_string(d));
  }
  if (!gain_matrix.allFinite() || gain_matrix != gain_matrix.transpose()) {
    throw std::invalid_argument("QsgdConfig: gain matrix must be finite and symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gain_matrix);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("QsgdConfig: gain matrix must be positive definite");
  }
}

Eigen::MatrixXd QsgdConfig::gain(int d) const {
  if (gain_matrix.size() == 0) return Eigen::MatrixXd::Identity(d, d);
  return gain_matrix;
}

double step_size(int n, const QsgdConfig& cfg) {
  if (n < 0) throw std::invalid_argument("step_size: negative iteration");
  return cfg.g / std::pow(1.0 + n, cfg.rho);
}

double probe_time(int n, ClockMode mode, const QsgdConfig& cfg) {
  if (mode == ClockMode::kIterationIndex) return static_cast<double>(n);
  double t = 0.0;
  for (int k = 1; k <= n; ++k) t += step_size(k, cfg);
  return t;
}

Eigen::VectorXd qsgd_update(const Eigen::VectorXd& theta, const Eigen::VectorXd& xi,
                            double gamma_value, double a, const QsgdConfig& cfg) {
  const auto d = static_cast<int>(theta.size());
  if (xi.size() != d) throw std::invalid_argument("qsgd_update: theta/xi dimension mismatch");
  if (!theta.allFinite() || !xi.allFinite() || !std::isfinite(gamma_value) || !std::isfinite(a)) {
    throw QsgdError(-1, "qsgd_update: non-finite input");
  }
  if (gamma_value < 0.0) throw std::invalid_argument("qsgd_update: negative objective value");

  const double scale = a / cfg.epsilon * gamma_value;
  Eigen::VectorXd next = theta - scale * (cfg.gain(d) * xi);
  if (!next.allFinite()) throw QsgdError(-1, "qsgd_update: update produced non-finite theta");
  return next;
}

QsgdResult run_qsgd(const Objective& objective, const Eigen::VectorXd& theta0,
                    const QsgdConfig& cfg, const ProbingConfig& pc) {
  const auto d = static_cast<int>(theta0.size());
  cfg.validate(d);
  pc.validate();
  if (pc.dimension() != d) {
    throw std::invalid_argument("run_qsgd: probing dimension " + std::to_string(pc.dimension()) +
                                " does not match theta dimension " + std::to_string(d));
  }
  if (!theta0.allFinite()) throw std::invalid_argument("run_qsgd: non-finite theta0");

  QsgdResult result;
  result.theta = theta0;
  result.trace.reserve(static_cast<std::size_t>(cfg.n_iters));
  double t = 0.0;
  for (int n = 0; n < cfg.n_iters; ++n) {
    const double a = step_size(n, cfg);
    if (pc.clock_mode == ClockMode::kIterationIndex) {
      t = static_cast<double>(n);
    } else if (n > 0) {
      t += a;
    }
    QsgdRecord rec;
    rec.n = n;
    rec.t = t;
    rec.a = a;
    rec.theta = result.theta;
    rec.xi = probe_value(pc, t);
    rec.psi = result.theta + cfg.epsilon * rec.xi;
    try {
      rec.gamma = objective(rec.psi);
    } catch (const std::exception& e) {
      throw QsgdError(n, "objective failed at iteration " + std::to_string(n) + ": " + e.what());
    }
    if (!std::isfinite(rec.gamma) || rec.gamma < 0.0) {
      throw QsgdError(n, "objective returned invalid value at iteration " + std::to_string(n));
    }
    try {
      result.theta = qsgd_update(result.theta, rec.xi, rec.gamma, a, cfg);
    } catch (const QsgdError& e) {
      throw QsgdError(n, std::string(e.what()) + " at iteration " + std::to_string(n));
    }
    result.trace.push_back(std::move(rec));
    if (result.theta.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
      throw QsgdError(n, "theta diverged past " + std::to_string(cfg.divergence_bound) +
                             " at iteration " + std::to_string(n));
    }
  }
  return result;
}

}  // namespace mcqsgd
