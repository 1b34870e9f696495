#pragma once

// Quasi-stochastic gradient descent driven by a deterministic probe:
//
//   a_n        = g / (1 + n)^rho
//   Psi_n      = theta_n + epsilon * xi_n
//   theta_n+1  = theta_n - a_n (1/epsilon) G xi_n Gamma(Psi_n)
//
// The same xi_n is used for the perturbed evaluation and for the update.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mcqsgd/probing.h"

namespace mcqsgd {

struct QsgdConfig {
  double g = 0.08;
  double rho = 0.95;
  double epsilon = 1.0;
  /// Empty means the identity of the parameter dimension.
  Eigen::MatrixXd gain_matrix;
  int n_iters = 50;
  /// A run aborts once any |theta_i| exceeds this.
  double divergence_bound = 1e6;

  /// Throws std::invalid_argument. `d` is the parameter dimension the gain
  /// matrix must match.
  void validate(int d) const;
  Eigen::MatrixXd gain(int d) const;

  bool operator==(const QsgdConfig& o) const {
    return g == o.g && rho == o.rho && epsilon == o.epsilon && n_iters == o.n_iters &&
           divergence_bound == o.divergence_bound &&
           gain_matrix.rows() == o.gain_matrix.rows() &&
           gain_matrix.cols() == o.gain_matrix.cols() && gain_matrix == o.gain_matrix;
  }
};

/// Raised for non-finite updates, divergence, and objective failures. Carries
/// the iteration at which the run stopped (-1 when not inside a run).
class QsgdError : public std::runtime_error {
 public:
  QsgdError(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct QsgdRecord {
  int n = 0;
  double t = 0.0;
  double a = 0.0;
  Eigen::VectorXd theta;  // before the update of iteration n
  Eigen::VectorXd xi;
  Eigen::VectorXd psi;
  double gamma = 0.0;
};

using QsgdTrace = std::vector<QsgdRecord>;

struct QsgdResult {
  Eigen::VectorXd theta;
  QsgdTrace trace;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

double step_size(int n, const QsgdConfig& cfg = {});

/// Probe time for iteration n; see ClockMode.
double probe_time(int n, ClockMode mode, const QsgdConfig& cfg = {});

Eigen::VectorXd qsgd_update(const Eigen::VectorXd& theta, const Eigen::VectorXd& xi,
                            double gamma_value, double a, const QsgdConfig& cfg = {});

QsgdResult run_qsgd(const Objective& objective, const Eigen::VectorXd& theta0,
                    const QsgdConfig& cfg, const ProbingConfig& pc);

}  // namespace mcqsgd
