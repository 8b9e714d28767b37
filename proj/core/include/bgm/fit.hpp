#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bgm/mll.hpp"
#include "bgm/table.hpp"

namespace bgm {

struct FitSettings {
  double tol_constraint = 1e-8;  ///< on max |h(omega)|
  double tol_score = 1e-6;       ///< on max |e + H tau| / N
  int max_iter = 500;
  int max_halvings = 10;
  double start_smoothing = 0.5;  ///< additive smoothing of the starting counts
};

struct TraceEntry {
  double step = 0.0;
  double constraint_norm = 0.0;  ///< max |h| before the step
  double score_norm = 0.0;       ///< max |e + H tau| / N before the step
};

struct FitResult {
  ModelSpec model;
  Eigen::VectorXd observed;
  Eigen::VectorXd omega_hat;
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd pi_hat;
  Eigen::VectorXd tau_hat;
  /// Full parameter vector of the model's scheme at the fitted distribution.
  Eigen::VectorXd lambda_hat;
  Eigen::MatrixXd cov_lambda;
  Eigen::MatrixXd cov_omega;
  double deviance = 0.0;
  double pearson = 0.0;
  /// Multinomial log-likelihood kernel sum n log(pi_hat).
  double loglik = 0.0;
  Index df = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
};

/// h(omega) = C_D log(T_D exp(omega)): the stacked zero-constrained blocks.
Eigen::VectorXd constraint_value(const ModelSpec& model, const Eigen::VectorXd& omega);

/// H = dh/domega^T as a t x q matrix, D_mu T^T D_{T mu}^{-1} C_D^T.
Eigen::MatrixXd constraint_jacobian(const ModelSpec& model, const Eigen::VectorXd& omega);

/// Jacobian of the whole parameter vector with respect to omega, t x (t - 1).
Eigen::MatrixXd saturated_jacobian(const ParamScheme& scheme, const Eigen::VectorXd& omega);

/// Constrained maximum likelihood under multinomial sampling, by
/// Lagrangian Fisher scoring with step halving. Non-convergence is reported
/// through `converged`, not thrown. Throws InputError for incompatible
/// inputs and NumericalError when the constraints are linearly dependent.
FitResult fit(const ContingencyTable& table, const ModelSpec& model, const FitSettings& settings = {});

/// lambda_hat divided by its standard error; empty for constrained blocks
/// and zero-variance entries.
std::vector<std::optional<double>> studentize(const FitResult& r);

/// Standard errors sqrt(diag(cov_lambda)); empty where undefined.
std::vector<std::optional<double>> standard_errors(const FitResult& r);

struct GoodnessOfFit {
  double deviance = 0.0;
  double pearson = 0.0;
  Index df = 0;
  double p_deviance = 1.0;
  double p_pearson = 1.0;
};

GoodnessOfFit goodness_of_fit(const FitResult& r);

/// Upper tail of the chi-squared distribution; 1 when df == 0.
double chi_squared_upper(double statistic, Index df);

/// 2 sum n log(n / mu) with 0 log 0 = 0.
double deviance(const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted);
double pearson(const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted);

}  // namespace bgm
