#include "bgm/fit.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

namespace bgm {

namespace {

/// Contrast rows of a set of parameter blocks together with the cell ->
/// margin-cell projections they need.
class BlockSystem {
 public:
  BlockSystem(const ParamScheme& scheme, const std::vector<const ParamBlock*>& blocks) : layout_(&scheme.layout()) {
    for (const ParamBlock* b : blocks) {
      auto it = margin_slot_.find(b->key.margin.bits());
      if (it == margin_slot_.end()) {
        std::vector<Index> proj(static_cast<std::size_t>(layout_->cells()));
        for (Index i = 0; i < layout_->cells(); ++i) proj[static_cast<std::size_t>(i)] = layout_->project(i, b->key.margin);
        it = margin_slot_.emplace(b->key.margin.bits(), projections_.size()).first;
        projections_.push_back(std::move(proj));
        margin_cells_.push_back(b->margin_rows);
      }
      entries_.push_back({b, it->second, rows_});
      rows_ += b->rows;
    }
  }

  [[nodiscard]] Index rows() const { return rows_; }

  /// Marginal totals of mu for every distinct margin.
  [[nodiscard]] std::vector<Eigen::VectorXd> margins(const Eigen::VectorXd& mu) const {
    std::vector<Eigen::VectorXd> out;
    for (std::size_t s = 0; s < projections_.size(); ++s) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(margin_cells_[s]);
      for (Index i = 0; i < mu.size(); ++i) m[projections_[s][static_cast<std::size_t>(i)]] += mu[i];
      out.push_back(std::move(m));
    }
    return out;
  }

  [[nodiscard]] Eigen::VectorXd value(const std::vector<Eigen::VectorXd>& margins) const {
    Eigen::VectorXd h(rows_);
    for (const auto& e : entries_) {
      h.segment(e.row, e.block->rows) = e.block->contrast * margins[e.slot].array().log().matrix();
    }
    return h;
  }

  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& mu, const std::vector<Eigen::VectorXd>& margins) const {
    Eigen::MatrixXd H(mu.size(), rows_);
    for (const auto& e : entries_) {
      const auto& proj = projections_[e.slot];
      const Eigen::VectorXd& m = margins[e.slot];
      for (Index i = 0; i < mu.size(); ++i) {
        const Index c = proj[static_cast<std::size_t>(i)];
        H.row(i).segment(e.row, e.block->rows) = (mu[i] / m[c]) * e.block->contrast.col(c).transpose();
      }
    }
    return H;
  }

 private:
  struct Entry {
    const ParamBlock* block;
    std::size_t slot;
    Index row;
  };
  const CellLayout* layout_;
  std::map<std::uint32_t, std::size_t> margin_slot_;
  std::vector<std::vector<Index>> projections_;
  std::vector<Index> margin_cells_;
  std::vector<Entry> entries_;
  Index rows_ = 0;
};

std::vector<const ParamBlock*> constrained_blocks(const ModelSpec& model) {
  std::vector<const ParamBlock*> out;
  for (const auto& key : model.zero_blocks) {
    const ParamBlock* b = model.scheme->find(key);
    if (b == nullptr) throw InputError("model constrains a block that is not in its scheme");
    out.push_back(b);
  }
  return out;
}

std::vector<const ParamBlock*> all_blocks(const ParamScheme& scheme) {
  std::vector<const ParamBlock*> out;
  for (const auto& b : scheme.blocks()) out.push_back(&b);
  return out;
}

Eigen::VectorXd checked_exp(const Eigen::VectorXd& omega) {
  if (!omega.allFinite()) throw NumericalError("log expected counts are not finite");
  Eigen::VectorXd mu = omega.array().exp().matrix();
  if (!mu.allFinite()) throw NumericalError("expected counts overflow");
  return mu;
}

/// Quantities of the saddle-point system at one omega.
struct Linearization {
  Eigen::VectorXd mu;
  Eigen::VectorXd e;
  Eigen::VectorXd h;
  Eigen::MatrixXd H;
};

Linearization linearize(const BlockSystem& sys, const Eigen::VectorXd& n, const Eigen::VectorXd& omega) {
  Linearization lin;
  lin.mu = checked_exp(omega);
  lin.e = n - lin.mu;
  const auto margins = sys.margins(lin.mu);
  lin.h = sys.value(margins);
  lin.H = sys.jacobian(lin.mu, margins);
  if (!lin.h.allFinite()) throw NumericalError("constraint function is not finite");
  return lin;
}

/// Multipliers solving H^T D^-1 (e + H tau) = -h, i.e. the tau that makes
/// the linearized step satisfy the constraints.
Eigen::VectorXd multipliers(const Linearization& lin, Eigen::LLT<Eigen::MatrixXd>& gram) {
  const Eigen::VectorXd inv_mu = lin.mu.cwiseInverse();
  const Eigen::MatrixXd scaled = inv_mu.asDiagonal() * lin.H;
  const Eigen::MatrixXd W = lin.H.transpose() * scaled;
  gram.compute(W);
  if (gram.info() != Eigen::Success || gram.rcond() < 1e-13) {
    throw NumericalError("constraint Jacobian is rank deficient (redundant constraints?)");
  }
  const Eigen::VectorXd rhs = scaled.transpose() * lin.e + lin.h;
  return -gram.solve(rhs);
}

double merit(const Linearization& lin, const Eigen::VectorXd& tau) {
  return std::sqrt((lin.e + lin.H * tau).squaredNorm() + lin.h.squaredNorm());
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::VectorXd constraint_value(const ModelSpec& model, const Eigen::VectorXd& omega) {
  if (omega.size() != model.scheme->cells()) throw InputError("omega has the wrong length");
  const BlockSystem sys(*model.scheme, constrained_blocks(model));
  const Eigen::VectorXd h = sys.value(sys.margins(checked_exp(omega)));
  if (!h.allFinite()) throw NumericalError("constraint function is not finite");
  return h;
}

Eigen::MatrixXd constraint_jacobian(const ModelSpec& model, const Eigen::VectorXd& omega) {
  if (omega.size() != model.scheme->cells()) throw InputError("omega has the wrong length");
  const BlockSystem sys(*model.scheme, constrained_blocks(model));
  const Eigen::VectorXd mu = checked_exp(omega);
  const auto margins = sys.margins(mu);
  for (const auto& m : margins)
    if ((m.array() <= 0).any()) throw NumericalError("zero margin total");
  return sys.jacobian(mu, margins);
}

Eigen::MatrixXd saturated_jacobian(const ParamScheme& scheme, const Eigen::VectorXd& omega) {
  if (omega.size() != scheme.cells()) throw InputError("omega has the wrong length");
  const BlockSystem sys(scheme, all_blocks(scheme));
  const Eigen::VectorXd mu = checked_exp(omega);
  return sys.jacobian(mu, sys.margins(mu));
}

double deviance(const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted) {
  double g2 = 0.0;
  for (Index i = 0; i < observed.size(); ++i) {
    if (observed[i] > 0) g2 += observed[i] * std::log(observed[i] / fitted[i]);
  }
  return 2.0 * g2;
}

double pearson(const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted) {
  double x2 = 0.0;
  for (Index i = 0; i < observed.size(); ++i) {
    const double diff = observed[i] - fitted[i];
    if (diff != 0.0) x2 += diff * diff / fitted[i];
  }
  return x2;
}

double chi_squared_upper(double statistic, Index df) {
  if (df <= 0) return 1.0;
  if (statistic <= 0) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

FitResult fit(const ContingencyTable& table, const ModelSpec& model, const FitSettings& settings) {
  if (!model.scheme) throw InputError("model has no parameterization");
  if (table.levels() != model.scheme->levels()) throw InputError("table levels do not match the model");
  if (settings.tol_constraint <= 0 || settings.tol_score <= 0 || settings.max_iter <= 0 ||
      settings.max_halvings < 0 || settings.start_smoothing <= 0) {
    throw InputError("fit settings must be positive");
  }
  const Eigen::VectorXd& n = table.counts();
  const double N = n.sum();
  if (!(N > 0)) throw InputError("table total must be positive");
  const auto t = static_cast<double>(n.size());

  FitResult r;
  r.model = model;
  r.observed = n;
  r.df = model.q;

  const BlockSystem sys(*model.scheme, constrained_blocks(model));
  Eigen::VectorXd omega;
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(sys.rows());
  Eigen::LLT<Eigen::MatrixXd> gram;

  if (sys.rows() == 0) {
    // Unconstrained multinomial: the MLE is the observed table.
    omega = n.array().log().matrix();
    r.iterations = 1;
    r.converged = true;
    r.trace.push_back({1.0, 0.0, 0.0});
  } else {
    omega = ((n.array() + settings.start_smoothing) * (N / (N + t * settings.start_smoothing))).log().matrix();
    for (int iter = 0; iter < settings.max_iter; ++iter) {
      const Linearization lin = linearize(sys, n, omega);
      tau = multipliers(lin, gram);
      const Eigen::VectorXd residual = lin.e + lin.H * tau;
      const double h_norm = inf_norm(lin.h);
      const double score_norm = inf_norm(residual) / N;
      if (h_norm <= settings.tol_constraint && score_norm <= settings.tol_score) {
        r.converged = true;
        break;
      }
      const Eigen::VectorXd direction = residual.cwiseQuotient(lin.mu);
      const double current = std::sqrt(residual.squaredNorm() + lin.h.squaredNorm());
      double step = 1.0;
      Eigen::VectorXd trial;
      for (int halving = 0;; ++halving) {
        trial = omega + step * direction;
        bool improved = false;
        try {
          improved = merit(linearize(sys, n, trial), tau) < current;
        } catch (const NumericalError&) {
          improved = false;
        }
        if (improved || halving >= settings.max_halvings) break;
        step *= 0.5;
      }
      omega = trial;
      r.trace.push_back({step, h_norm, score_norm});
      r.iterations = iter + 1;
    }
  }

  r.omega_hat = omega;
  r.mu_hat = omega.array().exp().matrix();
  r.pi_hat = r.mu_hat / N;
  r.tau_hat = tau;
  r.deviance = deviance(n, r.mu_hat);
  r.pearson = pearson(n, r.mu_hat);
  r.loglik = 0.0;
  for (Index i = 0; i < n.size(); ++i) {
    if (n[i] > 0) r.loglik += n[i] * std::log(r.pi_hat[i]);
  }

  const Index cells = n.size();
  const Index params = model.scheme->num_params();
  if ((r.mu_hat.array() > 0).all() && r.mu_hat.allFinite()) {
    r.lambda_hat = compute_lambda(*model.scheme, r.pi_hat);
    const Eigen::VectorXd inv_mu = r.mu_hat.cwiseInverse();
    Eigen::MatrixXd F = inv_mu.asDiagonal();
    if (sys.rows() > 0) {
      const Linearization lin = linearize(sys, n, omega);
      const Eigen::MatrixXd scaled = inv_mu.asDiagonal() * lin.H;
      gram.compute(lin.H.transpose() * scaled);
      if (gram.info() == Eigen::Success) F -= scaled * gram.solve(scaled.transpose());
    }
    r.cov_omega = F;
    const Eigen::MatrixXd J = saturated_jacobian(*model.scheme, omega);
    r.cov_lambda = J.transpose() * F * J;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.lambda_hat = Eigen::VectorXd::Constant(params, nan);
    r.cov_omega = Eigen::MatrixXd::Constant(cells, cells, nan);
    r.cov_lambda = Eigen::MatrixXd::Constant(params, params, nan);
  }
  return r;
}

namespace {

std::vector<bool> constrained_rows(const FitResult& r) {
  std::vector<bool> rows(static_cast<std::size_t>(r.model.scheme->num_params()), false);
  for (const auto& key : r.model.zero_blocks) {
    const ParamBlock* b = r.model.scheme->find(key);
    for (Index k = 0; k < b->rows; ++k) rows[static_cast<std::size_t>(b->row_offset + k)] = true;
  }
  return rows;
}

}  // namespace

std::vector<std::optional<double>> standard_errors(const FitResult& r) {
  const auto fixed = constrained_rows(r);
  std::vector<std::optional<double>> out(fixed.size());
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const double var = r.cov_lambda(static_cast<Index>(k), static_cast<Index>(k));
    if (!fixed[k] && std::isfinite(var) && var > 1e-300) out[k] = std::sqrt(var);
  }
  return out;
}

std::vector<std::optional<double>> studentize(const FitResult& r) {
  auto out = standard_errors(r);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k]) out[k] = r.lambda_hat[static_cast<Index>(k)] / *out[k];
  }
  return out;
}

GoodnessOfFit goodness_of_fit(const FitResult& r) {
  GoodnessOfFit g;
  g.deviance = r.deviance;
  g.pearson = r.pearson;
  g.df = r.df;
  g.p_deviance = chi_squared_upper(r.deviance, r.df);
  g.p_pearson = chi_squared_upper(r.pearson, r.df);
  return g;
}

}  // namespace bgm
