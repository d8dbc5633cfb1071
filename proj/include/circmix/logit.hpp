#ifndef CIRCMIX_LOGIT_HPP
#define CIRCMIX_LOGIT_HPP

// Multinomial logistic regression with fractional (soft) targets, reference class 1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "circmix/errors.hpp"

namespace circmix {

/// Coefficients β_2..β_J of a reference-class multinomial logit, one row per
/// non-reference class; class 1 has β₁ ≡ 0.
struct ConcomitantCoefficients {
  Eigen::MatrixXd beta;  // (J-1) x (q+1)

  ConcomitantCoefficients() = default;
  explicit ConcomitantCoefficients(Eigen::MatrixXd b) : beta(std::move(b)) {}
  static ConcomitantCoefficients zeros(int classes, int columns) {
    return ConcomitantCoefficients(Eigen::MatrixXd::Zero(std::max(classes - 1, 0), columns));
  }

  int classes() const noexcept { return static_cast<int>(beta.rows()) + 1; }
  int columns() const noexcept { return static_cast<int>(beta.cols()); }
};

/// π(z) by max-shifted softmax over the linear predictors (0, zᵀβ_2, ..., zᵀβ_J).
inline Eigen::VectorXd mixing_weights(const ConcomitantCoefficients& coeffs, const Eigen::Ref<const Eigen::VectorXd>& z) {
  const int J = coeffs.classes();
  if (J > 1 && z.size() != coeffs.columns()) {
    throw DomainError("mixing_weights: covariate length " + std::to_string(z.size()) + " does not match " +
                      std::to_string(coeffs.columns()) + " coefficient columns");
  }
  Eigen::VectorXd eta(J);
  eta(0) = 0.0;
  if (J > 1) eta.tail(J - 1) = coeffs.beta * z;
  const double m = eta.maxCoeff();
  Eigen::VectorXd p = (eta.array() - m).exp();
  return p / p.sum();
}

/// Row-wise log π_j(z_i), n x J.
inline Eigen::MatrixXd log_mixing_weights(const ConcomitantCoefficients& coeffs, const Eigen::MatrixXd& z) {
  const int J = coeffs.classes();
  Eigen::MatrixXd eta(z.rows(), J);
  eta.col(0).setZero();
  if (J > 1) eta.rightCols(J - 1) = z * coeffs.beta.transpose();
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double m = eta.row(i).maxCoeff();
    const double lse = m + std::log((eta.row(i).array() - m).exp().sum());
    eta.row(i).array() -= lse;
  }
  return eta;
}

/// Q(β) = Σ_i Σ_j u_ij log π_j(z_i; β).
inline double logit_objective(const ConcomitantCoefficients& coeffs, const Eigen::MatrixXd& z,
                              const Eigen::MatrixXd& targets) {
  return (targets.array() * log_mixing_weights(coeffs, z).array()).sum();
}

struct LogitFit {
  ConcomitantCoefficients coefficients;
  double objective = 0.0;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  bool ridge = false;  // fell back to the 1e-6·‖β‖² penalty
};

struct LogitOptions {
  double gradient_tol = 1e-8;
  int max_iter = 100;
  double ridge = 1e-6;
};

namespace detail {

// Centers and scales non-intercept covariate columns; column 0 must be the intercept.
struct Standardizer {
  Eigen::VectorXd mean, scale;

  explicit Standardizer(const Eigen::MatrixXd& z) : mean(Eigen::VectorXd::Zero(z.cols())), scale(Eigen::VectorXd::Ones(z.cols())) {
    const double n = static_cast<double>(z.rows());
    for (Eigen::Index c = 1; c < z.cols(); ++c) {
      const double m = z.col(c).mean();
      const double sd = std::sqrt((z.col(c).array() - m).square().sum() / n);
      if (sd > 1e-12 * std::max(1.0, std::abs(m))) {
        mean(c) = m;
        scale(c) = sd;
      }
    }
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& z) const {
    Eigen::MatrixXd out = z;
    for (Eigen::Index c = 1; c < z.cols(); ++c) out.col(c) = (z.col(c).array() - mean(c)) / scale(c);
    return out;
  }

  Eigen::MatrixXd to_standard(const Eigen::MatrixXd& beta) const {
    Eigen::MatrixXd g = beta;
    for (Eigen::Index c = 1; c < beta.cols(); ++c) {
      g.col(c) = beta.col(c) * scale(c);
      g.col(0) += beta.col(c) * mean(c);
    }
    return g;
  }

  Eigen::MatrixXd to_original(const Eigen::MatrixXd& gamma) const {
    Eigen::MatrixXd b = gamma;
    for (Eigen::Index c = 1; c < gamma.cols(); ++c) {
      b.col(c) = gamma.col(c) / scale(c);
      b.col(0) -= gamma.col(c) * mean(c) / scale(c);
    }
    return b;
  }
};

}  // namespace detail

/// Newton-Raphson with backtracking on the weighted multinomial log-likelihood.
/// `targets` is n x J with rows summing to one (responsibilities).
inline LogitFit fit_multinomial_logit(const Eigen::MatrixXd& z, const Eigen::MatrixXd& targets,
                                      const ConcomitantCoefficients& warm_start, const LogitOptions& options = {}) {
  const int J = static_cast<int>(targets.cols());
  const int p = static_cast<int>(z.cols());
  if (targets.rows() != z.rows()) throw DomainError("multinomial logit: row count mismatch");
  LogitFit out;
  if (J == 1) {
    out.coefficients = ConcomitantCoefficients::zeros(1, p);
    out.converged = true;
    return out;
  }
  if (warm_start.classes() != J || warm_start.columns() != p) {
    throw DomainError("multinomial logit: warm start has the wrong shape");
  }
  const detail::Standardizer standardizer(z);
  const Eigen::MatrixXd zs = standardizer.apply(z);
  const int dim = (J - 1) * p;
  const Eigen::VectorXd row_mass = targets.rowwise().sum();

  Eigen::MatrixXd gamma = standardizer.to_standard(warm_start.beta);
  double lambda = 0.0;
  auto penalized = [&](const Eigen::MatrixXd& g) {
    return logit_objective(ConcomitantCoefficients(g), zs, targets) - lambda * g.squaredNorm();
  };
  double current = penalized(gamma);
  out.objective_trace.push_back(current);

  auto iterate = [&] {
    for (int it = 0; it < options.max_iter; ++it) {
      const Eigen::MatrixXd logp = log_mixing_weights(ConcomitantCoefficients(gamma), zs);
      const Eigen::MatrixXd prob = logp.array().exp();
      Eigen::VectorXd grad(dim);
      Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);  // negative Hessian
      for (int j = 1; j < J; ++j) {
        const Eigen::VectorXd resid = targets.col(j) - row_mass.cwiseProduct(prob.col(j));
        grad.segment((j - 1) * p, p) = zs.transpose() * resid - 2.0 * lambda * gamma.row(j - 1).transpose();
        for (int k = j; k < J; ++k) {
          Eigen::VectorXd w = row_mass.cwiseProduct(prob.col(j));
          if (k == j) {
            w = w.cwiseProduct((1.0 - prob.col(j).array()).matrix());
          } else {
            w = -w.cwiseProduct(prob.col(k));
          }
          const Eigen::MatrixXd block = zs.transpose() * w.asDiagonal() * zs;
          info.block((j - 1) * p, (k - 1) * p, p, p) = block;
          if (k != j) info.block((k - 1) * p, (j - 1) * p, p, p) = block.transpose();
        }
      }
      if (lambda > 0.0) info.diagonal().array() += 2.0 * lambda;
      out.iterations = it + 1;
      if (grad.cwiseAbs().maxCoeff() < options.gradient_tol) {
        out.converged = true;
        break;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
      const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                            ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff());
      if (singular && lambda == 0.0) {
        lambda = options.ridge;
        out.ridge = true;
        current = penalized(gamma);
        continue;
      }
      Eigen::VectorXd step = ldlt.solve(grad);
      if (!step.allFinite()) step = grad;
      double t = 1.0;
      bool improved = false;
      for (int bt = 0; bt < 50; ++bt) {
        Eigen::MatrixXd candidate = gamma;
        for (int j = 1; j < J; ++j) candidate.row(j - 1) += t * step.segment((j - 1) * p, p).transpose();
        const double value = penalized(candidate);
        if (value >= current) {
          improved = value > current || t == 1.0;
          gamma = candidate;
          current = value;
          break;
        }
        t *= 0.5;
      }
      out.objective_trace.push_back(current);
      if (!improved) {
        // No ascent direction left at double precision.
        out.converged = grad.cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, row_mass.sum());
        break;
      }
    }
  };
  iterate();
  if (!out.converged && lambda == 0.0) {
    // Separation or a flat direction: retry with the small ridge penalty.
    lambda = options.ridge;
    out.ridge = true;
    current = penalized(gamma);
    iterate();
  }
  out.coefficients = ConcomitantCoefficients(standardizer.to_original(gamma));
  out.objective = logit_objective(out.coefficients, z, targets);
  return out;
}

}  // namespace circmix

#endif  // CIRCMIX_LOGIT_HPP
