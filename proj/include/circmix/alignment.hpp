#ifndef CIRCMIX_ALIGNMENT_HPP
#define CIRCMIX_ALIGNMENT_HPP

// Label matching between two fitted mixtures with the same shape.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "circmix/angles.hpp"
#include "circmix/errors.hpp"
#include "circmix/mixture.hpp"

namespace circmix {

/// perm[j] is the candidate component matched to reference component j.
using Permutation = std::vector<int>;

inline double alignment_cost(const ComponentParams& a, const ComponentParams& b) {
  return arc_distance(a.circ.mu, b.circ.mu, kTwoPi) + 2.0 * arc_distance(a.axial.mu, b.axial.mu, kPi);
}

/// Exhaustive search over the J! matchings for the one with the smallest summed
/// location distance; ties go to the lexicographically first permutation.
inline Permutation align_labels(const MixtureModel& reference, const MixtureModel& candidate) {
  if (reference.J() != candidate.J()) throw DomainError("align_labels: models have different J");
  if (reference.J() > 8) throw DomainError("align_labels: exhaustive matching supports at most 8 components");
  const int J = reference.J();
  Permutation perm(static_cast<std::size_t>(J));
  std::iota(perm.begin(), perm.end(), 0);
  Permutation best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int j = 0; j < J; ++j) {
      cost += alignment_cost(reference.components[static_cast<std::size_t>(j)],
                             candidate.components[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) inv[static_cast<std::size_t>(perm[j])] = static_cast<int>(j);
  return inv;
}

/// Reorders components so that new component j is old component perm[j]; the
/// log-odds are re-expressed against the new reference class perm[0].
inline MixtureModel permute(const MixtureModel& model, const Permutation& perm) {
  const int J = model.J();
  if (static_cast<int>(perm.size()) != J) throw DomainError("permute: permutation length differs from J");
  MixtureModel out;
  for (int j = 0; j < J; ++j) out.components.push_back(model.components[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]);
  const int p = model.coefficients.columns();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(J, p);
  if (J > 1) full.bottomRows(J - 1) = model.coefficients.beta;
  Eigen::MatrixXd beta(std::max(J - 1, 0), p);
  const Eigen::RowVectorXd base = full.row(perm[0]);
  for (int j = 1; j < J; ++j) beta.row(j - 1) = full.row(perm[static_cast<std::size_t>(j)]) - base;
  out.coefficients = ConcomitantCoefficients(beta);
  return out;
}

/// Column j of the result is column perm[j] of `m`.
inline Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& m, const Permutation& perm) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = m.col(perm[static_cast<std::size_t>(j)]);
  return out;
}

/// Relabels 0-based labels produced under `perm`'s source ordering.
inline std::vector<int> relabel(const std::vector<int>& labels, const Permutation& perm) {
  const Permutation inv = inverse(perm);
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = inv[static_cast<std::size_t>(labels[i])];
  return out;
}

}  // namespace circmix

#endif  // CIRCMIX_ALIGNMENT_HPP
