#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gpcsense {

/// Exponents of the Jacobi weight (1 - t)^alpha (1 + t)^beta on [-1, 1].
/// A Beta(p, q) variable maps to alpha = q - 1, beta = p - 1.
struct JacobiParams {
  double alpha = 0.0;
  double beta = 0.0;

  static JacobiParams from_beta_shapes(double p, double q) { return {q - 1.0, p - 1.0}; }

  bool operator==(const JacobiParams&) const = default;
};

void validate(const JacobiParams& params);

/// Orthonormal Jacobi polynomial of the given order at t, normalized under the
/// Beta probability measure on [-1, 1]. Inputs within 1e-12 outside the
/// interval are clamped; anything further out throws DomainError.
double jacobi_eval(unsigned order, const JacobiParams& params, double t);

/// All orthonormal values psi_0(t) .. psi_max_order(t) in one recurrence pass.
std::vector<double> jacobi_eval_all(unsigned max_order, const JacobiParams& params, double t);

/// Classical (unnormalized) Jacobi polynomial P_n^(alpha,beta)(t).
double jacobi_classical(unsigned order, const JacobiParams& params, double t);

/// Squared norm of the classical Jacobi polynomial under the probability
/// measure, i.e. the weight rescaled to integrate to one.
double jacobi_norm_sq(unsigned order, const JacobiParams& params);

using MultiIndex = std::vector<unsigned>;

unsigned total_order(const MultiIndex& index);

struct Truncation {
  std::optional<unsigned> max_total_order;
  std::optional<std::vector<unsigned>> max_order_per_dim;

  bool operator==(const Truncation&) const = default;
};

/// Set of multi-indices defining a multivariate orthonormal basis.
///
/// Indices are kept in graded lexicographic order: ascending total order,
/// and within one total order, descending in the first component, then the
/// second, and so on. The zero index is always at position 0.
class BasisSet {
 public:
  BasisSet(std::vector<JacobiParams> params_per_dim, Truncation truncation, std::vector<MultiIndex> indices);

  std::size_t dimension() const { return params_.size(); }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& index(std::size_t k) const { return indices_[k]; }
  const std::vector<JacobiParams>& params() const { return params_; }
  const Truncation& truncation() const { return truncation_; }

  /// Highest order appearing in dimension i.
  unsigned max_order(std::size_t dim) const { return max_orders_[dim]; }

 private:
  std::vector<JacobiParams> params_;
  Truncation truncation_;
  std::vector<MultiIndex> indices_;
  std::vector<unsigned> max_orders_;
};

BasisSet build_basis(std::size_t dimension, std::vector<JacobiParams> params_per_dim,
                     std::optional<unsigned> max_total_order,
                     std::optional<std::vector<unsigned>> max_order_per_dim);

/// Values of every basis function at a point in standardized coordinates.
std::vector<double> eval_multivariate(const BasisSet& basis, std::span<const double> xi_std);

}  // namespace gpcsense
