#include "gpcsense/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "gpcsense/error.hpp"

namespace gpcsense {

namespace {

constexpr double kBoundaryTolerance = 1e-12;

double clamp_to_interval(double t) {
  if (!std::isfinite(t) || std::abs(t) > 1.0 + kBoundaryTolerance) {
    throw DomainError("Jacobi argument outside [-1, 1]: " + std::to_string(t));
  }
  return std::clamp(t, -1.0, 1.0);
}

// Fills out[0..max_order] with classical Jacobi values.
void classical_values(unsigned max_order, double a, double b, double t, std::span<double> out) {
  out[0] = 1.0;
  if (max_order == 0) return;
  out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (t - 1.0);
  for (unsigned m = 2; m <= max_order; ++m) {
    const double s = 2.0 * m + a + b;
    const double next = (s - 1.0) * (s * (s - 2.0) * t + a * a - b * b) * out[m - 1] -
                        2.0 * (m + a - 1.0) * (m + b - 1.0) * s * out[m - 2];
    out[m] = next / (2.0 * m * (m + a + b) * (s - 2.0));
  }
}

}  // namespace

void validate(const JacobiParams& params) {
  if (!(params.alpha > -1.0) || !(params.beta > -1.0) || !std::isfinite(params.alpha) ||
      !std::isfinite(params.beta)) {
    throw ValidationError("Jacobi parameters must satisfy alpha > -1 and beta > -1");
  }
}

double jacobi_classical(unsigned order, const JacobiParams& params, double t) {
  validate(params);
  t = clamp_to_interval(t);
  std::vector<double> values(order + 1);
  classical_values(order, params.alpha, params.beta, t, values);
  return values[order];
}

double jacobi_norm_sq(unsigned order, const JacobiParams& params) {
  validate(params);
  if (order == 0) return 1.0;
  const double a = params.alpha;
  const double b = params.beta;
  const double n = order;
  // h_n / h_0 with h_n = 2^(a+b+1)/(2n+a+b+1) G(n+a+1)G(n+b+1)/(G(n+a+b+1) n!)
  // and h_0 = 2^(a+b+1) G(a+1)G(b+1)/G(a+b+2).
  const double log_ratio = std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) - std::lgamma(n + a + b + 1.0) -
                           std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(b + 1.0) +
                           std::lgamma(a + b + 2.0);
  return std::exp(log_ratio) / (2.0 * n + a + b + 1.0);
}

std::vector<double> jacobi_eval_all(unsigned max_order, const JacobiParams& params, double t) {
  validate(params);
  t = clamp_to_interval(t);
  std::vector<double> values(max_order + 1);
  classical_values(max_order, params.alpha, params.beta, t, values);
  for (unsigned n = 1; n <= max_order; ++n) values[n] /= std::sqrt(jacobi_norm_sq(n, params));
  return values;
}

double jacobi_eval(unsigned order, const JacobiParams& params, double t) {
  if (order == 0) {
    validate(params);
    clamp_to_interval(t);
    return 1.0;
  }
  return jacobi_eval_all(order, params, t)[order];
}

unsigned total_order(const MultiIndex& index) { return std::accumulate(index.begin(), index.end(), 0u); }

namespace {

bool graded_lex_less(const MultiIndex& lhs, const MultiIndex& rhs) {
  const unsigned lt = total_order(lhs);
  const unsigned rt = total_order(rhs);
  if (lt != rt) return lt < rt;
  return std::lexicographical_compare(rhs.begin(), rhs.end(), lhs.begin(), lhs.end());
}

bool admissible(const MultiIndex& index, const Truncation& truncation) {
  if (truncation.max_total_order && total_order(index) > *truncation.max_total_order) return false;
  if (truncation.max_order_per_dim) {
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] > (*truncation.max_order_per_dim)[i]) return false;
    }
  }
  return true;
}

void validate_truncation(std::size_t dimension, const Truncation& truncation) {
  if (!truncation.max_total_order && !truncation.max_order_per_dim) {
    throw ValidationError("basis needs a total-order or per-dimension truncation rule");
  }
  if (truncation.max_order_per_dim && truncation.max_order_per_dim->size() != dimension) {
    throw ValidationError("per-dimension order vector has length " +
                          std::to_string(truncation.max_order_per_dim->size()) + ", expected " +
                          std::to_string(dimension));
  }
}

}  // namespace

BasisSet::BasisSet(std::vector<JacobiParams> params_per_dim, Truncation truncation, std::vector<MultiIndex> indices)
    : params_(std::move(params_per_dim)), truncation_(std::move(truncation)), indices_(std::move(indices)) {
  const std::size_t d = params_.size();
  if (d == 0) throw ValidationError("basis dimension must be positive");
  for (const auto& p : params_) validate(p);
  validate_truncation(d, truncation_);
  if (indices_.empty() || indices_.front() != MultiIndex(d, 0u)) {
    throw ValidationError("basis must start with the zero multi-index");
  }
  std::set<MultiIndex> seen;
  max_orders_.assign(d, 0u);
  for (const auto& index : indices_) {
    if (index.size() != d) throw ValidationError("multi-index length does not match basis dimension");
    if (!admissible(index, truncation_)) throw ValidationError("multi-index violates the truncation rule");
    if (!seen.insert(index).second) throw ValidationError("duplicate multi-index in basis");
    for (std::size_t i = 0; i < d; ++i) max_orders_[i] = std::max(max_orders_[i], index[i]);
  }
}

BasisSet build_basis(std::size_t dimension, std::vector<JacobiParams> params_per_dim,
                     std::optional<unsigned> max_total_order,
                     std::optional<std::vector<unsigned>> max_order_per_dim) {
  if (dimension == 0) throw ValidationError("basis dimension must be positive");
  if (params_per_dim.size() != dimension) {
    throw ValidationError("expected " + std::to_string(dimension) + " Jacobi parameter sets, got " +
                          std::to_string(params_per_dim.size()));
  }
  Truncation truncation{max_total_order, std::move(max_order_per_dim)};
  validate_truncation(dimension, truncation);

  std::vector<unsigned> bound(dimension);
  for (std::size_t i = 0; i < dimension; ++i) {
    unsigned b = truncation.max_total_order.value_or(~0u);
    if (truncation.max_order_per_dim) b = std::min(b, (*truncation.max_order_per_dim)[i]);
    bound[i] = b;
  }

  // Odometer over the bounding box, pruned by the total-order rule.
  std::vector<MultiIndex> indices;
  MultiIndex current(dimension, 0u);
  while (true) {
    if (admissible(current, truncation)) indices.push_back(current);
    std::size_t i = 0;
    for (; i < dimension; ++i) {
      if (current[i] < bound[i] &&
          (!truncation.max_total_order || total_order(current) < *truncation.max_total_order)) {
        ++current[i];
        break;
      }
      current[i] = 0;
    }
    if (i == dimension) break;
  }
  std::sort(indices.begin(), indices.end(), graded_lex_less);
  return BasisSet(std::move(params_per_dim), std::move(truncation), std::move(indices));
}

std::vector<double> eval_multivariate(const BasisSet& basis, std::span<const double> xi_std) {
  const std::size_t d = basis.dimension();
  if (xi_std.size() != d) {
    throw ValidationError("point has " + std::to_string(xi_std.size()) + " coordinates, basis dimension is " +
                          std::to_string(d));
  }
  std::vector<std::vector<double>> univariate(d);
  for (std::size_t i = 0; i < d; ++i) {
    univariate[i] = jacobi_eval_all(basis.max_order(i), basis.params()[i], xi_std[i]);
  }
  std::vector<double> values(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const MultiIndex& index = basis.index(k);
    double product = 1.0;
    for (std::size_t i = 0; i < d; ++i) product *= univariate[i][index[i]];
    values[k] = product;
  }
  return values;
}

}  // namespace gpcsense
