#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpcsense/basis.hpp"
#include "gpcsense/randomspace.hpp"

namespace gpcsense {

enum class LinkKind { identity, logit };

struct LinkSpec {
  LinkKind kind = LinkKind::logit;
  double epsilon = 1e-6;
};

std::string to_string(LinkKind kind);
LinkKind link_kind_from_string(const std::string& text);

/// log(p / (1 - p)) after clamping p into [epsilon, 1 - epsilon].
double logit(double p, const LinkSpec& link = {});

/// 1 / (1 + exp(-z)), evaluated without overflow for large |z|.
double logistic(double z);

/// Applies the link to a target value (identity passes through).
double apply_link(double value, const LinkSpec& link);

struct FitInfo {
  std::size_t n_samples = 0;
  double in_sample_nrmsd = 0.0;
  std::optional<double> holdout_nrmsd;
  double svd_cutoff = 0.0;
  std::size_t rank = 0;
  std::uint64_t seed = 0;
  LinkKind target_link = LinkKind::identity;
};

/// Polynomial chaos expansion: coefficients over an orthonormal basis whose
/// coordinates are the standardized parameters of `space`.
struct Surrogate {
  BasisSet basis;
  ParameterSpace space;
  std::vector<double> coeffs;
  FitInfo fit_info;
};

/// Row i holds every basis function at the standardized i-th sample.
Eigen::MatrixXd design_matrix(const BasisSet& basis, const ParameterSpace& space, const SampleMatrix& samples);

/// Least-squares coefficients through the Moore-Penrose pseudoinverse.
///
/// The pseudoinverse comes from a thin SVD of the design matrix; singular
/// values below eps * max(n, |A|) * sigma_max are treated as zero, which
/// yields the minimum-norm solution when the system is underdetermined.
/// With n >= 50 a seeded 10% holdout fit is also scored and recorded in
/// fit_info.holdout_nrmsd; the returned coefficients always use every row.
Surrogate fit(const BasisSet& basis, const ParameterSpace& space, const SampleMatrix& samples,
              std::span<const double> y, LinkKind target_link = LinkKind::identity);

/// Surrogate value at a physical-unit point. Points outside the parameter
/// limits are rejected rather than extrapolated.
double predict(const Surrogate& s, std::span<const double> xi_phys);

/// Predictions at every sample row.
std::vector<double> predict_all(const Surrogate& s, const SampleMatrix& samples);

/// RMS prediction error divided by the RMS of the data.
double nrmsd(const Surrogate& s, const SampleMatrix& samples, std::span<const double> y);

void save_surrogate(const std::filesystem::path& path, const Surrogate& s, const std::string& digest = {});
Surrogate load_surrogate(const std::filesystem::path& path, std::string* digest = nullptr);

}  // namespace gpcsense
