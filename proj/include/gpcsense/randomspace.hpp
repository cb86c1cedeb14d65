#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpcsense/basis.hpp"

namespace gpcsense {

/// One perturbation variable: Beta(p, q) scaled onto [lower, upper].
struct RandomParameter {
  std::string name;
  double p = 1.0;
  double q = 1.0;
  double lower = 0.0;
  double upper = 1.0;

  JacobiParams jacobi() const { return JacobiParams::from_beta_shapes(p, q); }
  bool operator==(const RandomParameter&) const = default;
};

class ParameterSpace {
 public:
  ParameterSpace(std::vector<RandomParameter> parameters, std::uint64_t seed);

  std::size_t dimension() const { return parameters_.size(); }
  const std::vector<RandomParameter>& parameters() const { return parameters_; }
  const RandomParameter& parameter(std::size_t i) const { return parameters_[i]; }
  std::uint64_t seed() const { return seed_; }

  /// Position of a named parameter; throws ValidationError when absent.
  std::size_t index_of(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<JacobiParams> jacobi_params() const;

  bool operator==(const ParameterSpace&) const = default;

 private:
  std::vector<RandomParameter> parameters_;
  std::uint64_t seed_;
};

/// n x d design in physical units, row-major in meaning: one row per sample.
struct SampleMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> names;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::vector<double> row(std::size_t i) const;
};

/// Latin hypercube design on [0, 1)^d: each column places exactly one point in
/// every stratum [k/n, (k+1)/n), at a uniform offset inside the stratum.
/// Column j is driven by its own generator seeded from (seed, j).
Eigen::MatrixXd lhs_unit(std::size_t n, std::size_t d, std::uint64_t seed);

/// Inverse of the regularized incomplete Beta function I_x(p, q).
double beta_icdf(double u, double p, double q);

SampleMatrix sample(const ParameterSpace& space, std::size_t n);

std::vector<double> standardize(const ParameterSpace& space, std::span<const double> xi_phys);
std::vector<double> destandardize(const ParameterSpace& space, std::span<const double> xi_std);

/// Writes the header row of parameter names followed by one row per sample,
/// values printed with 17 significant digits. When `digest` is non-empty a
/// leading `# config_digest=<digest>` comment line is emitted.
void write_samples_csv(const std::filesystem::path& path, const SampleMatrix& samples,
                       const std::string& digest = {});
SampleMatrix read_samples_csv(const std::filesystem::path& path, std::string* digest = nullptr);

}  // namespace gpcsense
