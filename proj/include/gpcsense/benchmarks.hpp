#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gpcsense/randomspace.hpp"
#include "gpcsense/sobol.hpp"

namespace gpcsense::benchmarks {

/// sin x1 + a sin^2 x2 + b x3^4 sin x1 with a = 7, b = 0.1.
double ishigami(std::span<const double> xi);

/// Sobol g-function prod (|4 x_i - 2| + a_i) / (1 + a_i) with a = (0, 1, 4.5, 9).
double gfunction(std::span<const double> xi);

/// Uniform parameter spaces the two functions are defined on.
ParameterSpace ishigami_space(std::uint64_t seed);
ParameterSpace gfunction_space(std::uint64_t seed);

/// Closed-form Sobol indices for every non-empty subset of inputs.
std::map<Subset, double> ishigami_indices();
std::map<Subset, double> gfunction_indices();

/// Evaluates a named built-in function ("ishigami" or "gfunction").
double evaluate(const std::string& name, std::span<const double> xi);
bool is_builtin(const std::string& name);

struct ComparisonRow {
  Subset subset;
  double estimated = 0.0;
  double analytic = 0.0;
  double deviation() const { return estimated - analytic; }
};

struct BenchmarkResult {
  std::string name;
  std::vector<std::string> names;
  std::vector<ComparisonRow> rows;  // every non-empty subset, lexicographic
  double in_sample_nrmsd = 0.0;
  std::size_t basis_size = 0;
  SobolReport report;
};

/// Fits an order-`order` total-degree Legendre surrogate to `n` LHS samples of
/// the named function and compares its Sobol indices with the analytic ones.
BenchmarkResult run(const std::string& name, std::size_t n, unsigned order, std::uint64_t seed);

}  // namespace gpcsense::benchmarks
