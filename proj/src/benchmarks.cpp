#include "gpcsense/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "gpcsense/error.hpp"
#include "gpcsense/surrogate.hpp"

namespace gpcsense::benchmarks {

namespace {

constexpr double kIshigamiA = 7.0;
constexpr double kIshigamiB = 0.1;
constexpr std::array<double, 4> kGfunctionA = {0.0, 1.0, 4.5, 9.0};

std::vector<Subset> all_subsets(std::size_t d) {
  std::vector<Subset> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << d); ++mask) {
    Subset s;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask & (std::size_t{1} << i)) s.push_back(i);
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double ishigami(std::span<const double> xi) {
  if (xi.size() != 3) throw ValidationError("ishigami takes 3 inputs");
  const double s2 = std::sin(xi[1]);
  return std::sin(xi[0]) + kIshigamiA * s2 * s2 + kIshigamiB * std::pow(xi[2], 4) * std::sin(xi[0]);
}

double gfunction(std::span<const double> xi) {
  if (xi.size() != kGfunctionA.size()) throw ValidationError("gfunction takes 4 inputs");
  double product = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    product *= (std::abs(4.0 * xi[i] - 2.0) + kGfunctionA[i]) / (1.0 + kGfunctionA[i]);
  }
  return product;
}

ParameterSpace ishigami_space(std::uint64_t seed) {
  constexpr double pi = std::numbers::pi;
  return ParameterSpace({{"x1", 1, 1, -pi, pi}, {"x2", 1, 1, -pi, pi}, {"x3", 1, 1, -pi, pi}}, seed);
}

ParameterSpace gfunction_space(std::uint64_t seed) {
  return ParameterSpace({{"x1", 1, 1, 0, 1}, {"x2", 1, 1, 0, 1}, {"x3", 1, 1, 0, 1}, {"x4", 1, 1, 0, 1}}, seed);
}

std::map<Subset, double> ishigami_indices() {
  constexpr double a = kIshigamiA;
  constexpr double b = kIshigamiB;
  const double pi4 = std::pow(std::numbers::pi, 4);
  const double pi8 = pi4 * pi4;
  const double v1 = b * pi4 / 5.0 + b * b * pi8 / 50.0 + 0.5;
  const double v2 = a * a / 8.0;
  const double v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
  const double total = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
  std::map<Subset, double> out;
  for (const auto& s : all_subsets(3)) out[s] = 0.0;
  out[{0}] = v1 / total;
  out[{1}] = v2 / total;
  out[{0, 2}] = v13 / total;
  return out;
}

std::map<Subset, double> gfunction_indices() {
  std::vector<double> partial;
  double total = 1.0;
  for (double a : kGfunctionA) {
    partial.push_back((1.0 / 3.0) / ((1.0 + a) * (1.0 + a)));
    total *= 1.0 + partial.back();
  }
  total -= 1.0;
  std::map<Subset, double> out;
  for (const auto& s : all_subsets(kGfunctionA.size())) {
    double v = 1.0;
    for (std::size_t i : s) v *= partial[i];
    out[s] = v / total;
  }
  return out;
}

bool is_builtin(const std::string& name) { return name == "ishigami" || name == "gfunction"; }

double evaluate(const std::string& name, std::span<const double> xi) {
  if (name == "ishigami") return ishigami(xi);
  if (name == "gfunction") return gfunction(xi);
  throw ValidationError("unknown built-in function '" + name + "'");
}

BenchmarkResult run(const std::string& name, std::size_t n, unsigned order, std::uint64_t seed) {
  if (!is_builtin(name)) throw ValidationError("unknown benchmark '" + name + "'");
  const ParameterSpace space = name == "ishigami" ? ishigami_space(seed) : gfunction_space(seed);
  const auto analytic = name == "ishigami" ? ishigami_indices() : gfunction_indices();

  const SampleMatrix samples = sample(space, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = evaluate(name, samples.row(i));

  const BasisSet basis = build_basis(space.dimension(), space.jacobi_params(), order, std::nullopt);
  const Surrogate s = fit(basis, space, samples, y);

  BenchmarkResult result;
  result.name = name;
  result.names = space.names();
  result.report = compute_sobol(s);
  result.in_sample_nrmsd = s.fit_info.in_sample_nrmsd;
  result.basis_size = basis.size();
  for (const auto& [subset, value] : analytic) {
    result.rows.push_back({subset, result.report.index_of(subset), value});
  }
  return result;
}

}  // namespace gpcsense::benchmarks
