#include "gpcsense/randomspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <boost/math/special_functions/beta.hpp>

#include "gpcsense/csv.hpp"
#include "gpcsense/error.hpp"

namespace gpcsense {

ParameterSpace::ParameterSpace(std::vector<RandomParameter> parameters, std::uint64_t seed)
    : parameters_(std::move(parameters)), seed_(seed) {
  if (parameters_.empty()) throw ValidationError("parameter space needs at least one parameter");
  std::set<std::string> names;
  for (const auto& param : parameters_) {
    if (param.name.empty()) throw ValidationError("parameter name must not be empty");
    if (!names.insert(param.name).second) throw ValidationError("duplicate parameter name '" + param.name + "'");
    if (!(param.p > 0.0) || !(param.q > 0.0) || !std::isfinite(param.p) || !std::isfinite(param.q)) {
      throw ValidationError("Beta shapes of '" + param.name + "' must be positive");
    }
    if (!(param.lower < param.upper) || !std::isfinite(param.lower) || !std::isfinite(param.upper)) {
      throw ValidationError("limits of '" + param.name + "' must satisfy lower < upper");
    }
  }
}

std::size_t ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (parameters_[i].name == name) return i;
  }
  throw ValidationError("unknown parameter '" + name + "'");
}

std::vector<std::string> ParameterSpace::names() const {
  std::vector<std::string> out;
  for (const auto& param : parameters_) out.push_back(param.name);
  return out;
}

std::vector<JacobiParams> ParameterSpace::jacobi_params() const {
  std::vector<JacobiParams> out;
  for (const auto& param : parameters_) out.push_back(param.jacobi());
  return out;
}

std::vector<double> SampleMatrix::row(std::size_t i) const {
  std::vector<double> out(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index j = 0; j < values.cols(); ++j) out[static_cast<std::size_t>(j)] = values(static_cast<Eigen::Index>(i), j);
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform on [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations so files match across platforms.
double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

}  // namespace

Eigen::MatrixXd lhs_unit(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw ValidationError("Latin hypercube needs n >= 1 and d >= 1");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> strata(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(j + 1)));
    for (std::size_t k = 0; k < n; ++k) strata[k] = k;
    for (std::size_t k = n; k > 1; --k) std::swap(strata[k - 1], strata[bounded(rng, k)]);
    for (std::size_t i = 0; i < n; ++i) {
      double u = (static_cast<double>(strata[i]) + unit_double(rng)) / static_cast<double>(n);
      // (k + r)/n can round up to the next stratum edge.
      u = std::min(u, std::nextafter((static_cast<double>(strata[i]) + 1.0) / static_cast<double>(n), 0.0));
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u;
    }
  }
  return design;
}

double beta_icdf(double u, double p, double q) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("beta_icdf probability outside [0, 1]");
  if (!(p > 0.0) || !(q > 0.0)) throw DomainError("beta_icdf shapes must be positive");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;

  constexpr int kMaxIterations = 400;
  constexpr double kTolerance = 1e-13;
  double lo = 0.0;
  double hi = 1.0;
  double x = p / (p + q);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const double residual = boost::math::ibeta(p, q, x) - u;
    if (residual == 0.0) return x;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double density = boost::math::ibeta_derivative(p, q, x);
    double next = (density > 0.0 && std::isfinite(density)) ? x - residual / density : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= kTolerance || hi - lo <= kTolerance) return next;
    x = next;
  }
  throw DegenerateError("beta_icdf did not converge for p=" + std::to_string(p) + ", q=" + std::to_string(q));
}

SampleMatrix sample(const ParameterSpace& space, std::size_t n) {
  const std::size_t d = space.dimension();
  const Eigen::MatrixXd unit = lhs_unit(n, d, space.seed());
  SampleMatrix out{Eigen::MatrixXd(unit.rows(), unit.cols()), space.names()};
  for (std::size_t j = 0; j < d; ++j) {
    const auto& param = space.parameter(j);
    const auto col = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
      const double x = beta_icdf(unit(i, col), param.p, param.q);
      out.values(i, col) = std::min(param.upper, param.lower + (param.upper - param.lower) * x);
    }
  }
  return out;
}

std::vector<double> standardize(const ParameterSpace& space, std::span<const double> xi_phys) {
  if (xi_phys.size() != space.dimension()) throw ValidationError("point dimension does not match parameter space");
  std::vector<double> out(xi_phys.size());
  for (std::size_t j = 0; j < xi_phys.size(); ++j) {
    const auto& param = space.parameter(j);
    const double slack = 1e-12 * (param.upper - param.lower);
    if (!(xi_phys[j] >= param.lower - slack && xi_phys[j] <= param.upper + slack)) {
      throw DomainError("value " + std::to_string(xi_phys[j]) + " of '" + param.name + "' outside [" +
                        std::to_string(param.lower) + ", " + std::to_string(param.upper) + "]");
    }
    out[j] = 2.0 * (xi_phys[j] - param.lower) / (param.upper - param.lower) - 1.0;
  }
  return out;
}

std::vector<double> destandardize(const ParameterSpace& space, std::span<const double> xi_std) {
  if (xi_std.size() != space.dimension()) throw ValidationError("point dimension does not match parameter space");
  std::vector<double> out(xi_std.size());
  for (std::size_t j = 0; j < xi_std.size(); ++j) {
    const auto& param = space.parameter(j);
    out[j] = param.lower + 0.5 * (xi_std[j] + 1.0) * (param.upper - param.lower);
  }
  return out;
}

void write_samples_csv(const std::filesystem::path& path, const SampleMatrix& samples, const std::string& digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  if (!digest.empty()) out << "# config_digest=" << digest << '\n';
  out << csv::join(samples.names) << '\n';
  for (Eigen::Index i = 0; i < samples.values.rows(); ++i) {
    std::vector<std::string> fields;
    for (Eigen::Index j = 0; j < samples.values.cols(); ++j) fields.push_back(csv::format_double(samples.values(i, j)));
    out << csv::join(fields) << '\n';
  }
}

SampleMatrix read_samples_csv(const std::filesystem::path& path, std::string* digest) {
  const csv::Table table = csv::read(path);
  if (table.rows.empty()) throw ValidationError("samples file " + path.string() + " has no rows");
  SampleMatrix out{Eigen::MatrixXd(static_cast<Eigen::Index>(table.rows.size()),
                                   static_cast<Eigen::Index>(table.header.size())),
                   table.header};
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = csv::parse_double(table.rows[i][j]);
    }
  }
  if (digest) *digest = table.digest;
  return out;
}

}  // namespace gpcsense
