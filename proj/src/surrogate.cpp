#include "gpcsense/surrogate.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "gpcsense/error.hpp"
#include "json_io.hpp"

namespace gpcsense {

using nlohmann::json;

std::string to_string(LinkKind kind) { return kind == LinkKind::logit ? "logit" : "identity"; }

LinkKind link_kind_from_string(const std::string& text) {
  if (text == "logit") return LinkKind::logit;
  if (text == "identity") return LinkKind::identity;
  throw ValidationError("unknown link '" + text + "'");
}

double logit(double p, const LinkSpec& link) {
  if (!(link.epsilon > 0.0 && link.epsilon < 0.5)) throw ValidationError("logit clamp epsilon must lie in (0, 0.5)");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("logit argument outside [0, 1]: " + std::to_string(p));
  const double clamped = std::clamp(p, link.epsilon, 1.0 - link.epsilon);
  return std::log(clamped / (1.0 - clamped));
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double apply_link(double value, const LinkSpec& link) {
  return link.kind == LinkKind::logit ? logit(value, link) : value;
}

Eigen::MatrixXd design_matrix(const BasisSet& basis, const ParameterSpace& space, const SampleMatrix& samples) {
  if (basis.dimension() != space.dimension() || static_cast<std::size_t>(samples.values.cols()) != space.dimension()) {
    throw ValidationError("basis, parameter space and samples disagree on dimension");
  }
  Eigen::MatrixXd matrix(samples.values.rows(), static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < samples.values.rows(); ++i) {
    const auto row = samples.row(static_cast<std::size_t>(i));
    const auto values = eval_multivariate(basis, standardize(space, row));
    for (std::size_t k = 0; k < values.size(); ++k) matrix(i, static_cast<Eigen::Index>(k)) = values[k];
  }
  return matrix;
}

namespace {

struct Solution {
  Eigen::VectorXd coeffs;
  double cutoff = 0.0;
  std::size_t rank = 0;
};

Solution solve_pseudoinverse(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() ? sigma(0) : 0.0;
  if (!(sigma_max > 0.0)) throw DegenerateError("design matrix is identically zero");
  const double rcond =
      std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(a.rows(), a.cols()));
  Solution out;
  out.cutoff = rcond * sigma_max;
  Eigen::VectorXd projected = svd.matrixU().transpose() * y;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (sigma(k) > out.cutoff) {
      projected(k) /= sigma(k);
      ++out.rank;
    } else {
      projected(k) = 0.0;
    }
  }
  out.coeffs = svd.matrixV() * projected;
  return out;
}

SampleMatrix select_rows(const SampleMatrix& samples, const std::vector<std::size_t>& rows) {
  SampleMatrix out{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), samples.values.cols()), samples.names};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = samples.values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

constexpr std::size_t kHoldoutMinSamples = 50;

}  // namespace

Surrogate fit(const BasisSet& basis, const ParameterSpace& space, const SampleMatrix& samples,
              std::span<const double> y, LinkKind target_link) {
  const std::size_t n = samples.rows();
  if (n == 0) throw ValidationError("fit needs at least one sample");
  if (y.size() != n) {
    throw ValidationError("fit got " + std::to_string(y.size()) + " targets for " + std::to_string(n) + " samples");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) throw ValidationError("non-finite fit target at row " + std::to_string(i));
  }

  const Eigen::MatrixXd a = design_matrix(basis, space, samples);
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  const Solution solution = solve_pseudoinverse(a, target);

  Surrogate s{basis, space, std::vector<double>(solution.coeffs.data(), solution.coeffs.data() + solution.coeffs.size()),
              FitInfo{}};
  for (double c : s.coeffs) {
    if (!std::isfinite(c)) throw DegenerateError("fit produced non-finite coefficients");
  }
  s.fit_info.n_samples = n;
  s.fit_info.svd_cutoff = solution.cutoff;
  s.fit_info.rank = solution.rank;
  s.fit_info.seed = space.seed();
  s.fit_info.target_link = target_link;

  const bool all_zero = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  s.fit_info.in_sample_nrmsd = all_zero ? 0.0 : nrmsd(s, samples, y);

  if (n >= kHoldoutMinSamples) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(space.seed() ^ 0x686F6C646F7574ull);
    for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng() % k]);
    const std::size_t n_holdout = n / 10;
    std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_holdout));
    std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(n_holdout), order.end());
    std::sort(held.begin(), held.end());
    std::sort(kept.begin(), kept.end());

    Eigen::VectorXd kept_y(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) kept_y(static_cast<Eigen::Index>(i)) = y[kept[i]];
    std::vector<double> held_y;
    for (std::size_t idx : held) held_y.push_back(y[idx]);

    const bool held_zero = std::all_of(held_y.begin(), held_y.end(), [](double v) { return v == 0.0; });
    if (!held_zero) {
      const Eigen::MatrixXd kept_a = design_matrix(basis, space, select_rows(samples, kept));
      const Solution partial = solve_pseudoinverse(kept_a, kept_y);
      Surrogate trial{basis, space,
                      std::vector<double>(partial.coeffs.data(), partial.coeffs.data() + partial.coeffs.size()),
                      FitInfo{}};
      s.fit_info.holdout_nrmsd = nrmsd(trial, select_rows(samples, held), held_y);
    }
  }
  return s;
}

double predict(const Surrogate& s, std::span<const double> xi_phys) {
  const auto values = eval_multivariate(s.basis, standardize(s.space, xi_phys));
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) sum += s.coeffs[k] * values[k];
  return sum;
}

std::vector<double> predict_all(const Surrogate& s, const SampleMatrix& samples) {
  std::vector<double> out(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) out[i] = predict(s, samples.row(i));
  return out;
}

double nrmsd(const Surrogate& s, const SampleMatrix& samples, std::span<const double> y) {
  if (y.size() != samples.rows() || y.empty()) throw ValidationError("nrmsd needs one target per sample");
  const auto predicted = predict_all(s, samples);
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    err += (y[i] - predicted[i]) * (y[i] - predicted[i]);
    ref += y[i] * y[i];
  }
  if (ref == 0.0) throw DegenerateError("nrmsd undefined: all targets are zero");
  return std::sqrt(err / static_cast<double>(y.size())) / std::sqrt(ref / static_cast<double>(y.size()));
}

void save_surrogate(const std::filesystem::path& path, const Surrogate& s, const std::string& digest) {
  json indices = json::array();
  for (const auto& index : s.basis.indices()) indices.push_back(index);
  json params = json::array();
  for (const auto& p : s.basis.params()) params.push_back({{"alpha", p.alpha}, {"beta", p.beta}});
  json info = {{"n_samples", s.fit_info.n_samples},
               {"in_sample_nrmsd", s.fit_info.in_sample_nrmsd},
               {"holdout_nrmsd", s.fit_info.holdout_nrmsd ? json(*s.fit_info.holdout_nrmsd) : json(nullptr)},
               {"svd_cutoff", s.fit_info.svd_cutoff},
               {"rank", s.fit_info.rank},
               {"seed", s.fit_info.seed},
               {"target_link", to_string(s.fit_info.target_link)}};
  json doc = {{"format", "gpcsense-surrogate"},
              {"version", 1},
              {"config_digest", digest},
              {"space", detail::space_to_json(s.space)},
              {"jacobi_params", params},
              {"truncation", detail::truncation_to_json(s.basis.truncation())},
              {"multi_indices", indices},
              {"coefficients", s.coeffs},
              {"fit_info", info}};
  detail::write_json(path, doc);
}

Surrogate load_surrogate(const std::filesystem::path& path, std::string* digest) {
  const json doc = detail::read_json(path);
  try {
    if (doc.at("format") != "gpcsense-surrogate" || doc.at("version") != 1) {
      throw ValidationError("unsupported surrogate file format in " + path.string());
    }
    ParameterSpace space = detail::space_from_json(doc.at("space"));
    std::vector<JacobiParams> params;
    for (const auto& p : doc.at("jacobi_params")) params.push_back({p.at("alpha").get<double>(), p.at("beta").get<double>()});
    if (params.size() != space.dimension()) throw ValidationError("surrogate Jacobi parameters do not match the space");
    BasisSet basis(std::move(params), detail::truncation_from_json(doc.at("truncation")),
                   doc.at("multi_indices").get<std::vector<MultiIndex>>());
    auto coeffs = doc.at("coefficients").get<std::vector<double>>();
    if (coeffs.size() != basis.size()) throw ValidationError("coefficient count does not match basis size");
    const json& info = doc.at("fit_info");
    FitInfo fit_info;
    fit_info.n_samples = info.at("n_samples").get<std::size_t>();
    fit_info.in_sample_nrmsd = info.at("in_sample_nrmsd").get<double>();
    if (!info.at("holdout_nrmsd").is_null()) fit_info.holdout_nrmsd = info.at("holdout_nrmsd").get<double>();
    fit_info.svd_cutoff = info.at("svd_cutoff").get<double>();
    fit_info.rank = info.at("rank").get<std::size_t>();
    fit_info.seed = info.at("seed").get<std::uint64_t>();
    fit_info.target_link = link_kind_from_string(info.at("target_link").get<std::string>());
    if (digest) *digest = doc.value("config_digest", "");
    return Surrogate{std::move(basis), std::move(space), std::move(coeffs), fit_info};
  } catch (const json::exception& e) {
    throw ValidationError("malformed surrogate file " + path.string() + ": " + e.what());
  }
}

}  // namespace gpcsense
