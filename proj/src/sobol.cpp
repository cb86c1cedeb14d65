#include "gpcsense/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "gpcsense/csv.hpp"
#include "gpcsense/error.hpp"
#include "json_io.hpp"

namespace gpcsense {

const SobolEntry* SobolReport::find(const Subset& subset) const {
  for (const auto& entry : entries) {
    if (entry.subset == subset) return &entry;
  }
  return nullptr;
}

double SobolReport::index_of(const Subset& subset) const {
  const SobolEntry* entry = find(subset);
  return entry ? entry->index : 0.0;
}

SobolReport compute_sobol(const Surrogate& s) {
  const BasisSet& basis = s.basis;
  if (s.coeffs.size() != basis.size()) throw ValidationError("coefficient count does not match basis size");

  std::map<Subset, double> variance_by_subset;
  double total = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    Subset support;
    const MultiIndex& index = basis.index(k);
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] > 0) support.push_back(i);
    }
    if (support.empty()) continue;
    const double contribution = s.coeffs[k] * s.coeffs[k];
    variance_by_subset[support] += contribution;
    total += contribution;
  }
  if (variance_by_subset.empty()) throw DegenerateError("surrogate has no non-constant basis terms");
  // A fit to constant data leaves round-off sized coefficients; treat a spread
  // below 1e-12 of the mean like an exact zero.
  if (!(total > 0.0) || std::sqrt(total) <= 1e-12 * std::abs(s.coeffs[0])) {
    throw DegenerateError("surrogate variance is zero; Sobol indices are undefined");
  }

  SobolReport report;
  report.total_variance = total;
  report.names = s.space.names();
  report.total_order.assign(basis.dimension(), 0.0);
  for (const auto& [subset, variance] : variance_by_subset) {
    const double index = variance / total;
    report.entries.push_back({subset, variance, index});
    for (std::size_t i : subset) report.total_order[i] += index;
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const SobolEntry& a, const SobolEntry& b) { return a.index > b.index; });
  return report;
}

bool validate_report(const SobolReport& report, double tol) {
  double sum = 0.0;
  for (const auto& entry : report.entries) {
    if (!(entry.index >= -tol && entry.index <= 1.0 + tol)) return false;
    sum += entry.index;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::string subset_label(const Subset& subset, const std::vector<std::string>& names) {
  std::string label;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (k) label += '*';
    const std::size_t i = subset[k];
    label += i < names.size() ? names[i] : "x" + std::to_string(i + 1);
  }
  return label;
}

void write_sobol_csv(const std::filesystem::path& path, const SobolReport& report, const std::string& digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  if (!digest.empty()) out << "# config_digest=" << digest << '\n';
  out << "subset,D_tau,S_tau\n";
  for (const auto& entry : report.entries) {
    out << subset_label(entry.subset, report.names) << ',' << csv::format_double(entry.variance) << ','
        << csv::format_double(entry.index) << '\n';
  }
}

void write_sobol_json(const std::filesystem::path& path, const SobolReport& report, const std::string& digest) {
  using nlohmann::json;
  json entries = json::array();
  for (const auto& entry : report.entries) {
    json names = json::array();
    for (std::size_t i : entry.subset) names.push_back(report.names.at(i));
    entries.push_back({{"subset", entry.subset},
                       {"names", names},
                       {"D_tau", entry.variance},
                       {"S_tau", entry.index}});
  }
  json total_order = json::object();
  for (std::size_t i = 0; i < report.total_order.size(); ++i) total_order[report.names.at(i)] = report.total_order[i];
  detail::write_json(path, {{"format", "gpcsense-sobol"},
                            {"version", 1},
                            {"config_digest", digest},
                            {"total_variance", report.total_variance},
                            {"entries", entries},
                            {"total_order", total_order}});
}

}  // namespace gpcsense
