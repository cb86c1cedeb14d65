#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpcsense/surrogate.hpp"

namespace gpcsense {

/// Sorted, non-empty set of zero-based dimension indices.
using Subset = std::vector<std::size_t>;

struct SobolEntry {
  Subset subset;
  double variance = 0.0;  // D_tau
  double index = 0.0;     // S_tau
};

struct SobolReport {
  std::vector<SobolEntry> entries;
  double total_variance = 0.0;
  /// Sum of S_tau over every subset containing variable i.
  std::vector<double> total_order;
  std::vector<std::string> names;

  /// Entry for a subset, or nullptr when the subset is not listed.
  const SobolEntry* find(const Subset& subset) const;
  /// S_tau, zero for unlisted subsets.
  double index_of(const Subset& subset) const;
};

/// Variance decomposition of an orthonormal expansion.
///
/// Every non-zero multi-index contributes c^2 to the subset of dimensions on
/// which it is non-zero; the total variance is the sum over all non-constant
/// terms. All subsets realizable under the basis truncation are listed, in
/// descending S order with lexicographic tie-breaks. Throws DegenerateError
/// for a surrogate with zero variance, or one whose standard deviation is
/// below 1e-12 of its mean.
SobolReport compute_sobol(const Surrogate& s);

/// True iff the indices sum to 1 within tol and each lies in [-tol, 1 + tol].
bool validate_report(const SobolReport& report, double tol);

/// "x1" style label joined by '*' (e.g. "rotation*tilt"); falls back to
/// 1-based positions when names are absent.
std::string subset_label(const Subset& subset, const std::vector<std::string>& names);

void write_sobol_csv(const std::filesystem::path& path, const SobolReport& report, const std::string& digest = {});
void write_sobol_json(const std::filesystem::path& path, const SobolReport& report, const std::string& digest = {});

}  // namespace gpcsense
