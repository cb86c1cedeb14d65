#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpcsense/adapter.hpp"
#include "gpcsense/basis.hpp"
#include "gpcsense/benchmarks.hpp"
#include "gpcsense/perturb.hpp"
#include "gpcsense/randomspace.hpp"
#include "gpcsense/sobol.hpp"
#include "gpcsense/surrogate.hpp"

namespace gpcsense::pipeline {

enum class GridScale { logit, probability };

GridScale grid_scale_from_string(const std::string& text);

/// Surface export of a fitted surrogate over two parameters.
struct GridRequest {
  std::string var_x;
  std::string var_y;
  std::size_t resolution = 50;
  /// Values for the remaining parameters; unspecified ones sit at the midpoint.
  std::map<std::string, double> fixed;
  GridScale scale = GridScale::logit;
};

/// Parsed run configuration. The file grammar is documented in README.md.
struct RunConfig {
  ParameterSpace space{{{"x", 1, 1, 0, 1}}, 0};
  std::size_t n_samples = 1000;
  EvalMode mode = EvalMode::numeric;
  std::filesystem::path image;
  std::optional<PerturbationSpec> perturbations;
  EvaluatorConfig evaluator;
  /// In-process numeric function; empty means evaluator.command is used.
  std::string builtin;
  std::size_t target_class = 0;
  Truncation truncation;
  LinkSpec link;
  std::optional<GridRequest> grid;
  std::filesystem::path output_dir = "out";
  /// Hex FNV-1a digest of the canonical configuration (output_dir excluded).
  std::string digest;
};

constexpr int kConfigVersion = 1;

/// Parses a configuration document. Relative image paths resolve against
/// `base_dir`. Overrides replace the corresponding keys before the digest is
/// computed.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       std::optional<std::uint64_t> seed_override = std::nullopt,
                       std::optional<std::filesystem::path> out_override = std::nullopt);
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt,
                      std::optional<std::filesystem::path> out_override = std::nullopt);

/// Fixed artifact names inside the output directory.
struct Layout {
  std::filesystem::path root;
  std::filesystem::path samples() const { return root / "samples.csv"; }
  std::filesystem::path transformed_dir() const { return root / "transformed"; }
  std::filesystem::path manifest() const { return transformed_dir() / "manifest.csv"; }
  std::filesystem::path evaluations() const { return root / "evaluations.csv"; }
  std::filesystem::path surrogate() const { return root / "surrogate.json"; }
  std::filesystem::path sobol_csv() const { return root / "sobol.csv"; }
  std::filesystem::path sobol_json() const { return root / "sobol.json"; }
  std::filesystem::path grid() const { return root / "grid.csv"; }
  std::filesystem::path summary() const { return root / "summary.json"; }
  std::filesystem::path status() const { return root / "run_status.json"; }
};

std::filesystem::path cmd_sample(const RunConfig& cfg, std::ostream& log);

/// Writes one transformed PNG per sample row plus manifest.csv. The source
/// image is read before anything is written.
std::filesystem::path cmd_transform(const RunConfig& cfg, const std::filesystem::path& samples_csv,
                                    const std::filesystem::path& image, std::ostream& log);

/// Queries the model for every sample (numeric mode) or every manifest row
/// (image mode) and writes evaluations.csv.
std::filesystem::path cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& input_csv, std::ostream& log);

struct FitSummary {
  Surrogate surrogate;
  /// Error of logistic(prediction) against the target-class probability,
  /// image mode only.
  std::optional<double> probability_nrmsd;
};

/// Fits logit-space targets (image mode) or raw y (numeric mode).
FitSummary cmd_fit(const RunConfig& cfg, const std::filesystem::path& samples_csv,
                   const std::filesystem::path& evaluations_csv, std::ostream& log);

/// Sobol report of a stored surrogate. When `samples_csv` is given its
/// digest must match the surrogate's.
SobolReport cmd_sobol(const std::filesystem::path& surrogate_json, const std::filesystem::path& out_dir,
                      const std::optional<std::filesystem::path>& samples_csv, std::ostream& log);

void validate(const GridRequest& request, const ParameterSpace& space);

/// resolution^2 rows (x outer, y inner) of surrogate values on an evenly
/// spaced grid spanning both parameters' limits.
std::filesystem::path cmd_grid(const std::filesystem::path& surrogate_json, const GridRequest& request,
                               const std::filesystem::path& out_path, std::ostream& log);

/// sample -> transform (image mode) -> evaluate -> fit -> sobol -> grid -> summary.
/// On evaluator failure run_status.json records the failed stage and the
/// EvaluatorError is rethrown.
void cmd_run(const RunConfig& cfg, std::ostream& log);

void print_benchmark(const benchmarks::BenchmarkResult& result, std::ostream& out);

std::string fnv1a_hex(const std::string& data);

}  // namespace gpcsense::pipeline
