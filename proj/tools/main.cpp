// gpcsense command-line front end.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gpcsense/benchmarks.hpp"
#include "gpcsense/error.hpp"
#include "gpcsense/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gpcsense;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitEvaluator = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "Output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "Random seed (overrides config)");
}

pipeline::RunConfig load(const CommonOptions& opts) {
  std::optional<fs::path> out;
  if (opts.out) out = fs::path(*opts.out);
  return pipeline::load_config(opts.config, opts.seed, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial chaos sensitivity analysis of black-box classifiers"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string samples_path;
  std::string image_path;
  std::string input_path;
  std::string evaluations_path;
  std::string surrogate_path;
  std::string out_dir = ".";
  std::string output_path = "grid.csv";
  pipeline::GridRequest grid;
  std::string grid_scale = "logit";
  std::vector<std::string> fixed;
  std::string bench_name;
  std::size_t bench_n = 1500;
  unsigned bench_order = 8;
  std::uint64_t bench_seed = 20240601;

  auto* sample_cmd = app.add_subcommand("sample", "Draw a Latin hypercube design and write samples.csv");
  add_common(sample_cmd, common);

  auto* transform_cmd = app.add_subcommand("transform", "Apply the perturbations to the input image per sample");
  add_common(transform_cmd, common);
  transform_cmd->add_option("--samples", samples_path, "samples.csv (default: <out>/samples.csv)");
  transform_cmd->add_option("--image", image_path, "Input image (default: config 'image')");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Query the black-box model");
  add_common(evaluate_cmd, common);
  evaluate_cmd->add_option("--input", input_path, "manifest.csv (image mode) or samples.csv (numeric mode)");

  auto* fit_cmd = app.add_subcommand("fit", "Fit the polynomial chaos surrogate");
  add_common(fit_cmd, common);
  fit_cmd->add_option("--samples", samples_path, "samples.csv (default: <out>/samples.csv)");
  fit_cmd->add_option("--evaluations", evaluations_path, "evaluations.csv (default: <out>/evaluations.csv)");

  auto* sobol_cmd = app.add_subcommand("sobol", "Sobol indices of a fitted surrogate");
  sobol_cmd->add_option("--surrogate", surrogate_path, "surrogate.json")->required()->check(CLI::ExistingFile);
  sobol_cmd->add_option("--samples", samples_path, "Cross-check the config digest against this samples.csv");
  sobol_cmd->add_option("--out", out_dir, "Directory for sobol.csv and sobol.json");

  auto* grid_cmd = app.add_subcommand("grid", "Evaluate the surrogate on a 2-D grid");
  grid_cmd->add_option("--surrogate", surrogate_path, "surrogate.json")->required()->check(CLI::ExistingFile);
  grid_cmd->add_option("--x", grid.var_x, "Parameter on the first axis")->required();
  grid_cmd->add_option("--y", grid.var_y, "Parameter on the second axis")->required();
  grid_cmd->add_option("--resolution", grid.resolution, "Points per axis")->capture_default_str();
  grid_cmd->add_option("--fix", fixed, "name=value for a remaining parameter (default: midpoint)");
  grid_cmd->add_option("--scale", grid_scale, "logit or probability")->capture_default_str();
  grid_cmd->add_option("--output", output_path, "Output CSV")->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline");
  add_common(run_cmd, common);

  auto* bench_cmd = app.add_subcommand("benchmark", "Compare estimated and analytic indices of a test function");
  bench_cmd->add_option("name", bench_name, "ishigami or gfunction")
      ->required()
      ->check(CLI::IsMember({"ishigami", "gfunction"}));
  bench_cmd->add_option("--n", bench_n, "Number of LHS samples")->capture_default_str();
  bench_cmd->add_option("--order", bench_order, "Maximum total polynomial order")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (sample_cmd->parsed()) {
      pipeline::cmd_sample(load(common), std::cout);
    } else if (transform_cmd->parsed()) {
      const auto cfg = load(common);
      const fs::path samples = samples_path.empty() ? pipeline::Layout{cfg.output_dir}.samples() : fs::path(samples_path);
      pipeline::cmd_transform(cfg, samples, image_path.empty() ? cfg.image : fs::path(image_path), std::cout);
    } else if (evaluate_cmd->parsed()) {
      const auto cfg = load(common);
      const pipeline::Layout layout{cfg.output_dir};
      fs::path input = input_path;
      if (input.empty()) input = cfg.mode == EvalMode::image ? layout.manifest() : layout.samples();
      pipeline::cmd_evaluate(cfg, input, std::cout);
    } else if (fit_cmd->parsed()) {
      const auto cfg = load(common);
      const pipeline::Layout layout{cfg.output_dir};
      pipeline::cmd_fit(cfg, samples_path.empty() ? layout.samples() : fs::path(samples_path),
                        evaluations_path.empty() ? layout.evaluations() : fs::path(evaluations_path), std::cout);
    } else if (sobol_cmd->parsed()) {
      std::optional<fs::path> samples;
      if (!samples_path.empty()) samples = samples_path;
      pipeline::cmd_sobol(surrogate_path, out_dir, samples, std::cout);
    } else if (grid_cmd->parsed()) {
      grid.scale = pipeline::grid_scale_from_string(grid_scale);
      for (const auto& item : fixed) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("--fix expects name=value, got '" + item + "'");
        grid.fixed[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      }
      pipeline::cmd_grid(surrogate_path, grid, output_path, std::cout);
    } else if (run_cmd->parsed()) {
      pipeline::cmd_run(load(common), std::cout);
    } else if (bench_cmd->parsed()) {
      pipeline::print_benchmark(benchmarks::run(bench_name, bench_n, bench_order, bench_seed), std::cout);
    }
  } catch (const EvaluatorError& e) {
    std::cerr << "evaluator error: " << e.what() << '\n';
    return kExitEvaluator;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
