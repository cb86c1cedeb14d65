#include "gpcsense/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gpcsense/csv.hpp"
#include "gpcsense/error.hpp"
#include "json_io.hpp"

namespace gpcsense::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

GridScale grid_scale_from_string(const std::string& text) {
  if (text == "logit") return GridScale::logit;
  if (text == "probability") return GridScale::probability;
  throw ValidationError("unknown grid scale '" + text + "'");
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

namespace {

GridRequest grid_from_json(const json& j) {
  GridRequest request;
  request.var_x = j.at("x").get<std::string>();
  request.var_y = j.at("y").get<std::string>();
  request.resolution = j.value("resolution", std::size_t{50});
  if (j.contains("fixed")) request.fixed = j.at("fixed").get<std::map<std::string, double>>();
  request.scale = grid_scale_from_string(j.value("scale", std::string("logit")));
  return request;
}

json grid_to_json(const GridRequest& request) {
  return {{"x", request.var_x},
          {"y", request.var_y},
          {"resolution", request.resolution},
          {"fixed", request.fixed},
          {"scale", request.scale == GridScale::probability ? "probability" : "logit"}};
}

void validate_config(const RunConfig& cfg) {
  if (cfg.n_samples < 1) throw ValidationError("n_samples must be at least 1");
  // Building the basis checks the truncation against the dimension.
  build_basis(cfg.space.dimension(), cfg.space.jacobi_params(), cfg.truncation.max_total_order,
              cfg.truncation.max_order_per_dim);
  if (!(cfg.link.epsilon > 0.0 && cfg.link.epsilon < 0.5)) throw ValidationError("link_epsilon must lie in (0, 0.5)");
  if (cfg.mode == EvalMode::image) {
    if (cfg.image.empty()) throw ValidationError("image mode needs an 'image' path");
    if (!cfg.perturbations || cfg.perturbations->steps().empty()) {
      throw ValidationError("image mode needs at least one perturbation");
    }
    for (const auto& step : cfg.perturbations->steps()) cfg.space.index_of(step.parameter);
    if (cfg.evaluator.command.empty()) throw ValidationError("image mode needs an evaluator command");
    validate(cfg.evaluator);
    if (cfg.target_class >= cfg.evaluator.n_classes) throw ValidationError("target_class out of range for n_classes");
  } else {
    if (cfg.perturbations) throw ValidationError("numeric mode does not take perturbations");
    if (cfg.builtin.empty()) {
      validate(cfg.evaluator);
    } else {
      std::vector<double> probe(cfg.space.dimension(), 0.0);
      benchmarks::evaluate(cfg.builtin, probe);
    }
  }
  if (cfg.grid) validate(*cfg.grid, cfg.space);
}

}  // namespace

RunConfig parse_config(const std::string& text, const fs::path& base_dir, std::optional<std::uint64_t> seed_override,
                       std::optional<fs::path> out_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("version", 0) != kConfigVersion) {
      throw ValidationError("unsupported config version; expected " + std::to_string(kConfigVersion));
    }
    if (seed_override) doc["seed"] = *seed_override;

    RunConfig cfg;
    std::vector<RandomParameter> params;
    for (const auto& p : doc.at("parameters")) params.push_back(detail::parameter_from_json(p));
    cfg.space = ParameterSpace(std::move(params), doc.at("seed").get<std::uint64_t>());
    cfg.n_samples = doc.at("n_samples").get<std::size_t>();
    cfg.mode = eval_mode_from_string(doc.value("mode", std::string("numeric")));
    cfg.truncation = detail::truncation_from_json(doc.at("basis"));
    cfg.link = {cfg.mode == EvalMode::image ? LinkKind::logit : LinkKind::identity,
                doc.value("link_epsilon", 1e-6)};
    cfg.target_class = doc.value("target_class", std::size_t{0});

    if (doc.contains("image")) {
      const fs::path image = doc.at("image").get<std::string>();
      cfg.image = image.is_absolute() ? image : base_dir / image;
    }
    if (doc.contains("perturbations")) {
      std::vector<Perturbation> steps;
      for (const auto& step : doc.at("perturbations")) {
        steps.push_back({perturbation_kind_from_string(step.at("kind").get<std::string>()),
                         step.at("parameter").get<std::string>()});
      }
      WarpOptions options;
      if (doc.contains("warp")) {
        const json& warp = doc.at("warp");
        options.fill = warp.value("fill", std::uint8_t{0});
        if (warp.contains("focal_length") && !warp.at("focal_length").is_null()) {
          options.focal_length = warp.at("focal_length").get<double>();
        }
      }
      cfg.perturbations = PerturbationSpec(std::move(steps), options);
    }

    const json evaluator = doc.value("evaluator", json::object());
    cfg.builtin = evaluator.value("builtin", std::string());
    if (evaluator.contains("command")) cfg.evaluator.command = evaluator.at("command").get<std::vector<std::string>>();
    cfg.evaluator.mode = cfg.mode;
    cfg.evaluator.n_classes = evaluator.value("n_classes", std::size_t{2});
    cfg.evaluator.timeout = std::chrono::milliseconds(evaluator.value("timeout_ms", 30000));
    cfg.evaluator.max_inflight = evaluator.value("max_inflight", std::size_t{8});

    if (doc.contains("grid") && !doc.at("grid").is_null()) cfg.grid = grid_from_json(doc.at("grid"));

    cfg.output_dir = out_override ? *out_override : fs::path(doc.value("output_dir", std::string("out")));
    if (cfg.output_dir.is_relative() && !out_override) cfg.output_dir = base_dir / cfg.output_dir;

    validate_config(cfg);

    // Canonical form: every parsed setting, keys sorted, output_dir left out.
    json canonical = {{"version", kConfigVersion},
                      {"space", detail::space_to_json(cfg.space)},
                      {"n_samples", cfg.n_samples},
                      {"mode", to_string(cfg.mode)},
                      {"basis", detail::truncation_to_json(cfg.truncation)},
                      {"link_epsilon", cfg.link.epsilon},
                      {"target_class", cfg.target_class},
                      {"image", doc.value("image", std::string())},
                      {"builtin", cfg.builtin},
                      {"command", cfg.evaluator.command},
                      {"n_classes", cfg.evaluator.n_classes},
                      {"grid", cfg.grid ? grid_to_json(*cfg.grid) : json(nullptr)}};
    if (cfg.perturbations) {
      json steps = json::array();
      for (const auto& step : cfg.perturbations->steps()) {
        steps.push_back({{"kind", to_string(step.kind)}, {"parameter", step.parameter}});
      }
      canonical["perturbations"] = steps;
      canonical["warp"] = {{"fill", cfg.perturbations->options().fill},
                           {"focal_length", cfg.perturbations->options().focal_length
                                                ? json(*cfg.perturbations->options().focal_length)
                                                : json(nullptr)}};
    }
    cfg.digest = fnv1a_hex(canonical.dump());
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override,
                      std::optional<fs::path> out_override) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path(), seed_override, std::move(out_override));
}

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void check_names(const std::vector<std::string>& names, const ParameterSpace& space, const fs::path& source) {
  if (names != space.names()) {
    throw ValidationError("columns of " + source.string() + " do not match the configured parameters");
  }
}

void check_digest(const std::string& found, const std::string& expected, const fs::path& source) {
  if (!found.empty() && !expected.empty() && found != expected) {
    throw ValidationError("config digest of " + source.string() + " (" + found + ") does not match " + expected);
  }
}

std::string manifest_file_name(std::size_t index) { return "sample_" + std::to_string(index) + ".png"; }

}  // namespace

fs::path cmd_sample(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.output_dir};
  fs::create_directories(layout.root);
  const SampleMatrix samples = sample(cfg.space, cfg.n_samples);
  write_samples_csv(layout.samples(), samples, cfg.digest);
  log << "wrote " << samples.rows() << " samples to " << layout.samples().string() << '\n';
  return layout.samples();
}

fs::path cmd_transform(const RunConfig& cfg, const fs::path& samples_csv, const fs::path& image, std::ostream& log) {
  if (!cfg.perturbations) throw ValidationError("transform needs a perturbation list in the config");
  const Image source = read_png(image);
  std::string digest;
  const SampleMatrix samples = read_samples_csv(samples_csv, &digest);
  check_names(samples.names, cfg.space, samples_csv);
  check_digest(digest, cfg.digest, samples_csv);

  const Layout layout{cfg.output_dir};
  fs::create_directories(layout.transformed_dir());
  auto manifest = open_output(layout.manifest());
  manifest << "# config_digest=" << cfg.digest << '\n';
  std::vector<std::string> header{"index"};
  for (const auto& name : samples.names) header.push_back(name);
  header.push_back("file");
  manifest << csv::join(header) << '\n';

  for (std::size_t i = 0; i < samples.rows(); ++i) {
    std::map<std::string, double> xi;
    std::vector<std::string> fields{std::to_string(i)};
    for (std::size_t j = 0; j < samples.names.size(); ++j) {
      const double value = samples.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      xi[samples.names[j]] = value;
      fields.push_back(csv::format_double(value));
    }
    const std::string file = manifest_file_name(i);
    write_png(layout.transformed_dir() / file, apply(*cfg.perturbations, source, xi));
    fields.push_back(file);
    manifest << csv::join(fields) << '\n';
  }
  log << "wrote " << samples.rows() << " transformed images to " << layout.transformed_dir().string() << '\n';
  return layout.manifest();
}

fs::path cmd_evaluate(const RunConfig& cfg, const fs::path& input_csv, std::ostream& log) {
  const csv::Table table = csv::read(input_csv);
  check_digest(table.digest, cfg.digest, input_csv);
  const std::vector<std::string> names = cfg.space.names();

  std::vector<EvalRequest> requests;
  const bool has_index = !table.header.empty() && table.header.front() == "index";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    EvalRequest request;
    request.index = has_index ? static_cast<std::size_t>(csv::parse_int(row[table.column("index")])) : i;
    for (const auto& name : names) request.xi.push_back(csv::parse_double(row[table.column(name)]));
    if (cfg.mode == EvalMode::image) {
      request.path = fs::absolute(input_csv.parent_path() / row[table.column("file")]).string();
    }
    requests.push_back(std::move(request));
  }

  std::vector<EvalRecord> records;
  if (cfg.mode == EvalMode::numeric && !cfg.builtin.empty()) {
    for (const auto& request : requests) {
      EvalRecord record;
      record.index = request.index;
      record.xi_phys = request.xi;
      record.y = benchmarks::evaluate(cfg.builtin, request.xi);
      records.push_back(std::move(record));
    }
  } else {
    records = evaluate_batch(cfg.evaluator, requests);
  }
  if (cfg.mode == EvalMode::image) records = attach_logits(std::move(records), cfg.target_class, cfg.link);

  const Layout layout{cfg.output_dir};
  auto out = open_output(layout.evaluations());
  out << "# config_digest=" << cfg.digest << '\n';
  std::vector<std::string> header{"index"};
  for (const auto& name : names) header.push_back(name);
  if (cfg.mode == EvalMode::image) {
    for (std::size_t k = 0; k < cfg.evaluator.n_classes; ++k) header.push_back("prob_" + std::to_string(k));
    header.push_back("logit_value");
  } else {
    header.push_back("y");
  }
  out << csv::join(header) << '\n';
  for (const auto& record : records) {
    std::vector<std::string> fields{std::to_string(record.index)};
    for (double v : record.xi_phys) fields.push_back(csv::format_double(v));
    if (cfg.mode == EvalMode::image) {
      for (double p : record.probs) fields.push_back(csv::format_double(p));
      fields.push_back(csv::format_double(*record.logit_value));
    } else {
      fields.push_back(csv::format_double(*record.y));
    }
    out << csv::join(fields) << '\n';
  }
  log << "evaluated " << records.size() << " requests into " << layout.evaluations().string() << '\n';
  return layout.evaluations();
}

FitSummary cmd_fit(const RunConfig& cfg, const fs::path& samples_csv, const fs::path& evaluations_csv,
                   std::ostream& log) {
  std::string samples_digest;
  const SampleMatrix samples = read_samples_csv(samples_csv, &samples_digest);
  check_names(samples.names, cfg.space, samples_csv);
  check_digest(samples_digest, cfg.digest, samples_csv);
  const csv::Table evaluations = csv::read(evaluations_csv);
  check_digest(evaluations.digest, cfg.digest, evaluations_csv);
  if (evaluations.rows.size() != samples.rows()) {
    throw ValidationError("evaluations and samples have different row counts");
  }

  const bool image = cfg.mode == EvalMode::image;
  const std::size_t target_col = evaluations.column(image ? "logit_value" : "y");
  const std::size_t index_col = evaluations.column("index");
  std::vector<double> y;
  std::vector<double> probs;
  for (std::size_t i = 0; i < evaluations.rows.size(); ++i) {
    const auto& row = evaluations.rows[i];
    if (csv::parse_int(row[index_col]) != static_cast<long long>(i)) {
      throw ValidationError("evaluations row " + std::to_string(i) + " has index " + row[index_col]);
    }
    y.push_back(csv::parse_double(row[target_col]));
    if (image) probs.push_back(csv::parse_double(row[evaluations.column("prob_" + std::to_string(cfg.target_class))]));
  }

  const BasisSet basis = build_basis(cfg.space.dimension(), cfg.space.jacobi_params(), cfg.truncation.max_total_order,
                                     cfg.truncation.max_order_per_dim);
  FitSummary summary{fit(basis, cfg.space, samples, y, image ? LinkKind::logit : LinkKind::identity), std::nullopt};
  const Layout layout{cfg.output_dir};
  fs::create_directories(layout.root);
  save_surrogate(layout.surrogate(), summary.surrogate, cfg.digest);

  const FitInfo& info = summary.surrogate.fit_info;
  log << "basis terms: " << basis.size() << ", samples: " << info.n_samples << ", rank: " << info.rank << '\n';
  log << "in-sample nrmsd (" << to_string(info.target_link) << " scale): " << info.in_sample_nrmsd << '\n';
  if (info.holdout_nrmsd) log << "holdout nrmsd: " << *info.holdout_nrmsd << '\n';
  if (image) {
    const auto predicted = predict_all(summary.surrogate, samples);
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double diff = logistic(predicted[i]) - probs[i];
      err += diff * diff;
      ref += probs[i] * probs[i];
    }
    if (ref > 0.0) {
      summary.probability_nrmsd = std::sqrt(err / ref);
      log << "probability-scale nrmsd: " << *summary.probability_nrmsd << '\n';
    }
  }
  return summary;
}

SobolReport cmd_sobol(const fs::path& surrogate_json, const fs::path& out_dir,
                      const std::optional<fs::path>& samples_csv, std::ostream& log) {
  std::string digest;
  const Surrogate s = load_surrogate(surrogate_json, &digest);
  if (samples_csv) {
    std::string samples_digest;
    read_samples_csv(*samples_csv, &samples_digest);
    if (samples_digest != digest) {
      throw ValidationError("surrogate digest '" + digest + "' does not match samples digest '" + samples_digest + "'");
    }
  }
  const SobolReport report = compute_sobol(s);
  fs::create_directories(out_dir);
  write_sobol_csv(out_dir / "sobol.csv", report, digest);
  write_sobol_json(out_dir / "sobol.json", report, digest);

  log << "total variance: " << report.total_variance << '\n';
  for (const auto& entry : report.entries) {
    log << "  " << std::left << std::setw(32) << subset_label(entry.subset, report.names) << ' ' << entry.index << '\n';
  }
  return report;
}

void validate(const GridRequest& request, const ParameterSpace& space) {
  if (request.var_x == request.var_y) throw ValidationError("grid axes must be two different parameters");
  space.index_of(request.var_x);
  space.index_of(request.var_y);
  if (request.resolution < 1) throw ValidationError("grid resolution must be positive");
  for (const auto& [name, value] : request.fixed) {
    const auto& param = space.parameter(space.index_of(name));
    if (!(value >= param.lower && value <= param.upper)) {
      throw ValidationError("fixed value for '" + name + "' lies outside its limits");
    }
  }
}

fs::path cmd_grid(const fs::path& surrogate_json, const GridRequest& request, const fs::path& out_path,
                  std::ostream& log) {
  std::string digest;
  const Surrogate s = load_surrogate(surrogate_json, &digest);
  validate(request, s.space);
  const std::size_t ix = s.space.index_of(request.var_x);
  const std::size_t iy = s.space.index_of(request.var_y);

  std::vector<double> point(s.space.dimension());
  for (std::size_t j = 0; j < point.size(); ++j) {
    const auto& param = s.space.parameter(j);
    const auto it = request.fixed.find(param.name);
    point[j] = it != request.fixed.end() ? it->second : 0.5 * (param.lower + param.upper);
  }
  auto axis = [&](std::size_t dim, std::size_t k) {
    const auto& param = s.space.parameter(dim);
    if (request.resolution == 1) return 0.5 * (param.lower + param.upper);
    if (k + 1 == request.resolution) return param.upper;
    return param.lower + (param.upper - param.lower) * static_cast<double>(k) / static_cast<double>(request.resolution - 1);
  };

  auto out = open_output(out_path);
  if (!digest.empty()) out << "# config_digest=" << digest << '\n';
  out << request.var_x << ',' << request.var_y << ",value\n";
  for (std::size_t a = 0; a < request.resolution; ++a) {
    point[ix] = axis(ix, a);
    for (std::size_t b = 0; b < request.resolution; ++b) {
      point[iy] = axis(iy, b);
      double value = predict(s, point);
      if (request.scale == GridScale::probability) value = logistic(value);
      out << csv::format_double(point[ix]) << ',' << csv::format_double(point[iy]) << ',' << csv::format_double(value)
          << '\n';
    }
  }
  log << "wrote " << request.resolution * request.resolution << " grid points to " << out_path.string() << '\n';
  return out_path;
}

namespace {

void write_status(const Layout& layout, const std::string& digest, const std::string& status,
                  const std::vector<std::string>& completed, const std::string& failed_stage = {},
                  const std::string& error = {}) {
  json doc = {{"config_digest", digest}, {"status", status}, {"completed_stages", completed}};
  if (!failed_stage.empty()) {
    doc["failed_stage"] = failed_stage;
    doc["error"] = error;
  }
  detail::write_json(layout.status(), doc);
}

}  // namespace

void cmd_run(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.output_dir};
  fs::create_directories(layout.root);
  std::vector<std::string> completed;
  std::string stage;
  write_status(layout, cfg.digest, "running", completed);
  try {
    stage = "sample";
    const fs::path samples = cmd_sample(cfg, log);
    completed.push_back(stage);

    fs::path eval_input = samples;
    if (cfg.mode == EvalMode::image) {
      stage = "transform";
      eval_input = cmd_transform(cfg, samples, cfg.image, log);
      completed.push_back(stage);
    }

    stage = "evaluate";
    const fs::path evaluations = cmd_evaluate(cfg, eval_input, log);
    completed.push_back(stage);

    stage = "fit";
    const FitSummary fitted = cmd_fit(cfg, samples, evaluations, log);
    completed.push_back(stage);

    stage = "sobol";
    const SobolReport report = cmd_sobol(layout.surrogate(), layout.root, samples, log);
    completed.push_back(stage);

    if (cfg.grid) {
      stage = "grid";
      cmd_grid(layout.surrogate(), *cfg.grid, layout.grid(), log);
      completed.push_back(stage);
    }

    const FitInfo& info = fitted.surrogate.fit_info;
    json top = json::array();
    for (std::size_t k = 0; k < report.entries.size() && k < 10; ++k) {
      top.push_back({{"subset", subset_label(report.entries[k].subset, report.names)},
                     {"S_tau", report.entries[k].index}});
    }
    detail::write_json(layout.summary(),
                       {{"config_digest", cfg.digest},
                        {"mode", to_string(cfg.mode)},
                        {"n_samples", info.n_samples},
                        {"basis_terms", fitted.surrogate.basis.size()},
                        {"rank", info.rank},
                        {"target_link", to_string(info.target_link)},
                        {"in_sample_nrmsd", info.in_sample_nrmsd},
                        {"holdout_nrmsd", info.holdout_nrmsd ? json(*info.holdout_nrmsd) : json(nullptr)},
                        {"probability_nrmsd",
                         fitted.probability_nrmsd ? json(*fitted.probability_nrmsd) : json(nullptr)},
                        {"total_variance", report.total_variance},
                        {"top_indices", top}});
    completed.push_back("summary");
    write_status(layout, cfg.digest, "complete", completed);
  } catch (const std::exception& e) {
    write_status(layout, cfg.digest, "failed", completed, stage, e.what());
    throw;
  }
}

void print_benchmark(const benchmarks::BenchmarkResult& result, std::ostream& out) {
  out << "benchmark " << result.name << ": " << result.basis_size << " basis terms, in-sample nrmsd "
      << result.in_sample_nrmsd << '\n';
  out << std::left << std::setw(16) << "subset" << std::right << std::setw(12) << "estimated" << std::setw(12)
      << "analytic" << std::setw(12) << "abs dev" << '\n';
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(5);
  for (const auto& row : result.rows) {
    out << std::left << std::setw(16) << subset_label(row.subset, result.names) << std::right << std::setw(12)
        << row.estimated << std::setw(12) << row.analytic << std::setw(12) << std::abs(row.deviation()) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace gpcsense::pipeline
