// Command-line front end: fit a report file, generate synthetic outbreaks,
// calibrate the observation link, or re-summarize saved particle snapshots.

#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epifilter/config.hpp"
#include "epifilter/data_io.hpp"
#include "epifilter/errors.hpp"
#include "epifilter/kdpf.hpp"
#include "epifilter/model.hpp"
#include "epifilter/observation.hpp"
#include "epifilter/simulator.hpp"
#include "epifilter/summary.hpp"

namespace {

using namespace epifilter;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDegeneracy = 2;
constexpr int kExitUsage = 64;

struct CommonOverrides {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> particles;
  std::optional<double> discount;
  std::optional<std::uint64_t> population;
  std::optional<int> workers;
  std::optional<double> sigma_i;
  std::optional<double> sigma_d;
};

// Applies one `--set dotted.key=value` override into the configuration tree.
// Values parse as JSON literals where possible, otherwise as strings.
void apply_set(nlohmann::json* root, const std::string& entry) {
  const std::size_t eq = entry.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--set: expected key=value, got '" + entry + "'");
  }
  const std::string key = entry.substr(0, eq);
  const std::string value = entry.substr(eq + 1);

  nlohmann::json* node = root;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= key.size(); ++k) {
    if (k == key.size() || key[k] == '.') {
      const std::string part = key.substr(start, k - start);
      if (part.empty()) throw ValidationError("--set: empty key component in '" + key + "'");
      if (k == key.size()) {
        nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
        (*node)[part] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      } else {
        node = &(*node)[part];
      }
      start = k + 1;
    }
  }
}

AppConfig resolve_config(const CommonOverrides& ov) {
  std::string path = ov.config_path;
  std::string origin = "<defaults>";
  if (path.empty()) {
    const char* env = std::getenv("EPIFILTER_CONFIG");
    if (env != nullptr && *env != '\0') path = env;
  }
  nlohmann::json root = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      root = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& err) {
      throw ValidationError(path + ": " + err.what());
    }
    origin = path;
  }
  for (const auto& entry : ov.sets) apply_set(&root, entry);

  AppConfig config = parse_config_text(root.dump(), origin);
  if (ov.seed) config.filter.seed = *ov.seed;
  if (ov.particles) config.filter.num_particles = *ov.particles;
  if (ov.discount) config.filter.discount = *ov.discount;
  if (ov.population) config.filter.population = *ov.population;
  if (ov.workers) config.filter.workers = *ov.workers;
  if (ov.sigma_i) config.link.sigma_i = *ov.sigma_i;
  if (ov.sigma_d) config.link.sigma_d = *ov.sigma_d;
  config.link.population = config.filter.population;
  config.priors.validate();
  config.filter.validate();
  if (!config.link.valid()) throw ValidationError("observation link constants must be positive");
  return config;
}

void add_common_flags(CLI::App* cmd, CommonOverrides* ov) {
  cmd->add_option("--config", ov->config_path,
                  "JSON configuration file (default: $EPIFILTER_CONFIG or shipped defaults)");
  cmd->add_option("--set", ov->sets,
                  "Override any configuration key, e.g. --set filter.resampling=systematic "
                  "or --set priors.parameters.beta.hi=0.5 (repeatable)");
  cmd->add_option("--seed", ov->seed, "Random seed");
  cmd->add_option("--particles", ov->particles, "Number of particles J");
  cmd->add_option("--discount", ov->discount, "Kernel discount factor in (1/3, 1)");
  cmd->add_option("--population", ov->population, "At-risk population P");
  cmd->add_option("--workers", ov->workers, "Worker threads (results do not depend on this)");
  cmd->add_option("--sigma-i", ov->sigma_i, "Log-scale observation sd, cases channel");
  cmd->add_option("--sigma-d", ov->sigma_d, "Log-scale observation sd, deaths channel");
}

std::vector<double> parse_quantiles(const std::string& text) {
  std::vector<double> probs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), p);
    if (ec != std::errc{} || ptr != item.data() + item.size() || p <= 0.0 || p >= 1.0) {
      throw ValidationError("--quantiles: expected comma-separated probabilities in (0,1)");
    }
    probs.push_back(p);
  }
  if (probs.empty()) throw ValidationError("--quantiles: empty list");
  return probs;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.good()) throw ValidationError("failed writing '" + path + "'");
}

// Deterministic latent trajectory at the prior means, used as the default
// regression design for link calibration when no latent file is supplied.
std::vector<LatentPoint> prior_mean_latents(const AppConfig& config, const ReportDataset& data) {
  const ParamVector theta = config.priors.mean_params();
  CompartmentState x = config.priors.mean_state();
  const double p = static_cast<double>(config.filter.population);
  std::vector<LatentPoint> latents;
  long day = data.records.front().day_index;
  std::size_t next = 0;
  for (; day <= data.horizon; ++day) {
    if (next < data.records.size() && data.records[next].day_index == day) {
      latents.push_back({day, p * (x.i + x.r), p * x.d});
      ++next;
    }
    x = deterministic_step(x, theta);
  }
  return latents;
}

std::vector<LatentPoint> load_latent_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open latent file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "day_index,latent_cases,latent_deaths") {
    throw ValidationError(path + ": expected header 'day_index,latent_cases,latent_deaths'");
  }
  std::vector<LatentPoint> latents;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LatentPoint point;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &point.day_index, &point.latent_cases,
                    &point.latent_deaths) != 3) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed latent row");
    }
    latents.push_back(point);
  }
  return latents;
}

nlohmann::json link_to_json(const ObservationLink& link) {
  nlohmann::json node;
  node["b_i"] = link.b_i;
  node["b_d"] = link.b_d;
  node["zeta_i"] = link.zeta_i;
  node["zeta_d"] = link.zeta_d;
  node["sigma_i"] = link.sigma_i;
  node["sigma_d"] = link.sigma_d;
  node["mode"] = link.mode == LinkMode::log_log ? "log-log" : "literal";
  return node;
}

int run_fit(const CommonOverrides& ov, const std::string& data_path, const std::string& out_dir,
            const std::string& quantiles_text, const std::string& snapshots_path,
            bool calibrate_link_first) {
  AppConfig config = resolve_config(ov);
  const ReportDataset data = parse_report_csv(data_path);
  const std::vector<double> probs = parse_quantiles(quantiles_text);

  if (calibrate_link_first) {
    config.link = calibrate_link(data.records, prior_mean_latents(config, data), config.link);
    std::cerr << "calibrated link: b_i=" << config.link.b_i << " zeta_i=" << config.link.zeta_i
              << " sigma_i=" << config.link.sigma_i << " b_d=" << config.link.b_d
              << " zeta_d=" << config.link.zeta_d << " sigma_d=" << config.link.sigma_d << "\n";
  }

  std::filesystem::create_directories(out_dir);
  SummaryAccumulator accumulator(probs, config.filter.population);
  const FilterResult result =
      run_filter(data.records, config.priors, config.link, config.filter,
                 [&](long day, bool observed, const ParticleEnsemble& ensemble) {
                   accumulator.add_day(day, observed, ensemble);
                 });
  const TrajectorySummary summary = accumulator.take();

  const auto out = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  write_text_file(out("state_trajectory.csv"), summary_slice_to_csv(summary, {0, 1, 2, 3, 4}));
  write_text_file(out("param_trajectory.csv"), summary_slice_to_csv(summary, {5, 6, 7, 8, 9}));
  write_text_file(out("r0_trajectory.csv"), summary_slice_to_csv(summary, {10}));

  nlohmann::json diag;
  {
    // Echo the effective configuration minus the worker count: results are
    // worker-independent by contract and the echo must be too.
    nlohmann::json cfg = nlohmann::json::parse(serialize_config(config));
    cfg["filter"].erase("workers");
    diag["config"] = std::move(cfg);
  }
  diag["data"] = data_path;
  diag["num_reports"] = data.records.size();
  diag["epoch"] = format_date(data.epoch);
  diag["horizon_days"] = data.horizon;
  nlohmann::json steps = nlohmann::json::array();
  long state_fallbacks = 0;
  long param_fallbacks = 0;
  for (const auto& step : result.diagnostics) {
    nlohmann::json s;
    s["day"] = step.day_index;
    s["generation"] = step.generation;
    s["ess"] = step.ess;
    s["state_fallbacks"] = step.state_fallbacks;
    s["param_fallbacks"] = step.param_fallbacks;
    s["kernel_collapsed"] = step.kernel_collapsed;
    steps.push_back(std::move(s));
    state_fallbacks += step.state_fallbacks;
    param_fallbacks += step.param_fallbacks;
    if (step.kernel_collapsed) {
      std::cerr << "warning: kernel covariance collapsed to zero at day " << step.day_index
                << "; parameter regeneration degenerated to the kernel means\n";
    }
  }
  diag["steps"] = std::move(steps);
  diag["total_state_fallbacks"] = state_fallbacks;
  diag["total_param_fallbacks"] = param_fallbacks;
  write_text_file(out("diagnostics.json"), diag.dump(2) + "\n");

  if (!snapshots_path.empty()) save_snapshots_csv(result.snapshots, snapshots_path);
  std::cerr << "fit: " << data.records.size() << " reports assimilated; outputs in " << out_dir
            << "\n";
  return kExitOk;
}

int run_simulate(const CommonOverrides& ov, int days, const std::string& out_path,
                 const std::string& latent_out, const std::string& epoch_text, int max_gap,
                 double noise_scale) {
  const AppConfig config = resolve_config(ov);
  SimulateOptions options;
  options.population = config.filter.population;
  options.noise_scale = noise_scale;
  options.rejection_cap = config.filter.rejection_cap;
  if (!epoch_text.empty()) options.epoch = parse_date(epoch_text);

  const ParamVector truth = config.priors.mean_params();
  const CompartmentState x0 = config.priors.mean_state();
  const std::vector<long> report_days = irregular_report_days(days, config.filter.seed, max_gap);
  const SyntheticRun run =
      simulate(truth, x0, days, report_days, config.link, config.filter.seed, options);
  write_report_csv(run.reports, out_path);

  if (!latent_out.empty()) {
    std::ostringstream out;
    out << "day_index,latent_cases,latent_deaths\n";
    const double p = static_cast<double>(options.population);
    for (std::size_t day = 0; day < run.latent.size(); ++day) {
      char cases[64], deaths[64];
      const auto rc = std::to_chars(cases, cases + sizeof cases,
                                    p * (run.latent[day].i + run.latent[day].r));
      const auto rd = std::to_chars(deaths, deaths + sizeof deaths, p * run.latent[day].d);
      out << day << ',' << std::string(cases, rc.ptr) << ',' << std::string(deaths, rd.ptr)
          << '\n';
    }
    write_text_file(latent_out, out.str());
  }
  std::cerr << "simulate: " << run.reports.records.size() << " reports over " << days
            << " days written to " << out_path << "\n";
  return kExitOk;
}

int run_calibrate(const CommonOverrides& ov, const std::string& data_path,
                  const std::string& latent_path, const std::string& out_path) {
  const AppConfig config = resolve_config(ov);
  const ReportDataset data = parse_report_csv(data_path);
  const std::vector<LatentPoint> latents =
      latent_path.empty() ? prior_mean_latents(config, data) : load_latent_csv(latent_path);
  const ObservationLink link = calibrate_link(data.records, latents, config.link);

  nlohmann::json root;
  root["observation"] = link_to_json(link);
  const std::string text = root.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
  return kExitOk;
}

int run_summarize(const std::string& snapshots_path, const std::string& quantiles_text,
                  const std::string& format_text, const std::string& out_path,
                  std::uint64_t population) {
  const std::vector<ParticleEnsemble> snapshots = load_snapshots_csv(snapshots_path);
  const std::vector<double> probs = parse_quantiles(quantiles_text);
  const TrajectorySummary summary = summarize(snapshots, probs, population);
  SummaryFormat format;
  if (format_text == "csv") {
    format = SummaryFormat::csv;
  } else if (format_text == "json") {
    format = SummaryFormat::json;
  } else {
    throw ValidationError("--format: must be 'csv' or 'json'");
  }
  export_summary(summary, format, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel density particle filter for stochastic SEIR epidemic models"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Run the filter on a cumulative report CSV");
  CommonOverrides fit_ov;
  std::string fit_data, fit_out = "out", fit_quantiles = "0.05,0.95", fit_snapshots;
  bool fit_calibrate = false;
  add_common_flags(fit, &fit_ov);
  fit->add_option("--data", fit_data, "Report CSV (date,cum_cases,cum_deaths)")->required();
  fit->add_option("--out", fit_out, "Output directory");
  fit->add_option("--quantiles", fit_quantiles, "Comma-separated quantile probabilities");
  fit->add_option("--save-snapshots", fit_snapshots, "Also save report-day particle snapshots");
  fit->add_flag("--calibrate-link", fit_calibrate,
                "Calibrate b/zeta/sigma against the prior-mean trajectory before filtering");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic outbreak dataset");
  CommonOverrides sim_ov;
  int sim_days = 120, sim_max_gap = 7;
  double sim_noise = 1.0;
  std::string sim_out = "synthetic.csv", sim_latent, sim_epoch;
  add_common_flags(sim, &sim_ov);
  sim->add_option("--days", sim_days, "Horizon in days")->required();
  sim->add_option("--out", sim_out, "Output report CSV");
  sim->add_option("--latent-out", sim_latent, "Also write the latent trajectory CSV");
  sim->add_option("--epoch", sim_epoch, "Calendar date of day 0 (YYYY-MM-DD)");
  sim->add_option("--max-gap", sim_max_gap, "Largest report gap in days");
  sim->add_option("--noise-scale", sim_noise, "Scales process and observation noise (0 = none)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit the observation link by log-log regression");
  CommonOverrides cal_ov;
  std::string cal_data, cal_latent, cal_out;
  add_common_flags(cal, &cal_ov);
  cal->add_option("--data", cal_data, "Report CSV")->required();
  cal->add_option("--latent", cal_latent,
                  "Latent trajectory CSV (day_index,latent_cases,latent_deaths); "
                  "default: deterministic prior-mean trajectory");
  cal->add_option("--out", cal_out, "Write the fitted link JSON here (default: stdout)");

  // summarize
  auto* sum = app.add_subcommand("summarize", "Re-summarize saved particle snapshots");
  std::string sum_snapshots, sum_quantiles = "0.05,0.95", sum_format = "csv", sum_out;
  std::uint64_t sum_population = 1000000;
  sum->add_option("--snapshots", sum_snapshots, "Snapshots CSV from fit --save-snapshots")
      ->required();
  sum->add_option("--quantiles", sum_quantiles, "Comma-separated quantile probabilities");
  sum->add_option("--format", sum_format, "Output format: csv or json");
  sum->add_option("--out", sum_out, "Output path")->required();
  sum->add_option("--population", sum_population, "Population used to scale state counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*fit) {
      return run_fit(fit_ov, fit_data, fit_out, fit_quantiles, fit_snapshots, fit_calibrate);
    }
    if (*sim) {
      return run_simulate(sim_ov, sim_days, sim_out, sim_latent, sim_epoch, sim_max_gap,
                          sim_noise);
    }
    if (*cal) return run_calibrate(cal_ov, cal_data, cal_latent, cal_out);
    if (*sum) {
      return run_summarize(sum_snapshots, sum_quantiles, sum_format, sum_out, sum_population);
    }
  } catch (const DegeneracyError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitDegeneracy;
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
