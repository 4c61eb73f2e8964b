#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "mfa/mfa.hpp"

namespace mfa::cli {
namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

Psf make_psf(double sigma, std::optional<int> radius) {
  return gaussian_psf(sigma, radius ? *radius : recommended_radius(sigma));
}

Rect parse_rect(const std::vector<int>& v) {
  if (v.size() != 4) throw DomainError("region needs 4 integers: row col height width");
  return {v[0], v[1], v[2], v[3]};
}

struct DegradeArgs {
  std::string in, out;
  double sigma_psf = 2.0;
  std::optional<int> radius;
  double noise_var = 0.0;
  std::uint64_t seed = 0;
  bool poisson = false;
};

struct RestoreArgs {
  std::string in, out, trace_out, snapshot_dir, snapshot_format = "pgm";
  double sigma_psf = 2.0;
  std::optional<int> radius;
  double noise_var = 0.0;
  double noise_scale = 1.0;
  std::optional<double> alpha, t0, t_final;
  double beta = 1.0;
  double decay = 0.9;
  int steps_per_temp = 2;
  int iters = 20;
  int snapshot_every = 0;
  bool backtrack = false;
  int stop_window = 0;
  double stop_epsilon = 1e-4;
};

struct WienerArgs {
  std::string in, out;
  double sigma_psf = 2.0;
  std::optional<int> radius;
  double noise_var = 0.0;
  std::optional<double> signal_power;
};

struct LineArgs {
  std::string in, orientation = "horizontal";
  double sigma_psf = 2.0;
  std::optional<int> radius;
  double end_margin = 0.1;
};

struct TrendArgs {
  std::string in;
  std::optional<double> predict;
  double sigma_min = 0.1;
};

void write_restoration(const Restoration& r, const RestoreArgs& a) {
  save(r.f_star, a.out);
  if (!a.trace_out.empty()) {
    std::ostringstream csv;
    write_trace_csv(r.trace, csv);
    write_text(a.trace_out, csv.str());
  }
  if (r.trace.snapshots.empty()) return;
  std::filesystem::path dir = a.snapshot_dir;
  if (dir.empty()) {
    const std::filesystem::path out(a.out);
    dir = out.parent_path() / (out.stem().string() + "_frames");
  }
  std::filesystem::create_directories(dir);
  const std::string ext = a.snapshot_format == "f64" ? ".f64" : ".pgm";
  for (const auto& [iteration, frame] : r.trace.snapshots) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d", iteration);
    save(frame, dir / (std::string(name) + ext));
  }
}

int restore(const RestoreArgs& a, std::ostream& out, std::ostream& err) {
  const ImageGrid g = load(a.in);
  const NoiseModel noise = NoiseModel(a.noise_var).rescaled(a.noise_scale);
  const Psf psf = make_psf(a.sigma_psf, a.radius);
  MfaParams p = default_mfa_params(g, noise);
  if (a.alpha) p.alpha = *a.alpha;
  p.beta = a.beta;
  if (a.t0) {
    p.schedule.t_initial = *a.t0;
    p.schedule.t_final = 0.05 * *a.t0;
  }
  if (a.t_final) p.schedule.t_final = *a.t_final;
  p.schedule.decay = a.decay;
  p.schedule.steps_per_temperature = a.steps_per_temp;
  p.max_iterations = a.iters;
  p.snapshot_every = a.snapshot_every;
  p.backtracking = a.backtrack;
  p.stop_window = a.stop_window;
  p.stop_epsilon = a.stop_epsilon;
  try {
    const Restoration r = anneal(g, psf, noise, p);
    write_restoration(r, a);
    out << "iterations," << r.trace.records.size() << "\n";
    return kSuccess;
  } catch (const AnnealDivergence& e) {
    if (!a.trace_out.empty()) {
      std::ostringstream csv;
      write_trace_csv(e.trace(), csv);
      write_text(a.trace_out, csv.str());
    }
    err << "error: restore " << e.what() << "\n";
    return kNumericalFailure;
  }
}

void add_psf_options(CLI::App* cmd, double& sigma, std::optional<int>& radius) {
  cmd->add_option("--sigma-psf", sigma, "Gaussian PSF standard deviation in pixels")->capture_default_str();
  cmd->add_option("--radius", radius, "PSF kernel radius (default ceil(3 sigma))");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream lines(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(lines, line)) {
    const std::size_t at = offset;
    offset += line.size() + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto sp = line.find_first_of(" \t");
    const std::string key = line.substr(0, sp);
    std::string value = sp == std::string::npos ? "" : line.substr(line.find_first_not_of(" \t", sp));
    if (!kv.emplace(key, value).second) throw ParseError("duplicate key '" + key + "'", at);
  }
  return kv;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean field annealing restoration of blurred, noisy planar images", "mfa"};
  app.require_subcommand(1);

  // phantom
  std::string phantom_spec, phantom_out;
  auto* phantom = app.add_subcommand("phantom", "Render a phantom spec to an image");
  phantom->add_option("spec", phantom_spec, "Phantom spec file")->required();
  phantom->add_option("--out", phantom_out, "Output image (.pgm or f64-raw)")->required();

  // degrade
  DegradeArgs deg;
  auto* degrade_cmd = app.add_subcommand("degrade", "Blur with a Gaussian PSF and add seeded noise");
  degrade_cmd->add_option("--in", deg.in)->required();
  degrade_cmd->add_option("--out", deg.out)->required();
  add_psf_options(degrade_cmd, deg.sigma_psf, deg.radius);
  degrade_cmd->add_option("--noise-var", deg.noise_var, "Gaussian noise variance")->required();
  degrade_cmd->add_option("--seed", deg.seed)->capture_default_str();
  degrade_cmd->add_flag("--poisson", deg.poisson, "Poisson counts instead of Gaussian noise");

  // restore
  RestoreArgs rs;
  auto* restore_cmd = app.add_subcommand("restore", "Mean field annealing restoration");
  restore_cmd->add_option("--in", rs.in)->required();
  restore_cmd->add_option("--out", rs.out)->required();
  add_psf_options(restore_cmd, rs.sigma_psf, rs.radius);
  restore_cmd->add_option("--noise-var", rs.noise_var, "Noise variance at calibration scale")->required();
  restore_cmd->add_option("--noise-scale", rs.noise_scale,
                          "Intensity scale of the input relative to the noise calibration")
      ->capture_default_str();
  restore_cmd->add_option("--alpha", rs.alpha, "Gradient step (default 0.5 * variance)");
  restore_cmd->add_option("--beta", rs.beta, "Prior weight")->capture_default_str();
  restore_cmd->add_option("--t0", rs.t0, "Initial temperature (default from the Lambda field)");
  restore_cmd->add_option("--t-final", rs.t_final, "Final temperature (default 0.05 * t0)");
  restore_cmd->add_option("--decay", rs.decay)->capture_default_str();
  restore_cmd->add_option("--steps-per-temp", rs.steps_per_temp)->capture_default_str();
  restore_cmd->add_option("--iters", rs.iters)->capture_default_str();
  restore_cmd->add_option("--snapshot-every", rs.snapshot_every)->capture_default_str();
  restore_cmd->add_option("--snapshot-dir", rs.snapshot_dir, "Frame directory (default <out>_frames)");
  restore_cmd->add_option("--snapshot-format", rs.snapshot_format)
      ->check(CLI::IsMember({"pgm", "f64"}))
      ->capture_default_str();
  restore_cmd->add_option("--trace-out", rs.trace_out, "Trace CSV");
  restore_cmd->add_flag("--backtrack", rs.backtrack, "Halve the step whenever the energy would rise");
  restore_cmd->add_option("--stop-window", rs.stop_window, "Stopping indicator window (0 = off)")
      ->capture_default_str();
  restore_cmd->add_option("--stop-epsilon", rs.stop_epsilon)->capture_default_str();

  // wiener
  WienerArgs wa;
  auto* wiener_cmd = app.add_subcommand("wiener", "Frequency-domain Wiener restoration");
  wiener_cmd->add_option("--in", wa.in)->required();
  wiener_cmd->add_option("--out", wa.out)->required();
  add_psf_options(wiener_cmd, wa.sigma_psf, wa.radius);
  wiener_cmd->add_option("--noise-var", wa.noise_var)->required();
  wiener_cmd->add_option("--signal-power", wa.signal_power, "Constant signal power (default: estimated)");

  // sharpen
  std::string sharpen_in, sharpen_out;
  int passes = 1;
  auto* sharpen_cmd = app.add_subcommand("sharpen", "Apply the 3x3 sharpening kernel");
  sharpen_cmd->add_option("--in", sharpen_in)->required();
  sharpen_cmd->add_option("--out", sharpen_out)->required();
  sharpen_cmd->add_option("--passes", passes)->capture_default_str();

  // sobel
  std::string sobel_in, sobel_out;
  auto* sobel_cmd = app.add_subcommand("sobel", "Sobel gradient magnitude");
  sobel_cmd->add_option("--in", sobel_in)->required();
  sobel_cmd->add_option("--out", sobel_out)->required();

  // psf-fit
  std::string fit_in;
  double fit_distance = 0.0;
  auto* fit_cmd = app.add_subcommand("psf-fit", "Fit a Gaussian to a point-source image");
  fit_cmd->add_option("--in", fit_in)->required();
  fit_cmd->add_option("--distance", fit_distance, "Source distance in cm, echoed to the CSV")->capture_default_str();

  // line-verify
  LineArgs la;
  auto* line_cmd = app.add_subcommand("line-verify", "Compare a line-source image with a PSF-blurred ideal line");
  line_cmd->add_option("--in", la.in)->required();
  add_psf_options(line_cmd, la.sigma_psf, la.radius);
  line_cmd->add_option("--orientation", la.orientation)
      ->check(CLI::IsMember({"horizontal", "vertical"}))
      ->capture_default_str();
  line_cmd->add_option("--end-margin", la.end_margin)->capture_default_str();

  // trend
  TrendArgs ta;
  auto* trend_cmd = app.add_subcommand("trend", "Fit sigma = slope * distance + intercept");
  trend_cmd->add_option("--in", ta.in, "CSV distance_cm,sigma[,fit_rmse]")->required();
  trend_cmd->add_option("--predict", ta.predict, "Distance (cm) to predict sigma at");
  trend_cmd->add_option("--sigma-min", ta.sigma_min)->capture_default_str();

  // noise
  std::string noise_in;
  std::vector<int> noise_region;
  auto* noise_cmd = app.add_subcommand("noise", "Estimate noise variance from a flood image");
  noise_cmd->add_option("--in", noise_in)->required();
  noise_cmd->add_option("--region", noise_region, "row col height width (default whole image)")->expected(4);

  // metrics
  std::string metrics_a, metrics_b;
  std::optional<double> peak;
  auto* metrics_cmd = app.add_subcommand("metrics", "RMSE and PSNR of --a against reference --b");
  metrics_cmd->add_option("--a", metrics_a)->required();
  metrics_cmd->add_option("--b", metrics_b)->required();
  metrics_cmd->add_option("--peak", peak, "PSNR peak (default: max of --b)");

  // pipeline
  std::string manifest;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run a phantom-to-metrics experiment from a manifest");
  pipeline_cmd->add_option("manifest", manifest)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "error: " << e.what() << "\n" << "run 'mfa --help' for usage\n";
    return kUsageError;
  }

  try {
    if (*phantom) {
      save(render_phantom(load_phantom_spec(phantom_spec)), phantom_out);
    } else if (*degrade_cmd) {
      const ImageGrid ideal = load(deg.in);
      save(degrade(ideal, make_psf(deg.sigma_psf, deg.radius), NoiseModel(deg.noise_var), deg.seed,
                   deg.poisson ? NoiseKind::Poisson : NoiseKind::Gaussian),
           deg.out);
    } else if (*restore_cmd) {
      return restore(rs, out, err);
    } else if (*wiener_cmd) {
      WienerOptions opts;
      opts.signal_power = wa.signal_power;
      save(wiener(load(wa.in), make_psf(wa.sigma_psf, wa.radius), NoiseModel(wa.noise_var), opts), wa.out);
    } else if (*sharpen_cmd) {
      save(sharpen(load(sharpen_in), passes), sharpen_out);
    } else if (*sobel_cmd) {
      save(sobel(load(sobel_in)), sobel_out);
    } else if (*fit_cmd) {
      const auto fit = fit_sigma_to_point_source(load(fit_in));
      out << format_depth_csv({{fit_distance, fit.sigma, fit.fit_rmse}});
    } else if (*line_cmd) {
      const double pct =
          verify_line_source(make_psf(la.sigma_psf, la.radius), load(la.in),
                             la.orientation == "vertical" ? LineOrientation::Vertical : LineOrientation::Horizontal,
                             {la.end_margin});
      out << format_metrics_csv({{"rmse_percent", pct}});
    } else if (*trend_cmd) {
      const auto t = fit_depth_trend(parse_depth_csv(read_text(ta.in)));
      std::vector<MetricRow> rows{{"slope", t.slope}, {"intercept", t.intercept}, {"fit_residual", t.fit_residual}};
      if (ta.predict) {
        const auto pred = predict_sigma(t, *ta.predict, ta.sigma_min);
        if (pred.warning) err << "warning: " << *pred.warning << "\n";
        rows.push_back({"predicted_sigma", pred.sigma});
      }
      out << format_metrics_csv(rows);
    } else if (*noise_cmd) {
      const ImageGrid flood = load(noise_in);
      const Rect region = noise_region.empty() ? Rect{0, 0, flood.height(), flood.width()} : parse_rect(noise_region);
      const NoiseModel nm = estimate_noise_variance(flood, region);
      out << format_metrics_csv({{"variance", nm.variance()}, {"measured_at_scale", nm.measured_at_scale()}});
    } else if (*metrics_cmd) {
      const ImageGrid a = load(metrics_a);
      const ImageGrid b = load(metrics_b);
      out << format_metrics_csv({{"rmse", rmse(a, b)}, {"psnr", peak ? psnr(a, b, *peak) : psnr(a, b)}});
    } else if (*pipeline_cmd) {
      run_pipeline(manifest, out);
    }
    return kSuccess;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const FitError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace mfa::cli
