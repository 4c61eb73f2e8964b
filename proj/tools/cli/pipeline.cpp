#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "mfa/mfa.hpp"

namespace mfa::cli {
namespace {

class Manifest {
 public:
  explicit Manifest(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {
    static const std::set<std::string> known = {
        "phantom", "out_dir", "sigma_psf", "radius", "noise_var", "seed", "alpha", "beta", "t0",
        "decay", "steps_per_temp", "iters", "backtrack", "sharpen_passes", "wiener_signal_power"};
    for (const auto& [k, v] : kv_)
      if (!known.contains(k)) throw DomainError("pipeline manifest: unknown key '" + k + "'");
  }

  std::string text(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw DomainError("pipeline manifest: missing key '" + key + "'");
    return it->second;
  }

  template <typename T>
  std::optional<T> number(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    T v{};
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw DomainError("pipeline manifest: '" + key + "' is not a number: " + s);
    return v;
  }

  template <typename T>
  T number_or(const std::string& key, T fallback) const {
    return number<T>(key).value_or(fallback);
  }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace

void run_pipeline(const std::filesystem::path& manifest_path, std::ostream& out) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const Manifest m(parse_key_values(ss.str()));
  const auto base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  const auto out_dir = resolve(m.text("out_dir"));
  std::filesystem::create_directories(out_dir);

  const double sigma_psf = m.number_or("sigma_psf", 2.0);
  const Psf psf = gaussian_psf(sigma_psf, m.number_or("radius", recommended_radius(sigma_psf)));
  const auto noise_var = m.number<double>("noise_var");
  if (!noise_var) throw DomainError("pipeline manifest: missing key 'noise_var'");
  const NoiseModel noise(*noise_var);

  const ImageGrid ideal = render_phantom(load_phantom_spec(resolve(m.text("phantom"))));
  const ImageGrid degraded = degrade(ideal, psf, noise, m.number_or<std::uint64_t>("seed", 0));

  MfaParams p = default_mfa_params(degraded, noise);
  if (auto a = m.number<double>("alpha")) p.alpha = *a;
  p.beta = m.number_or("beta", 1.0);
  if (auto t0 = m.number<double>("t0")) {
    p.schedule.t_initial = *t0;
    p.schedule.t_final = 0.05 * *t0;
  }
  p.schedule.decay = m.number_or("decay", p.schedule.decay);
  p.schedule.steps_per_temperature = m.number_or("steps_per_temp", p.schedule.steps_per_temperature);
  p.max_iterations = m.number_or("iters", p.max_iterations);
  p.backtracking = m.number_or("backtrack", 0) != 0;
  const Restoration restored = anneal(degraded, psf, noise, p);

  WienerOptions wopts;
  wopts.signal_power = m.number<double>("wiener_signal_power");
  const ImageGrid wien = wiener(degraded, psf, noise, wopts);

  const int passes = m.number_or("sharpen_passes", 1);
  const ImageGrid restored_sharp = sharpen(restored.f_star, passes);
  const ImageGrid wiener_sharp = sharpen(wien, passes);

  save(ideal, out_dir / "ideal.f64");
  save(degraded, out_dir / "degraded.f64");
  save(restored.f_star, out_dir / "restored.f64");
  save(wien, out_dir / "wiener.f64");
  save(restored_sharp, out_dir / "restored_sharpened.f64");
  save(wiener_sharp, out_dir / "wiener_sharpened.f64");
  {
    std::ofstream trace(out_dir / "trace.csv", std::ios::binary | std::ios::trunc);
    write_trace_csv(restored.trace, trace);
    if (!trace) throw IoError("write failure on trace.csv");
  }
  const std::string metrics = format_metrics_csv({
      {"rmse_degraded", rmse(degraded, ideal)},
      {"rmse_restored", rmse(restored.f_star, ideal)},
      {"rmse_wiener", rmse(wien, ideal)},
      {"psnr_degraded", psnr(degraded, ideal)},
      {"psnr_restored", psnr(restored.f_star, ideal)},
      {"psnr_wiener", psnr(wien, ideal)},
      {"rmse_restored_sharpened", rmse(restored_sharp, ideal)},
      {"rmse_wiener_sharpened", rmse(wiener_sharp, ideal)},
  });
  {
    std::ofstream mf(out_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    mf << metrics;
    if (!mf) throw IoError("write failure on metrics.csv");
  }
  out << metrics;
}

}  // namespace mfa::cli
