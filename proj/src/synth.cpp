#include "yaware/synth.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "yaware/augment.hpp"
#include "yaware/errors.hpp"
#include "yaware/parallel.hpp"
#include "yaware/rng.hpp"

namespace yaware {

void SynthConfig::validate() const {
  if (n_samples <= 0) throw ValidationError("n_samples must be positive");
  if (dim < 8) throw ValidationError("dim must be at least 8");
  if (!(y_range[0] < y_range[1]))
    throw ValidationError("y_range must satisfy min < max");
  if (n_sites <= 0) throw ValidationError("n_sites must be positive");
  if (site_effect_strength < 0.0)
    throw ValidationError("site_effect_strength must be nonnegative");
  if (class_effect_strength < 0.0)
    throw ValidationError("class_effect_strength must be nonnegative");
}

namespace {

struct SiteEffect {
  double bias;
  double smooth_sigma;
};

SiteEffect site_effect(const SynthConfig& cfg, int site_index) {
  RngStream rng(cfg.seed, stream_tag::site,
                static_cast<std::uint64_t>(site_index));
  SiteEffect e;
  e.bias = cfg.site_effect_strength * rng.uniform(-1.0, 1.0);
  e.smooth_sigma = cfg.site_effect_strength * rng.uniform(0.5, 1.5);
  return e;
}

void add_sphere(Volume& v, double cz, double cy, double cx, double radius,
                double amplitude) {
  double r2 = radius * radius;
  for (int z = 0; z < v.dims[0]; ++z)
    for (int y = 0; y < v.dims[1]; ++y)
      for (int x = 0; x < v.dims[2]; ++x) {
        double dz = z - cz, dy = y - cy, dx = x - cx;
        if (dz * dz + dy * dy + dx * dx <= r2)
          v.at(z, y, x) = static_cast<float>(v.at(z, y, x) + amplitude);
      }
}

std::string sample_id(int i) {
  std::string n = std::to_string(i);
  return "s" + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
}

}  // namespace

SynthSample make_synth_sample(const SynthConfig& cfg, int i) {
  cfg.validate();
  if (i < 0 || i >= cfg.n_samples)
    throw ParameterError("sample index out of range");
  RngStream rng(cfg.seed, stream_tag::sample, static_cast<std::uint64_t>(i));

  double y = rng.uniform(cfg.y_range[0], cfg.y_range[1]);
  double t = (y - cfg.y_range[0]) / (cfg.y_range[1] - cfg.y_range[0]);
  double radius = cfg.dim * (0.15 + 0.25 * t);
  int label = y > 0.5 * (cfg.y_range[0] + cfg.y_range[1]) ? 1 : 0;
  int site_index = i % cfg.n_sites;

  Volume v(cfg.dim, cfg.dim, cfg.dim);
  double c = 0.5 * (cfg.dim - 1);
  add_sphere(v, c, c, c, radius, 1.0);

  if (label == 1) {
    // Off-center blob at a random direction, fixed offset and size.
    double az = rng.normal(), ay = rng.normal(), ax = rng.normal();
    double norm = std::sqrt(az * az + ay * ay + ax * ax);
    if (norm == 0.0) norm = 1.0;
    double off = 0.25 * cfg.dim;
    add_sphere(v, c + off * az / norm, c + off * ay / norm,
               c + off * ax / norm, 0.12 * cfg.dim, cfg.class_effect_strength);
  }

  SiteEffect se = site_effect(cfg, site_index);
  if (se.smooth_sigma > 1e-12) v = gaussian_blur(v, se.smooth_sigma);
  for (float& f : v.data)
    f = static_cast<float>(static_cast<double>(f) + se.bias +
                           0.05 * rng.normal());

  SynthSample s;
  s.volume = std::move(v);
  s.record.id = sample_id(i);
  s.record.volume_path = s.record.id + ".vol";
  s.record.y = y;
  s.record.site = "site_" + std::to_string(site_index);
  s.record.label = label;
  return s;
}

Manifest generate_synthetic_dataset(const SynthConfig& cfg,
                                    const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  std::vector<LabeledSample> records(cfg.n_samples);
  parallel_for(static_cast<std::size_t>(cfg.n_samples), [&](std::size_t i) {
    SynthSample s = make_synth_sample(cfg, static_cast<int>(i));
    write_volume(s.volume, out_dir / s.record.volume_path);
    records[i] = std::move(s.record);
  });

  Manifest m;
  m.root = out_dir;
  m.samples = std::move(records);
  save_manifest(m, out_dir / "manifest.jsonl");
  return m;
}

}  // namespace yaware
