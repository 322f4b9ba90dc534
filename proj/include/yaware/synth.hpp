#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "yaware/manifest.hpp"
#include "yaware/volume.hpp"

namespace yaware {

struct SynthConfig {
  int n_samples = 512;
  int dim = 16;  // cubic volumes dim^3
  std::array<double, 2> y_range{20.0, 80.0};
  int n_sites = 5;
  double site_effect_strength = 0.1;
  double class_effect_strength = 0.5;
  std::uint64_t seed = 7;

  void validate() const;  // positive counts, dim >= 8, y_range min < max
};

// Deterministic volume construction for sample i of a dataset:
//   - y uniform in y_range
//   - centered sphere of intensity 1, radius affine in y spanning
//     15%..40% of dim across y_range
//   - label = 1 iff y exceeds the midpoint of y_range (so the downstream
//     label is y-correlated by construction); label-1 samples gain an
//     off-center blob of amplitude class_effect_strength
//   - per-site gaussian smoothing and additive bias, both scaled by
//     site_effect_strength; site assignment i mod n_sites
//   - i.i.d. gaussian pixel noise, std 0.05
// All randomness derives from hash(seed, i) or hash(seed, site), so samples
// are order-independent and parallel generation is bit-identical to
// sequential.
struct SynthSample {
  LabeledSample record;
  Volume volume;
};
SynthSample make_synth_sample(const SynthConfig& cfg, int i);

// Writes n_samples volume files plus manifest.jsonl into out_dir. Returns the
// loaded-equivalent manifest. Byte-identical across runs with equal configs.
Manifest generate_synthetic_dataset(const SynthConfig& cfg,
                                    const std::filesystem::path& out_dir);

}  // namespace yaware
