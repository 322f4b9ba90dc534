#pragma once

#include <string>
#include <utility>
#include <vector>

#include "yaware/rng.hpp"
#include "yaware/volume.hpp"

namespace yaware {

enum class TransformKind { cutout, crop_resize, noise, blur, flip };

std::string to_string(TransformKind k);
TransformKind transform_kind_from_string(const std::string& s);

// One stochastic transform plus the chance it fires at all. Only the params
// matching `kind` are read.
struct TransformSpec {
  TransformKind kind = TransformKind::cutout;
  double p = 0.25;           // cutout: volume fraction removed
  double p_prime = 0.75;     // crop_resize: volume fraction kept
  double range_min = 0.0;    // noise: std range; blur: sigma range (voxels)
  double range_max = 0.0;
  double flip_prob = 0.5;    // flip: per-axis reversal probability
  double probability = 1.0;  // chance this spec applies to a given view

  void validate() const;
};

struct TransformSet {
  std::vector<TransformSpec> specs;

  void validate() const;  // nonempty, each spec valid
};

// Named sets used throughout: "crop" (crop_resize p'=0.75, always),
// "cutout" (p=0.25, always), "all_tf" (all five, each with probability 0.5).
TransformSet named_transform_set(const std::string& name);

// Zeroes a cube covering ~p of the volume: side round(dim_axis * p^(1/3)) per
// axis, clamped to [1, dim_axis], position uniform among fully-interior
// placements. Fill value 0 is the post-standardization mean.
Volume random_cutout(const Volume& v, double p, RngStream& rng);

// Crops a sub-volume with side round(dim_axis * p_prime^(1/3)) per axis at a
// uniform interior position, then resizes back to the original dims by
// trilinear interpolation. p_prime = 1 is an exact identity.
Volume random_crop_resize(const Volume& v, double p_prime, RngStream& rng);

// Deterministic separable gaussian convolution, kernel radius ceil(3*sigma),
// reflective (mirror) boundary. sigma = 0 returns the input unchanged.
Volume gaussian_blur(const Volume& v, double sigma);

// noise / blur / flip. Draw order per call: one uniform for the std or sigma
// (noise/blur), then per-voxel normals in C-order (noise) or three uniforms in
// z,y,x axis order (flip).
Volume apply_simple_transform(const Volume& v, const TransformSpec& spec,
                              RngStream& rng);

// Applies one spec of any kind, consuming randomness from rng.
Volume apply_transform(const Volume& v, const TransformSpec& spec,
                       RngStream& rng);

// The two stochastic views of one sample. Each view traverses the set in the
// fixed order crop -> cutout -> flip -> noise -> blur (specs of equal kind
// keep their listed order), firing each spec with its probability against the
// view's own stream.
std::pair<Volume, Volume> sample_view_pair(const Volume& v,
                                           const TransformSet& t,
                                           RngStream& rng1, RngStream& rng2);

// Single view, same traversal rule as sample_view_pair.
Volume sample_view(const Volume& v, const TransformSet& t, RngStream& rng);

}  // namespace yaware
