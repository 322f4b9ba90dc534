#include "yaware/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "yaware/errors.hpp"

namespace yaware {

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::cutout: return "cutout";
    case TransformKind::crop_resize: return "crop_resize";
    case TransformKind::noise: return "noise";
    case TransformKind::blur: return "blur";
    case TransformKind::flip: return "flip";
  }
  throw ParameterError("unknown transform kind");
}

TransformKind transform_kind_from_string(const std::string& s) {
  if (s == "cutout") return TransformKind::cutout;
  if (s == "crop_resize") return TransformKind::crop_resize;
  if (s == "noise") return TransformKind::noise;
  if (s == "blur") return TransformKind::blur;
  if (s == "flip") return TransformKind::flip;
  throw ParameterError("unknown transform kind \"" + s + "\"");
}

void TransformSpec::validate() const {
  if (probability < 0.0 || probability > 1.0)
    throw ParameterError("transform probability must lie in [0, 1]");
  switch (kind) {
    case TransformKind::cutout:
      if (!(p > 0.0 && p < 1.0))
        throw ParameterError("cutout fraction p must lie in (0, 1)");
      break;
    case TransformKind::crop_resize:
      if (!(p_prime > 0.0 && p_prime <= 1.0))
        throw ParameterError("crop fraction p_prime must lie in (0, 1]");
      break;
    case TransformKind::noise:
    case TransformKind::blur:
      if (!(range_min >= 0.0 && range_min <= range_max))
        throw ParameterError(to_string(kind) +
                             " range must satisfy 0 <= min <= max");
      break;
    case TransformKind::flip:
      if (flip_prob < 0.0 || flip_prob > 1.0)
        throw ParameterError("flip probability must lie in [0, 1]");
      break;
  }
}

void TransformSet::validate() const {
  if (specs.empty()) throw ParameterError("transform set is empty");
  for (const auto& s : specs) s.validate();
}

TransformSet named_transform_set(const std::string& name) {
  TransformSet t;
  auto crop = [] {
    TransformSpec s;
    s.kind = TransformKind::crop_resize;
    s.p_prime = 0.75;
    return s;
  };
  auto cutout = [] {
    TransformSpec s;
    s.kind = TransformKind::cutout;
    s.p = 0.25;
    return s;
  };
  if (name == "crop") {
    t.specs = {crop()};
  } else if (name == "cutout") {
    t.specs = {cutout()};
  } else if (name == "all_tf") {
    TransformSpec noise;
    noise.kind = TransformKind::noise;
    noise.range_min = 0.05;
    noise.range_max = 0.15;
    TransformSpec blur;
    blur.kind = TransformKind::blur;
    blur.range_min = 0.1;
    blur.range_max = 2.0;
    TransformSpec flip;
    flip.kind = TransformKind::flip;
    flip.flip_prob = 0.5;
    t.specs = {crop(), cutout(), noise, blur, flip};
    for (auto& s : t.specs) s.probability = 0.5;
  } else {
    throw ParameterError("unknown transform set \"" + name +
                         "\" (expected crop, cutout or all_tf)");
  }
  return t;
}

namespace {

int side_for_fraction(int dim, double fraction) {
  int s = static_cast<int>(std::lround(dim * std::cbrt(fraction)));
  return std::clamp(s, 1, dim);
}

// Uniform corner for a window of side s inside [0, dim).
int random_origin(int dim, int s, RngStream& rng) {
  return static_cast<int>(
      rng.uniform_below(static_cast<std::uint64_t>(dim - s + 1)));
}

// Align-corners trilinear sampling of src at fractional (z, y, x).
double sample_trilinear(const Volume& src, double z, double y, double x) {
  auto split = [](double c, int dim, int& lo, int& hi, double& frac) {
    if (dim == 1) {
      lo = hi = 0;
      frac = 0.0;
      return;
    }
    double fl = std::floor(c);
    lo = std::clamp(static_cast<int>(fl), 0, dim - 1);
    hi = std::min(lo + 1, dim - 1);
    frac = c - static_cast<double>(lo);
  };
  int z0, z1, y0, y1, x0, x1;
  double fz, fy, fx;
  split(z, src.dims[0], z0, z1, fz);
  split(y, src.dims[1], y0, y1, fy);
  split(x, src.dims[2], x0, x1, fx);

  auto v = [&](int zz, int yy, int xx) {
    return static_cast<double>(src.at(zz, yy, xx));
  };
  auto lerp = [](double a, double b, double f) { return a + (b - a) * f; };
  double c00 = lerp(v(z0, y0, x0), v(z0, y0, x1), fx);
  double c01 = lerp(v(z0, y1, x0), v(z0, y1, x1), fx);
  double c10 = lerp(v(z1, y0, x0), v(z1, y0, x1), fx);
  double c11 = lerp(v(z1, y1, x0), v(z1, y1, x1), fx);
  double c0 = lerp(c00, c01, fy);
  double c1 = lerp(c10, c11, fy);
  return lerp(c0, c1, fz);
}

Volume resize_trilinear(const Volume& src, const std::array<int, 3>& dims) {
  Volume out(dims[0], dims[1], dims[2]);
  out.spacing_mm = src.spacing_mm;
  auto scale = [](int src_dim, int dst_dim) {
    if (dst_dim <= 1) return 0.0;
    return static_cast<double>(src_dim - 1) / static_cast<double>(dst_dim - 1);
  };
  double sz = scale(src.dims[0], dims[0]);
  double sy = scale(src.dims[1], dims[1]);
  double sx = scale(src.dims[2], dims[2]);
  for (int z = 0; z < dims[0]; ++z)
    for (int y = 0; y < dims[1]; ++y)
      for (int x = 0; x < dims[2]; ++x)
        out.at(z, y, x) = static_cast<float>(
            sample_trilinear(src, z * sz, y * sy, x * sx));
  return out;
}

// Mirror index into [0, dim) without repeating the edge sample.
int reflect(int i, int dim) {
  if (dim == 1) return 0;
  int period = 2 * (dim - 1);
  i = ((i % period) + period) % period;
  return i < dim ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Convolve along one axis (0=z, 1=y, 2=x) with a symmetric kernel.
Volume convolve_axis(const Volume& src, const std::vector<double>& kernel,
                     int axis) {
  Volume out = src;
  int radius = static_cast<int>(kernel.size() / 2);
  int dim = src.dims[axis];
  for (int z = 0; z < src.dims[0]; ++z)
    for (int y = 0; y < src.dims[1]; ++y)
      for (int x = 0; x < src.dims[2]; ++x) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          int zz = z, yy = y, xx = x;
          if (axis == 0) zz = reflect(z + t, dim);
          else if (axis == 1) yy = reflect(y + t, dim);
          else xx = reflect(x + t, dim);
          acc += kernel[t + radius] * static_cast<double>(src.at(zz, yy, xx));
        }
        out.at(z, y, x) = static_cast<float>(acc);
      }
  return out;
}

Volume flip_axis(const Volume& src, int axis) {
  Volume out = src;
  for (int z = 0; z < src.dims[0]; ++z)
    for (int y = 0; y < src.dims[1]; ++y)
      for (int x = 0; x < src.dims[2]; ++x) {
        int zz = axis == 0 ? src.dims[0] - 1 - z : z;
        int yy = axis == 1 ? src.dims[1] - 1 - y : y;
        int xx = axis == 2 ? src.dims[2] - 1 - x : x;
        out.at(zz, yy, xx) = src.at(z, y, x);
      }
  return out;
}

// Canonical traversal rank; equal kinds keep their listed order.
int canonical_rank(TransformKind k) {
  switch (k) {
    case TransformKind::crop_resize: return 0;
    case TransformKind::cutout: return 1;
    case TransformKind::flip: return 2;
    case TransformKind::noise: return 3;
    case TransformKind::blur: return 4;
  }
  return 5;
}

}  // namespace

Volume random_cutout(const Volume& v, double p, RngStream& rng) {
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError("cutout fraction p must lie in (0, 1)");
  Volume out = v;
  int sz = side_for_fraction(v.dims[0], p);
  int sy = side_for_fraction(v.dims[1], p);
  int sx = side_for_fraction(v.dims[2], p);
  int oz = random_origin(v.dims[0], sz, rng);
  int oy = random_origin(v.dims[1], sy, rng);
  int ox = random_origin(v.dims[2], sx, rng);
  for (int z = oz; z < oz + sz; ++z)
    for (int y = oy; y < oy + sy; ++y)
      for (int x = ox; x < ox + sx; ++x) out.at(z, y, x) = 0.0f;
  return out;
}

Volume random_crop_resize(const Volume& v, double p_prime, RngStream& rng) {
  if (!(p_prime > 0.0 && p_prime <= 1.0))
    throw ParameterError("crop fraction p_prime must lie in (0, 1]");
  int sz = side_for_fraction(v.dims[0], p_prime);
  int sy = side_for_fraction(v.dims[1], p_prime);
  int sx = side_for_fraction(v.dims[2], p_prime);
  int oz = random_origin(v.dims[0], sz, rng);
  int oy = random_origin(v.dims[1], sy, rng);
  int ox = random_origin(v.dims[2], sx, rng);
  if (sz == v.dims[0] && sy == v.dims[1] && sx == v.dims[2]) return v;

  Volume crop(sz, sy, sx);
  crop.spacing_mm = v.spacing_mm;
  for (int z = 0; z < sz; ++z)
    for (int y = 0; y < sy; ++y)
      for (int x = 0; x < sx; ++x)
        crop.at(z, y, x) = v.at(oz + z, oy + y, ox + x);
  return resize_trilinear(crop, v.dims);
}

Volume gaussian_blur(const Volume& v, double sigma) {
  if (sigma < 0.0) throw ParameterError("blur sigma must be nonnegative");
  if (sigma == 0.0) return v;
  std::vector<double> kernel = gaussian_kernel(sigma);
  Volume out = convolve_axis(v, kernel, 0);
  out = convolve_axis(out, kernel, 1);
  out = convolve_axis(out, kernel, 2);
  return out;
}

Volume apply_simple_transform(const Volume& v, const TransformSpec& spec,
                              RngStream& rng) {
  spec.validate();
  switch (spec.kind) {
    case TransformKind::noise: {
      double std = rng.uniform(spec.range_min, spec.range_max);
      Volume out = v;
      for (float& f : out.data)
        f = static_cast<float>(static_cast<double>(f) + std * rng.normal());
      return out;
    }
    case TransformKind::blur: {
      double sigma = rng.uniform(spec.range_min, spec.range_max);
      return gaussian_blur(v, sigma);
    }
    case TransformKind::flip: {
      Volume out = v;
      for (int axis = 0; axis < 3; ++axis)
        if (rng.uniform01() < spec.flip_prob) out = flip_axis(out, axis);
      return out;
    }
    default:
      throw ParameterError("apply_simple_transform expects noise, blur or "
                           "flip, got " + to_string(spec.kind));
  }
}

Volume apply_transform(const Volume& v, const TransformSpec& spec,
                       RngStream& rng) {
  switch (spec.kind) {
    case TransformKind::cutout: return random_cutout(v, spec.p, rng);
    case TransformKind::crop_resize:
      return random_crop_resize(v, spec.p_prime, rng);
    default: return apply_simple_transform(v, spec, rng);
  }
}

Volume sample_view(const Volume& v, const TransformSet& t, RngStream& rng) {
  t.validate();
  std::vector<const TransformSpec*> order;
  order.reserve(t.specs.size());
  for (const auto& s : t.specs) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const TransformSpec* a, const TransformSpec* b) {
                     return canonical_rank(a->kind) < canonical_rank(b->kind);
                   });
  Volume out = v;
  for (const TransformSpec* s : order) {
    if (rng.uniform01() < s->probability) out = apply_transform(out, *s, rng);
  }
  return out;
}

std::pair<Volume, Volume> sample_view_pair(const Volume& v,
                                           const TransformSet& t,
                                           RngStream& rng1, RngStream& rng2) {
  return {sample_view(v, t, rng1), sample_view(v, t, rng2)};
}

}  // namespace yaware
