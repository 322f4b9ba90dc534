#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace yaware {

// 3D scalar field, C-order with z slowest. Values are stored as 32-bit floats
// (the on-disk dtype); all arithmetic on them happens in double.
struct Volume {
  std::array<int, 3> dims{0, 0, 0};  // z, y, x
  std::array<double, 3> spacing_mm{1.0, 1.0, 1.0};
  std::vector<float> data;

  Volume() = default;
  Volume(int dz, int dy, int dx, float fill = 0.0f)
      : dims{dz, dy, dx},
        data(static_cast<std::size_t>(dz) * dy * dx, fill) {}

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t index(int z, int y, int x) const {
    return (static_cast<std::size_t>(z) * dims[1] + y) * dims[2] + x;
  }
  float& at(int z, int y, int x) { return data[index(z, y, x)]; }
  float at(int z, int y, int x) const { return data[index(z, y, x)]; }

  // Throws ValidationError on non-positive dims/spacing, length mismatch or
  // non-finite values.
  void validate() const;
};

// Per-volume standardization: zero mean, unit (population) standard deviation,
// computed in double. A constant volume maps to all zeros. This is an explicit
// pipeline step, never applied by I/O.
void standardize(Volume& v);
Volume standardized(Volume v);

double volume_mean(const Volume& v);
double volume_stddev(const Volume& v);

// Container format: 8-byte magic "YAWVOL01", 4-byte little-endian header
// length, JSON header {dims, dtype:"f32le", spacing_mm}, then raw 32-bit
// little-endian floats in C-order. Round trips are bit-exact.
void write_volume(const Volume& v, const std::filesystem::path& path);
Volume read_volume(const std::filesystem::path& path);

}  // namespace yaware
