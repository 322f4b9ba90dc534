#include "yaware/volume.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "json.hpp"
#include "yaware/errors.hpp"

namespace yaware {

namespace {

constexpr char kMagic[8] = {'Y', 'A', 'W', 'V', 'O', 'L', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "volume I/O assumes a little-endian host");

void write_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff),
  };
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("volume file truncated in header length");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void Volume::validate() const {
  for (int d : dims) {
    if (d <= 0)
      throw ValidationError("volume dims must be positive, got [" +
                            std::to_string(dims[0]) + ", " +
                            std::to_string(dims[1]) + ", " +
                            std::to_string(dims[2]) + "]");
  }
  for (double s : spacing_mm) {
    if (!(s > 0.0))
      throw ValidationError("volume spacing_mm must be positive");
  }
  if (data.size() != size())
    throw ValidationError("volume data length " + std::to_string(data.size()) +
                          " does not match dims product " +
                          std::to_string(size()));
  for (float f : data) {
    if (!std::isfinite(f))
      throw ValidationError("volume contains a non-finite value");
  }
}

double volume_mean(const Volume& v) {
  if (v.data.empty()) throw ValidationError("mean of empty volume");
  double acc = 0.0;
  for (float f : v.data) acc += static_cast<double>(f);
  return acc / static_cast<double>(v.data.size());
}

double volume_stddev(const Volume& v) {
  double mu = volume_mean(v);
  double acc = 0.0;
  for (float f : v.data) {
    double d = static_cast<double>(f) - mu;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(v.data.size()));
}

void standardize(Volume& v) {
  if (v.data.empty()) throw ValidationError("standardize of empty volume");
  double mu = volume_mean(v);
  double sd = volume_stddev(v);
  if (sd == 0.0) {
    for (float& f : v.data) f = 0.0f;
    return;
  }
  for (float& f : v.data)
    f = static_cast<float>((static_cast<double>(f) - mu) / sd);
}

Volume standardized(Volume v) {
  standardize(v);
  return v;
}

void write_volume(const Volume& v, const std::filesystem::path& path) {
  v.validate();
  nlohmann::json header;
  header["dims"] = v.dims;
  header["dtype"] = "f32le";
  header["spacing_mm"] = v.spacing_mm;
  std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32le(os, static_cast<std::uint32_t>(header_str.size()));
  os.write(header_str.data(),
           static_cast<std::streamsize>(header_str.size()));
  os.write(reinterpret_cast<const char*>(v.data.data()),
           static_cast<std::streamsize>(v.data.size() * sizeof(float)));
  os.flush();
  if (!os) throw IoError("short write to " + path.string());
}

Volume read_volume(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError(path.string() + ": bad magic, not a volume file");

  std::uint32_t header_len = read_u32le(is);
  std::string header_str(header_len, '\0');
  is.read(header_str.data(), header_len);
  if (!is) throw FormatError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": header is not valid JSON: " +
                      e.what());
  }

  Volume v;
  try {
    v.dims = header.at("dims").get<std::array<int, 3>>();
    if (header.at("dtype").get<std::string>() != "f32le")
      throw FormatError(path.string() + ": unsupported dtype " +
                        header.at("dtype").get<std::string>());
    v.spacing_mm = header.at("spacing_mm").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed header: " + e.what());
  }
  for (int d : v.dims) {
    if (d <= 0) throw FormatError(path.string() + ": non-positive dim");
  }

  std::size_t n = v.size();
  v.data.resize(n);
  is.read(reinterpret_cast<char*>(v.data.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (is.gcount() != static_cast<std::streamsize>(n * sizeof(float)))
    throw FormatError(path.string() + ": payload shorter than dims promise");
  // Trailing bytes mean the dims header lies about the payload.
  char extra;
  if (is.read(&extra, 1))
    throw FormatError(path.string() + ": payload longer than dims promise");
  return v;
}

}  // namespace yaware
