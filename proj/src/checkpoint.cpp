#include "yaware/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "yaware/errors.hpp"

namespace yaware {

namespace {

constexpr char kMagic[8] = {'Y', 'A', 'W', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

nlohmann::ordered_json encoder_config_to_json(const EncoderConfig& cfg) {
  nlohmann::ordered_json j;
  j["conv_blocks"] = cfg.conv_blocks;
  j["feature_dim"] = cfg.feature_dim;
  j["projection_hidden"] = cfg.projection_hidden;
  j["embedding_dim"] = cfg.embedding_dim;
  return j;
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig cfg;
  cfg.conv_blocks = j.at("conv_blocks").get<std::vector<std::array<int, 2>>>();
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.projection_hidden = j.at("projection_hidden").get<int>();
  cfg.embedding_dim = j.at("embedding_dim").get<int>();
  return cfg;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["schema_version"] = meta.schema_version;
  header["config"] = encoder_config_to_json(params.cfg);
  header["epoch"] = meta.epoch;
  header["seed"] = meta.seed;
  header["loss_curve"] = meta.loss_curve;
  header["lr_curve"] = meta.lr_curve;
  header["arrays"] = nlohmann::ordered_json::array();
  for (const auto& a : params.arrays) {
    nlohmann::ordered_json e;
    e["name"] = a.name;
    e["shape"] = a.shape;
    header["arrays"].push_back(std::move(e));
  }
  header["extra"] = meta.extra.is_null() ? nlohmann::ordered_json::object()
                                         : meta.extra;
  std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
  unsigned char lb[4] = {static_cast<unsigned char>(len & 0xff),
                         static_cast<unsigned char>((len >> 8) & 0xff),
                         static_cast<unsigned char>((len >> 16) & 0xff),
                         static_cast<unsigned char>((len >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(lb), 4);
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& a : params.arrays)
    os.write(reinterpret_cast<const char*>(a.value.data()),
             static_cast<std::streamsize>(a.value.size() * sizeof(double)));
  os.flush();
  if (!os) throw IoError("short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError(path.string() + ": bad magic, not a checkpoint file");

  unsigned char lb[4];
  is.read(reinterpret_cast<char*>(lb), 4);
  if (!is) throw FormatError(path.string() + ": truncated header length");
  std::uint32_t len = static_cast<std::uint32_t>(lb[0]) |
                      (static_cast<std::uint32_t>(lb[1]) << 8) |
                      (static_cast<std::uint32_t>(lb[2]) << 16) |
                      (static_cast<std::uint32_t>(lb[3]) << 24);
  std::string header_str(len, '\0');
  is.read(header_str.data(), len);
  if (!is) throw FormatError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": header is not valid JSON: " +
                      e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.meta.schema_version = header.at("schema_version").get<int>();
    ckpt.meta.epoch = header.at("epoch").get<int>();
    ckpt.meta.seed = header.at("seed").get<std::uint64_t>();
    ckpt.meta.loss_curve =
        header.at("loss_curve").get<std::vector<double>>();
    ckpt.meta.lr_curve = header.at("lr_curve").get<std::vector<double>>();
    ckpt.meta.extra = header.value("extra", nlohmann::ordered_json::object());
    ckpt.params.cfg = encoder_config_from_json(header.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed header: " + e.what());
  }
  ckpt.params.cfg.validate();

  // Rebuild arrays from the skeleton so shapes and declaration order are the
  // single source of truth, then fill values from the payload.
  ModelParams skeleton = param_skeleton(ckpt.params.cfg);
  const auto& arrays_meta = header.at("arrays");
  if (arrays_meta.size() != skeleton.arrays.size())
    throw FormatError(path.string() + ": array count mismatch");
  for (std::size_t i = 0; i < skeleton.arrays.size(); ++i) {
    if (arrays_meta[i].at("name").get<std::string>() !=
            skeleton.arrays[i].name ||
        arrays_meta[i].at("shape").get<std::vector<int>>() !=
            skeleton.arrays[i].shape)
      throw FormatError(path.string() + ": array " + std::to_string(i) +
                        " does not match the declared architecture");
  }
  ckpt.params.arrays = std::move(skeleton.arrays);
  for (auto& a : ckpt.params.arrays) {
    std::fill(a.grad.begin(), a.grad.end(), 0.0);
    is.read(reinterpret_cast<char*>(a.value.data()),
            static_cast<std::streamsize>(a.value.size() * sizeof(double)));
    if (is.gcount() !=
        static_cast<std::streamsize>(a.value.size() * sizeof(double)))
      throw FormatError(path.string() + ": payload shorter than declared "
                        "arrays");
  }
  char extra_byte;
  if (is.read(&extra_byte, 1))
    throw FormatError(path.string() + ": payload longer than declared arrays");
  return ckpt;
}

}  // namespace yaware
