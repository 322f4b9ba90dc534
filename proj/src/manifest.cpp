#include "yaware/manifest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"
#include "yaware/errors.hpp"

namespace yaware {

Manifest load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw IoError("cannot open manifest " + manifest_path.string());

  Manifest m;
  m.root = manifest_path.parent_path();

  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string where =
        manifest_path.string() + ":" + std::to_string(line_no);

    nlohmann::json e;
    try {
      e = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(where + ": invalid JSON: " + ex.what());
    }
    if (!e.is_object()) throw FormatError(where + ": not a JSON object");

    LabeledSample s;
    try {
      s.id = e.at("id").get<std::string>();
      s.volume_path = e.at("volume_path").get<std::string>();
      s.y = e.at("y").get<double>();
      s.site = e.at("site").get<std::string>();
      if (e.contains("label") && !e["label"].is_null())
        s.label = e["label"].get<int>();
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(where + ": " + ex.what());
    }

    if (s.id.empty()) throw FormatError(where + ": empty id");
    if (!seen_ids.insert(s.id).second)
      throw FormatError(where + ": duplicate id \"" + s.id + "\"");
    if (!std::isfinite(s.y)) throw FormatError(where + ": y is not finite");
    if (s.site.empty()) throw FormatError(where + ": empty site");
    if (s.label && *s.label != 0 && *s.label != 1)
      throw FormatError(where + ": label must be 0 or 1, got " +
                        std::to_string(*s.label));
    if (!std::filesystem::exists(m.root / s.volume_path))
      throw FormatError(where + ": volume file not found: " +
                        (m.root / s.volume_path).string());

    m.samples.push_back(std::move(s));
  }
  if (m.samples.empty())
    throw FormatError(manifest_path.string() + ": manifest is empty");
  return m;
}

void save_manifest(const Manifest& m,
                   const std::filesystem::path& manifest_path) {
  std::ofstream os(manifest_path, std::ios::trunc);
  if (!os)
    throw IoError("cannot open manifest " + manifest_path.string() +
                  " for writing");
  for (const auto& s : m.samples) {
    nlohmann::ordered_json e;
    e["id"] = s.id;
    e["volume_path"] = s.volume_path;
    e["y"] = s.y;
    e["site"] = s.site;
    if (s.label)
      e["label"] = *s.label;
    else
      e["label"] = nullptr;
    os << e.dump() << "\n";
  }
  if (!os) throw IoError("short write to " + manifest_path.string());
}

}  // namespace yaware
