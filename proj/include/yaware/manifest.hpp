#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace yaware {

// One dataset entry. `y` is the continuous metadata the weighting kernel
// consumes, `site` the acquisition-site id, `label` the optional downstream
// binary target.
struct LabeledSample {
  std::string id;
  std::string volume_path;  // relative to the manifest's directory
  double y = 0.0;
  std::string site;
  std::optional<int> label;
};

struct Manifest {
  int schema_version = 1;
  std::filesystem::path root;  // directory the manifest file lives in
  std::vector<LabeledSample> samples;

  std::filesystem::path resolve(const LabeledSample& s) const {
    return root / s.volume_path;
  }
};

// Reads a JSON-lines manifest, one sample object per line with fields
// id, volume_path, y, site, label (nullable). Parse errors cite the 1-based
// line number. Checks: manifest nonempty, unique ids, nonempty site, finite y,
// labels in {0,1} when present, referenced volume files exist.
Manifest load_manifest(const std::filesystem::path& manifest_path);

// Writes one compact JSON object per line with keys in a fixed order so
// repeated saves of the same data are byte-identical.
void save_manifest(const Manifest& m,
                   const std::filesystem::path& manifest_path);

}  // namespace yaware
