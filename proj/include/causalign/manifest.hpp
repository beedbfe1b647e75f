#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "causalign/dataset.hpp"

namespace causalign {

enum class Domain { kSource, kTarget };
enum class DomainFilter { kSource, kTarget, kAll };

std::string_view domain_name(Domain domain);
Domain parse_domain(std::string_view text);
DomainFilter parse_domain_filter(std::string_view text);
bool matches(DomainFilter filter, Domain domain);

struct ManifestEntry {
  std::string clip_id;
  int label = 0;
  Domain domain = Domain::kSource;
  std::vector<std::string> frames;  // as written; relative paths resolve against the manifest directory

  bool operator==(const ManifestEntry&) const = default;
};

// Text format:
//   classes<TAB>name0<TAB>name1...
//   clip_id<TAB>label<TAB>domain<TAB>frame0,frame1,...
struct Manifest {
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // directory the manifest was loaded from or written to

  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::filesystem::path resolve(const std::string& frame) const;
  /// Structural checks: labels, unique ids, nonempty entries and frame lists.
  void validate() const;
  std::vector<std::size_t> select(DomainFilter filter) const;
};

std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
/// Parses, validates, and checks every referenced frame exists.
Manifest load_manifest(const std::filesystem::path& path);

/// Decodes the frames of every entry matching `filter`.
ClipDataset load_clips(const Manifest& manifest, DomainFilter filter);

}  // namespace causalign
