#pragma once

#include <string>
#include <vector>

#include "causalign/image.hpp"

namespace causalign {

/// Labeled clips with decoded frames.
struct ClipDataset {
  std::vector<std::string> class_names;
  std::vector<std::string> ids;
  std::vector<Clip> clips;
  std::vector<int> labels;

  std::size_t size() const { return clips.size(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  void validate() const;
};

}  // namespace causalign
