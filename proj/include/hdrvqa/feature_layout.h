#ifndef HDRVQA_FEATURE_LAYOUT_H_
#define HDRVQA_FEATURE_LAYOUT_H_

#include <string>
#include <vector>

#include "hdrvqa/forest.h"
#include "hdrvqa/patchmax.h"

namespace hdrvqa {

inline constexpr const char* kLayoutFull = "full-v1";
inline constexpr const char* kLayoutSummary = "summary-v1";

struct FeatureBank {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

// Column schema of one layout version. Bank order is niqe, patchmax,
// hdrmax, stchips and, for "+tv" layouts, a trailing tv column.
struct FeatureSchema {
  std::string version;
  std::vector<FeatureBank> banks;
  std::vector<std::string> names;

  std::size_t width() const { return names.size(); }
  const FeatureBank& bank(const std::string& name) const;
};

// Accepts "full-v1", "summary-v1", each optionally with "+tv". Throws
// LayoutMismatchError for anything else.
FeatureSchema schema_for(const std::string& version);

std::string layout_for(PatchMaxLayout layout);
PatchMaxLayout patchmax_layout_of(const std::string& version);

// The 18 NSS statistic names in feature order.
const std::vector<std::string>& nss_statistic_names();

// Feature table keyed by video id. On disk:
//   # layout_version=<version>
//   # bank <name> <begin> <end>     (one line per bank)
//   video_id,<feature names...>
//   <id>,<values...>
struct FeatureFile {
  std::string layout_version;
  std::vector<std::string> video_ids;
  Matrix values;

  // Row index of a video; throws Error naming the video if absent.
  std::size_t row_of(const std::string& video_id) const;

  void write(const std::string& path) const;
  // Checks the header against the schema of the declared version.
  static FeatureFile read(const std::string& path);
};

}  // namespace hdrvqa

#endif  // HDRVQA_FEATURE_LAYOUT_H_
