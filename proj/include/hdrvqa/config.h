#ifndef HDRVQA_CONFIG_H_
#define HDRVQA_CONFIG_H_

#include <string>

#include "hdrvqa/forest.h"
#include "hdrvqa/hdrmax.h"
#include "hdrvqa/patchmax.h"
#include "hdrvqa/st_chips.h"

namespace hdrvqa {

struct RegressorConfig {
  HyperGrid grid;
  double train_ratio = 0.8;
  int trials = 100;
};

// Settings shared by the subcommands. INI file sections: [nss], [niqe],
// [patchmax], [hdrmax], [stchips], [regressor].
struct ToolConfig {
  double mscn_c = kDefaultMscnC;
  std::string niqe_model;  // empty: the bundled pristine model
  PatchMaxConfig patchmax;
  HdrMaxConfig hdrmax;
  StChipsConfig stchips;
  RegressorConfig regressor;

  // Sets one "section.key" from text. Throws UsageError for unknown keys
  // and unparsable values.
  void set(const std::string& dotted_key, const std::string& value);
  // Reads an INI file and applies every key in order.
  void load(const std::string& path);
  // Copies mscn_c into the bank configs and validates everything.
  void finalize();
};

// One line per key, "section.key = default  description".
std::string config_reference();

// Location of the pristine NIQE model bundled with the tool.
std::string bundled_niqe_model_path();

}  // namespace hdrvqa

#endif  // HDRVQA_CONFIG_H_
