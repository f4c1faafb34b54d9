#include "hdrvqa/parallel.h"

#include <cstdlib>
#include <string>

namespace hdrvqa {

unsigned default_thread_count() {
  if (const char* env = std::getenv("HDRVQA_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace hdrvqa
