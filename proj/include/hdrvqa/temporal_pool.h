#ifndef HDRVQA_TEMPORAL_POOL_H_
#define HDRVQA_TEMPORAL_POOL_H_

#include <cstddef>
#include <vector>

namespace hdrvqa {

inline constexpr std::size_t kTemporalGroup = 5;

struct TemporalPool {
  std::vector<double> mean;  // per-feature mean over all frames
  std::vector<double> tstd;  // per-feature population std inside each
                             // non-overlapping 5-frame group, averaged
                             // over groups; a trailing partial group is
                             // dropped
};

// rows[frame][feature]. Throws UsageError for fewer than 5 frames or
// ragged rows. Reduction order is frame order.
TemporalPool temporal_pool(const std::vector<std::vector<double>>& rows);

}  // namespace hdrvqa

#endif  // HDRVQA_TEMPORAL_POOL_H_
