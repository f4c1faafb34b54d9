#include "hdrvqa/temporal_pool.h"

#include <cmath>

#include <fmt/format.h>

#include "hdrvqa/error.h"

namespace hdrvqa {

TemporalPool temporal_pool(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < kTemporalGroup) {
    throw UsageError(fmt::format("temporal pooling needs at least {} frames, got {}",
                                 kTemporalGroup, rows.size()));
  }
  const std::size_t dim = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != dim) throw UsageError("per-frame feature rows differ in length");
  }
  TemporalPool out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < dim; ++k) out.mean[k] += r[k];
  }
  for (double& m : out.mean) m /= static_cast<double>(rows.size());

  const std::size_t groups = rows.size() / kTemporalGroup;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t first = g * kTemporalGroup;
    for (std::size_t k = 0; k < dim; ++k) {
      // Deviations about the group's first frame: a static group gives 0
      // exactly.
      const double ref = rows[first][k];
      double mean = 0;
      for (std::size_t t = 0; t < kTemporalGroup; ++t) mean += rows[first + t][k] - ref;
      mean /= kTemporalGroup;
      double var = 0;
      for (std::size_t t = 0; t < kTemporalGroup; ++t) {
        const double d = (rows[first + t][k] - ref) - mean;
        var += d * d;
      }
      out.tstd[k] += std::sqrt(var / kTemporalGroup);
    }
  }
  for (double& s : out.tstd) s /= static_cast<double>(groups);
  return out;
}

}  // namespace hdrvqa
