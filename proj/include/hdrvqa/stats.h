#ifndef HDRVQA_STATS_H_
#define HDRVQA_STATS_H_

#include <span>
#include <vector>

namespace hdrvqa {

// Average ranks (1-based); ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation. Throws DegenerateInputError for constant input,
// UsageError for length mismatch or fewer than 3 samples.
double plcc(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks.
double srcc(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
// Population standard deviation.
double stddev(std::span<const double> x);
// Middle value, or mean of the two middle values.
double median(std::vector<double> x);

}  // namespace hdrvqa

#endif  // HDRVQA_STATS_H_
