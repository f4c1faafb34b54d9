#ifndef HDRVQA_EVALUATION_H_
#define HDRVQA_EVALUATION_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdrvqa/forest.h"

namespace hdrvqa {

using LogisticParams = std::array<double, 5>;

// (b1 - b2) / (1 + exp(-(s - b3) / b4)) + b5
double logistic5(const LogisticParams& b, double s);

struct LogisticFit {
  LogisticParams beta{};
  std::vector<double> fitted;
  int iterations = 0;
  bool converged = false;
};

// Least-squares fit of logistic5 mapping pred onto mos. b1 - b2 and b5
// only enter as a scale and an offset, so b2 stays at its starting value
// (min mos) and the simplex moves the other four. A near-affine member of
// the family (very wide b4) is also tried, so the fit never does worse
// than the best straight line. Needs 6 or more points and non-constant
// pred.
LogisticFit logistic_fit(std::span<const double> pred, std::span<const double> mos,
                         int max_iterations = 2000, double rel_tol = 1e-8);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double srcc = 0;  // raw predictions
  double plcc = 0;  // fitted
  double rmse = 0;  // fitted
  LogisticParams beta{};
  bool fit_converged = false;
  ForestParams params;
  std::vector<std::size_t> test_rows;
  std::vector<double> pred;
  std::vector<double> fitted;
  std::vector<double> targets;  // test targets as scored (permuted under shuffle_seed)
};

struct MetricSummary {
  double median = 0;
  double std = 0;  // population
};

struct MetricReport {
  std::vector<TrialResult> trials;  // one per split, in split order
  MetricSummary srcc, plcc, rmse;
  int failed = 0;
};

struct EvalOptions {
  HyperGrid grid;
  // When false every trial uses `fixed` instead of the CV search.
  bool cross_validate = true;
  ForestParams fixed;
  unsigned threads = 1;
  // Null check: when set, trial t permutes all targets with its own stream
  // derived from (seed, t) before training and scoring.
  std::optional<std::uint64_t> shuffle_seed;
};

// Per split: train on the train rows, predict the test rows, fit the
// logistic, score. Failed trials keep their row with ok = false and are
// left out of the aggregates. content_ids (optional, one per row) keeps
// CV folds content-disjoint.
MetricReport evaluate_splits(const Matrix& x, std::span<const double> y,
                             std::span<const SplitSpec> splits, const std::string& layout_version,
                             const EvalOptions& opts,
                             const std::vector<std::string>* content_ids = nullptr);

// Median and population std; all zeros for an empty list.
MetricSummary summarize(std::span<const double> values);

void write_trials_csv(const MetricReport& report, const std::string& path);
void write_summary_json(const MetricReport& report, const std::string& path);
// trial,video_id,pred,fitted,mos for every test row of every good trial.
void write_scatter_csv(const MetricReport& report, std::span<const std::string> video_ids,
                       const std::string& path);

}  // namespace hdrvqa

#endif  // HDRVQA_EVALUATION_H_
