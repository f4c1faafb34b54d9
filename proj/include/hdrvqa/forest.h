#ifndef HDRVQA_FOREST_H_
#define HDRVQA_FOREST_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdrvqa/rng.h"

namespace hdrvqa {

// Dense row-major feature matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);
  Matrix select_rows(std::span<const std::size_t> idx) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class MaxFeatures : std::uint8_t { kSqrt = 0, kOneThird = 1, kAll = 2 };

std::string to_string(MaxFeatures m);
MaxFeatures parse_max_features(const std::string& s);
std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features);

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double value = 0;           // threshold, or leaf mean
  std::int32_t left = -1;     // x[feature] < threshold
  std::int32_t right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
};

struct ForestParams {
  int n_estimators = 100;
  MaxFeatures max_features = MaxFeatures::kSqrt;
  int min_samples_leaf = 2;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  ForestParams params;
  std::string feature_layout_version;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;

  double predict_row(std::span<const double> x) const;
};

inline constexpr std::uint32_t kForestFormatVersion = 1;

struct HyperGrid {
  std::vector<int> n_estimators = {50, 100, 200};
  std::vector<MaxFeatures> max_features = {MaxFeatures::kSqrt, MaxFeatures::kOneThird,
                                           MaxFeatures::kAll};
  int folds = 5;
  int min_samples_leaf = 2;
};

struct CvResult {
  ForestParams params;
  double mean_srcc = 0;
};

struct TrainOptions {
  unsigned threads = 1;
  // Content id per row. When present, CV folds never split a content.
  std::optional<std::vector<std::string>> groups;
};

// One bootstrap CART tree. `bootstrap` holds the n row indices drawn
// with replacement.
RegressionTree grow_tree(const Matrix& x, std::span<const double> y,
                         std::span<const std::size_t> bootstrap, std::size_t mtry,
                         int min_samples_leaf, Rng& rng);

// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

// Forest with fixed hyperparameters. Tree t uses seed + t.
ForestModel fit_forest(const Matrix& x, std::span<const double> y, const ForestParams& params,
                       std::uint64_t seed, const std::string& layout_version,
                       unsigned threads = 1);

// Out-of-bag MSE of a forest grown with the given parameters; rows never
// out of bag are ignored.
double oob_mse(const Matrix& x, std::span<const double> y, const ForestParams& params,
               std::uint64_t seed, unsigned threads = 1);

// k-fold CV over the grid (mean SRCC, ties to fewer trees), then refit on
// all rows. Throws UsageError listing non-finite columns.
ForestModel train_forest(const Matrix& x, std::span<const double> y, const HyperGrid& grid,
                         std::uint64_t seed, const std::string& layout_version,
                         const TrainOptions& opts = {}, CvResult* cv = nullptr);

// Throws LayoutMismatchError when the layout string or width differs.
std::vector<double> predict(const ForestModel& model, const Matrix& x,
                            const std::string& layout_version);

void save_forest(const ForestModel& model, const std::string& path);
ForestModel load_forest(const std::string& path);
std::vector<unsigned char> serialize_forest(const ForestModel& model);
ForestModel deserialize_forest(std::span<const unsigned char> bytes);

// Appends the display-device index (1, 2 or 3) as a trailing column.
Matrix augment_device_index(const Matrix& x, std::span<const int> device_ids);
std::string augmented_layout(const std::string& layout_version);

struct SplitSpec {
  std::vector<std::size_t> train;  // row indices, ascending
  std::vector<std::size_t> test;
  std::uint64_t trial_seed = 0;
};

// Content-aware train/test splits: per trial the contents are shuffled and
// taken into the training side until it holds at least `train_ratio` of
// the videos; at least one content always lands on the test side.
std::vector<SplitSpec> make_splits(std::span<const std::string> content_ids, double train_ratio,
                                   int n_trials, std::uint64_t seed);

}  // namespace hdrvqa

#endif  // HDRVQA_FOREST_H_
