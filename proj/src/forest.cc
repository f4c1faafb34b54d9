#include "hdrvqa/forest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hdrvqa/error.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/stats.h"

namespace hdrvqa {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw UsageError(fmt::format("row has {} values, matrix has {} columns", values.size(), cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(data_.begin() + idx[i] * cols_, cols_, out.data_.begin() + i * cols_);
  }
  return out;
}


// ---------------------------------------------------------------------------

std::string to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::kSqrt: return "sqrt";
    case MaxFeatures::kOneThird: return "one_third";
    case MaxFeatures::kAll: return "all";
  }
  return "?";
}

MaxFeatures parse_max_features(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::kSqrt;
  if (s == "one_third") return MaxFeatures::kOneThird;
  if (s == "all") return MaxFeatures::kAll;
  throw UsageError(fmt::format("unknown max_features '{}'", s));
}

std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features) {
  std::size_t k = n_features;
  switch (m) {
    case MaxFeatures::kSqrt: k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))); break;
    case MaxFeatures::kOneThird: k = n_features / 3; break;
    case MaxFeatures::kAll: break;
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

double RegressionTree::predict(std::span<const double> x) const {
  std::int32_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = x[n.feature] < n.value ? n.left : n.right;
  }
  return nodes[i].value;
}

double ForestModel::predict_row(std::span<const double> x) const {
  double s = 0;
  for (const auto& t : trees) s += t.predict(x);
  return s / static_cast<double>(trees.size());
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.below(n);
  return idx;
}

namespace {

struct SplitChoice {
  bool found = false;
  std::int32_t feature = -1;
  double threshold = 0;
  double score = -std::numeric_limits<double>::infinity();
};

double mean_of(std::span<const double> y, std::span<const std::size_t> idx) {
  double s = 0;
  for (std::size_t i : idx) s += y[i];
  return s / static_cast<double>(idx.size());
}

}  // namespace

namespace {

// Sorts the node's values for every examined feature. Cheapest when
// few features are examined per node.
RegressionTree grow_tree_sorting(const Matrix& x, std::span<const double> y,
                                 std::span<const std::size_t> bootstrap, std::size_t mtry,
                                 int min_samples_leaf, Rng& rng) {
  const std::size_t n_features = x.cols();
  const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, min_samples_leaf));
  RegressionTree tree;
  struct Pending {
    std::int32_t node;
    std::vector<std::size_t> samples;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, std::vector<std::size_t>(bootstrap.begin(), bootstrap.end())});
  std::vector<std::pair<double, double>> column;  // (x, y)
  std::vector<std::size_t> features(n_features);

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const auto& s = cur.samples;
    const double node_mean = mean_of(y, s);
    bool pure = true;
    for (std::size_t i : s) {
      if (y[i] != y[s[0]]) {
        pure = false;
        break;
      }
    }
    SplitChoice best;
    if (!pure && s.size() >= 2 * min_leaf) {
      std::iota(features.begin(), features.end(), 0);
      std::size_t visited = 0;
      // Features are drawn without replacement until mtry non-constant
      // ones have been examined.
      for (std::size_t k = 0; k < n_features && visited < mtry; ++k) {
        std::swap(features[k], features[k + rng.below(n_features - k)]);
        const std::size_t f = features[k];
        column.clear();
        for (std::size_t i : s) column.emplace_back(x(i, f), y[i]);
        std::sort(column.begin(), column.end());
        if (column.front().first == column.back().first) continue;
        ++visited;
        double total = 0;
        for (const auto& c : column) total += c.second;
        double left = 0;
        const std::size_t n = column.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
          left += column[i].second;
          const std::size_t nl = i + 1, nr = n - nl;
          if (column[i].first == column[i + 1].first) continue;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double right = total - left;
          const double score = left * left / nl + right * right / nr;
          if (score > best.score) {
            best.found = true;
            best.score = score;
            best.feature = static_cast<std::int32_t>(f);
            const double a = column[i].first, b = column[i + 1].first;
            double t = a + 0.5 * (b - a);
            if (!(t > a) || t > b) t = b;
            best.threshold = t;
          }
        }
      }
    }
    if (!best.found) {
      tree.nodes[cur.node] = TreeNode{-1, node_mean, -1, -1};
      continue;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i : s) {
      (x(i, best.feature) < best.threshold ? left : right).push_back(i);
    }
    const auto li = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    const auto ri = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[cur.node] = TreeNode{best.feature, best.threshold, li, ri};
    stack.push_back({ri, std::move(right)});
    stack.push_back({li, std::move(left)});
  }
  return tree;
}

// Column-major copy of the training matrix with every column's row order
// sorted by value; shared by all trees of one fit.
struct PresortedColumns {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;        // values[f * rows + r]
  std::vector<std::uint32_t> order;  // order[f * rows + k], stable by value

  explicit PresortedColumns(const Matrix& x) : rows(x.rows()), cols(x.cols()) {
    values.resize(rows * cols);
    order.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t f = 0; f < cols; ++f) values[f * rows + r] = x(r, f);
    }
    for (std::size_t f = 0; f < cols; ++f) {
      auto* o = order.data() + f * rows;
      std::iota(o, o + rows, 0u);
      const double* v = values.data() + f * rows;
      std::stable_sort(o, o + rows, [v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    }
  }
};

// Keeps every feature's sample list sorted through stable partitioning,
// so no node sorts. Cheapest when most features are examined per node.
RegressionTree grow_tree_presorted(const PresortedColumns& pc, std::span<const double> y,
                                   std::span<const std::size_t> bootstrap, std::size_t mtry,
                                   int min_samples_leaf, Rng& rng) {
  const std::size_t n_features = pc.cols;
  const std::size_t n = bootstrap.size();
  const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, min_samples_leaf));

  // Slots are the bootstrap draws; rows drawn k times own k slots.
  std::vector<std::uint32_t> first_slot(pc.rows + 1, 0);
  for (std::size_t r : bootstrap) ++first_slot[r + 1];
  for (std::size_t r = 0; r < pc.rows; ++r) first_slot[r + 1] += first_slot[r];
  std::vector<std::uint32_t> slot_row(n);
  {
    std::vector<std::uint32_t> fill(first_slot.begin(), first_slot.end() - 1);
    for (std::size_t r : bootstrap) slot_row[fill[r]++] = static_cast<std::uint32_t>(r);
  }
  std::vector<double> slot_y(n);
  for (std::size_t s = 0; s < n; ++s) slot_y[s] = y[slot_row[s]];

  // Per feature: slot ids and their values, both in ascending value order.
  std::vector<std::uint32_t> lists(n_features * n);
  std::vector<double> sorted_values(n_features * n);
  for (std::size_t f = 0; f < n_features; ++f) {
    std::uint32_t* out = lists.data() + f * n;
    double* out_v = sorted_values.data() + f * n;
    const std::uint32_t* o = pc.order.data() + f * pc.rows;
    const double* v = pc.values.data() + f * pc.rows;
    for (std::size_t k = 0; k < pc.rows; ++k) {
      for (std::uint32_t s = first_slot[o[k]]; s < first_slot[o[k] + 1]; ++s) {
        *out++ = s;
        *out_v++ = v[o[k]];
      }
    }
  }

  RegressionTree tree;
  struct Pending {
    std::int32_t node;
    std::size_t begin, end;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, 0, n});
  std::vector<std::size_t> features(n_features);
  std::vector<char> goes_left(n);
  std::vector<std::uint32_t> tmp(n);
  std::vector<double> tmp_v(n);

  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    const std::size_t count = cur.end - cur.begin;
    const std::uint32_t* any = lists.data() + cur.begin;
    double total = 0;
    bool pure = true;
    for (std::size_t k = 0; k < count; ++k) {
      total += slot_y[any[k]];
      if (slot_y[any[k]] != slot_y[any[0]]) pure = false;
    }
    const double node_mean = total / static_cast<double>(count);
    SplitChoice best;
    if (!pure && count >= 2 * min_leaf) {
      std::iota(features.begin(), features.end(), 0);
      std::size_t visited = 0;
      for (std::size_t k = 0; k < n_features && visited < mtry; ++k) {
        std::swap(features[k], features[k + rng.below(n_features - k)]);
        const std::size_t f = features[k];
        const std::uint32_t* list = lists.data() + f * n + cur.begin;
        const double* value = sorted_values.data() + f * n + cur.begin;
        if (value[0] == value[count - 1]) continue;
        ++visited;
        double left = 0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
          left += slot_y[list[i]];
          const std::size_t nl = i + 1, nr = count - nl;
          const double a = value[i], b = value[i + 1];
          if (a == b) continue;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double right = total - left;
          const double score = left * left / nl + right * right / nr;
          if (score > best.score) {
            best.found = true;
            best.score = score;
            best.feature = static_cast<std::int32_t>(f);
            double t = a + 0.5 * (b - a);
            if (!(t > a) || t > b) t = b;
            best.threshold = t;
          }
        }
      }
    }
    if (!best.found) {
      tree.nodes[cur.node] = TreeNode{-1, node_mean, -1, -1};
      continue;
    }
    const double* v = pc.values.data() + best.feature * pc.rows;
    std::size_t n_left = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint32_t s = any[k];
      goes_left[s] = v[slot_row[s]] < best.threshold;
      n_left += goes_left[s];
    }
    // Children too small to split only read feature 0's list.
    const bool leaves_only = n_left < 2 * min_leaf && count - n_left < 2 * min_leaf;
    for (std::size_t f = 0; f < (leaves_only ? 1 : n_features); ++f) {
      std::uint32_t* list = lists.data() + f * n + cur.begin;
      double* value = sorted_values.data() + f * n + cur.begin;
      std::size_t l = 0, r = 0;
      for (std::size_t k = 0; k < count; ++k) {
        if (goes_left[list[k]]) {
          value[l] = value[k];
          list[l++] = list[k];
        } else {
          tmp_v[r] = value[k];
          tmp[r++] = list[k];
        }
      }
      std::copy_n(tmp.begin(), r, list + l);
      std::copy_n(tmp_v.begin(), r, value + l);
    }
    const auto li = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    const auto ri = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[cur.node] = TreeNode{best.feature, best.threshold, li, ri};
    stack.push_back({ri, cur.begin + n_left, cur.end});
    stack.push_back({li, cur.begin, cur.begin + n_left});
  }
  return tree;
}

// Presorting pays off once the examined features outnumber
// n_features / log2(n).
bool prefer_presorted(std::size_t mtry, std::size_t n_features, std::size_t n) {
  const double log_n = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  return static_cast<double>(mtry) * log_n > static_cast<double>(n_features);
}

}  // namespace

RegressionTree grow_tree(const Matrix& x, std::span<const double> y,
                         std::span<const std::size_t> bootstrap, std::size_t mtry,
                         int min_samples_leaf, Rng& rng) {
  if (prefer_presorted(mtry, x.cols(), bootstrap.size())) {
    return grow_tree_presorted(PresortedColumns(x), y, bootstrap, mtry, min_samples_leaf, rng);
  }
  return grow_tree_sorting(x, y, bootstrap, mtry, min_samples_leaf, rng);
}

namespace {

void check_training_data(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) {
    throw UsageError(fmt::format("{} feature rows but {} targets", x.rows(), y.size()));
  }
  if (x.rows() < 2 || x.cols() == 0) throw UsageError("forest needs at least 2 rows and 1 feature");
  std::vector<std::size_t> bad;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (!std::isfinite(x(r, c))) {
        bad.push_back(c);
        break;
      }
    }
  }
  if (!bad.empty()) {
    throw UsageError(fmt::format("non-finite feature values in column(s) {}", fmt::join(bad, ", ")));
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw UsageError("non-finite target value");
  }
}

// Trees [0, count) for a seed. Each tree owns its generator.
std::vector<RegressionTree> grow_trees(const Matrix& x, std::span<const double> y,
                                       const ForestParams& p, std::uint64_t seed, int count,
                                       unsigned threads,
                                       std::vector<std::vector<std::size_t>>* bags = nullptr) {
  std::vector<RegressionTree> trees(count);
  if (bags) bags->assign(count, {});
  const std::size_t mtry = resolve_max_features(p.max_features, x.cols());
  std::optional<PresortedColumns> presorted;
  if (prefer_presorted(mtry, x.cols(), x.rows())) presorted.emplace(x);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t t) {
    Rng rng(seed + t);
    auto boot = bootstrap_sample(x.rows(), rng);
    trees[t] = presorted ? grow_tree_presorted(*presorted, y, boot, mtry, p.min_samples_leaf, rng)
                         : grow_tree_sorting(x, y, boot, mtry, p.min_samples_leaf, rng);
    if (bags) (*bags)[t] = std::move(boot);
  });
  return trees;
}

}  // namespace

ForestModel fit_forest(const Matrix& x, std::span<const double> y, const ForestParams& params,
                       std::uint64_t seed, const std::string& layout_version, unsigned threads) {
  check_training_data(x, y);
  if (params.n_estimators < 1) throw UsageError("n_estimators must be >= 1");
  ForestModel m;
  m.params = params;
  m.seed = seed;
  m.feature_layout_version = layout_version;
  m.n_features = x.cols();
  m.trees = grow_trees(x, y, params, seed, params.n_estimators, threads);
  return m;
}

double oob_mse(const Matrix& x, std::span<const double> y, const ForestParams& params,
               std::uint64_t seed, unsigned threads) {
  check_training_data(x, y);
  std::vector<std::vector<std::size_t>> bags;
  const auto trees = grow_trees(x, y, params, seed, params.n_estimators, threads, &bags);
  std::vector<double> sum(x.rows(), 0.0);
  std::vector<int> count(x.rows(), 0);
  std::vector<char> in_bag(x.rows());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (std::size_t i : bags[t]) in_bag[i] = 1;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (in_bag[r]) continue;
      sum[r] += trees[t].predict(x.row(r));
      ++count[r];
    }
  }
  double se = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (count[r] == 0) continue;
    const double d = sum[r] / count[r] - y[r];
    se += d * d;
    ++n;
  }
  if (n == 0) throw DegenerateInputError("no out-of-bag rows");
  return se / static_cast<double>(n);
}

namespace {

std::vector<int> make_folds(std::size_t rows, int k, const std::optional<std::vector<std::string>>& groups,
                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> fold(rows, 0);
  if (groups) {
    if (groups->size() != rows) throw UsageError("group ids do not match row count");
    std::vector<std::string> uniq;
    std::map<std::string, std::size_t> index;
    for (const auto& g : *groups) {
      if (index.emplace(g, uniq.size()).second) uniq.push_back(g);
    }
    std::vector<std::size_t> order(uniq.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const int kk = std::min<int>(k, static_cast<int>(uniq.size()));
    std::vector<int> group_fold(uniq.size());
    for (std::size_t i = 0; i < order.size(); ++i) group_fold[order[i]] = static_cast<int>(i % kk);
    for (std::size_t r = 0; r < rows; ++r) fold[r] = group_fold[index.at((*groups)[r])];
  } else {
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const int kk = std::min<int>(k, static_cast<int>(rows));
    for (std::size_t i = 0; i < rows; ++i) fold[order[i]] = static_cast<int>(i % kk);
  }
  return fold;
}

}  // namespace

ForestModel train_forest(const Matrix& x, std::span<const double> y, const HyperGrid& grid,
                         std::uint64_t seed, const std::string& layout_version,
                         const TrainOptions& opts, CvResult* cv) {
  check_training_data(x, y);
  if (x.rows() < 10) {
    throw UsageError(fmt::format("training needs at least 10 rows, got {}", x.rows()));
  }
  if (grid.n_estimators.empty() || grid.max_features.empty() || grid.folds < 2) {
    throw UsageError("empty hyperparameter grid");
  }
  std::vector<int> n_est = grid.n_estimators;
  std::sort(n_est.begin(), n_est.end());
  const int max_trees = n_est.back();
  const std::vector<int> fold = make_folds(x.rows(), grid.folds, opts.groups, seed);
  const int n_folds = *std::max_element(fold.begin(), fold.end()) + 1;

  // srcc_sum[mode][n_est index]
  std::vector<std::vector<double>> srcc_sum(grid.max_features.size(),
                                            std::vector<double>(n_est.size(), 0.0));
  for (int f = 0; f < n_folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t r = 0; r < x.rows(); ++r) (fold[r] == f ? test_idx : train_idx).push_back(r);
    if (test_idx.empty() || train_idx.size() < 2) continue;
    const Matrix xt = x.select_rows(train_idx);
    std::vector<double> yt;
    for (std::size_t r : train_idx) yt.push_back(y[r]);
    for (std::size_t m = 0; m < grid.max_features.size(); ++m) {
      ForestParams p{max_trees, grid.max_features[m], grid.min_samples_leaf};
      // Forests with fewer trees are prefixes of the largest one.
      const auto trees = grow_trees(xt, yt, p, seed, max_trees, opts.threads);
      std::vector<double> acc(test_idx.size(), 0.0);
      std::vector<double> truth;
      for (std::size_t r : test_idx) truth.push_back(y[r]);
      int grown = 0;
      for (std::size_t e = 0; e < n_est.size(); ++e) {
        for (; grown < n_est[e]; ++grown) {
          for (std::size_t i = 0; i < test_idx.size(); ++i) acc[i] += trees[grown].predict(x.row(test_idx[i]));
        }
        std::vector<double> pred(acc);
        for (double& v : pred) v /= n_est[e];
        double s = 0;
        try {
          s = srcc(pred, truth);
        } catch (const std::exception&) {
          s = 0;  // constant predictions or too few held-out rows
        }
        srcc_sum[m][e] += s;
      }
    }
  }

  CvResult best{{n_est.front(), grid.max_features.front(), grid.min_samples_leaf},
                -std::numeric_limits<double>::infinity()};
  for (std::size_t e = 0; e < n_est.size(); ++e) {
    for (std::size_t m = 0; m < grid.max_features.size(); ++m) {
      const double score = srcc_sum[m][e] / n_folds;
      if (score > best.mean_srcc) {
        best = {{n_est[e], grid.max_features[m], grid.min_samples_leaf}, score};
      }
    }
  }
  if (cv) *cv = best;
  return fit_forest(x, y, best.params, seed, layout_version, opts.threads);
}

std::vector<double> predict(const ForestModel& model, const Matrix& x,
                            const std::string& layout_version) {
  if (layout_version != model.feature_layout_version) {
    throw LayoutMismatchError(fmt::format("model expects layout '{}', features are '{}'",
                                          model.feature_layout_version, layout_version));
  }
  if (x.cols() != model.n_features) {
    throw LayoutMismatchError(fmt::format("model expects {} features, got {}", model.n_features,
                                          x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = model.predict_row(x.row(r));
  return out;
}

// ---------------------------------------------------------------------------
// Binary model file, little-endian:
//   "HVQAFRST" u32 version | str layout | u32 n_estimators | u8 max_features
//   | i32 min_leaf | u64 seed | u64 n_features | u32 n_trees
//   | per tree: u32 n_nodes, per node: i32 feature, f64 value, i32 left,
//     i32 right
// Strings are u32 length + bytes.

namespace {

constexpr char kMagic[8] = {'H', 'V', 'Q', 'A', 'F', 'R', 'S', 'T'};

class Writer {
 public:
  std::vector<unsigned char> bytes;
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    bytes.insert(bytes.end(), buf, buf + sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> b) : b_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, b_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw FormatError("forest model file is truncated");
  }
  std::span<const unsigned char> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> serialize_forest(const ForestModel& model) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic, kMagic + 8);
  w.put<std::uint32_t>(kForestFormatVersion);
  w.put_string(model.feature_layout_version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.params.n_estimators));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.params.max_features));
  w.put<std::int32_t>(model.params.min_samples_leaf);
  w.put<std::uint64_t>(model.seed);
  w.put<std::uint64_t>(model.n_features);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& t : model.trees) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.put<std::int32_t>(n.feature);
      w.put<double>(n.value);
      w.put<std::int32_t>(n.left);
      w.put<std::int32_t>(n.right);
    }
  }
  return std::move(w.bytes);
}

ForestModel deserialize_forest(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || !std::equal(kMagic, kMagic + 8, bytes.begin())) {
    throw FormatError("not a forest model file");
  }
  Reader r(bytes.subspan(8));
  const auto version = r.get<std::uint32_t>();
  if (version != kForestFormatVersion) {
    throw FormatError(fmt::format("forest model version {} unsupported", version));
  }
  ForestModel m;
  m.feature_layout_version = r.get_string();
  m.params.n_estimators = static_cast<int>(r.get<std::uint32_t>());
  const auto mf = r.get<std::uint8_t>();
  if (mf > 2) throw FormatError("bad max_features code");
  m.params.max_features = static_cast<MaxFeatures>(mf);
  m.params.min_samples_leaf = r.get<std::int32_t>();
  m.seed = r.get<std::uint64_t>();
  m.n_features = r.get<std::uint64_t>();
  const auto n_trees = r.get<std::uint32_t>();
  m.trees.resize(n_trees);
  for (auto& t : m.trees) {
    const auto n_nodes = r.get<std::uint32_t>();
    if (n_nodes == 0) throw FormatError("empty tree in model file");
    t.nodes.resize(n_nodes);
    for (auto& n : t.nodes) {
      n.feature = r.get<std::int32_t>();
      n.value = r.get<double>();
      n.left = r.get<std::int32_t>();
      n.right = r.get<std::int32_t>();
      const auto lim = static_cast<std::int32_t>(n_nodes);
      if (n.feature >= 0 && (n.left <= 0 || n.left >= lim || n.right <= 0 || n.right >= lim ||
                             static_cast<std::uint64_t>(n.feature) >= m.n_features)) {
        throw FormatError("corrupt tree node in model file");
      }
    }
  }
  if (!r.done()) throw FormatError("trailing bytes in forest model file");
  return m;
}

void save_forest(const ForestModel& model, const std::string& path) {
  const auto bytes = serialize_forest(model);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(fmt::format("write to '{}' failed", path));
}

ForestModel load_forest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(fmt::format("cannot open model '{}'", path));
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize_forest(bytes);
}

Matrix augment_device_index(const Matrix& x, std::span<const int> device_ids) {
  if (device_ids.size() != x.rows()) {
    throw UsageError(fmt::format("{} device ids for {} rows", device_ids.size(), x.rows()));
  }
  Matrix out(x.rows(), x.cols() + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int d = device_ids[r];
    if (d < 1 || d > 3) throw UsageError(fmt::format("unknown device id {} (expected 1, 2 or 3)", d));
    std::copy(x.row(r).begin(), x.row(r).end(), out.row(r).begin());
    out(r, x.cols()) = d;
  }
  return out;
}

std::string augmented_layout(const std::string& layout_version) { return layout_version + "+tv"; }

std::vector<SplitSpec> make_splits(std::span<const std::string> content_ids, double train_ratio,
                                   int n_trials, std::uint64_t seed) {
  std::vector<std::string> uniq;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < content_ids.size(); ++i) {
    auto& m = members[content_ids[i]];
    if (m.empty()) uniq.push_back(content_ids[i]);
    m.push_back(i);
  }
  if (uniq.size() < 2) {
    throw UsageError(fmt::format("content-aware splits need at least 2 contents, got {}", uniq.size()));
  }
  if (uniq.size() < 5) spdlog::warn("only {} distinct contents; splits will be coarse", uniq.size());
  if (!(train_ratio > 0 && train_ratio < 1)) throw UsageError("train ratio must be in (0, 1)");
  const double target = train_ratio * static_cast<double>(content_ids.size());
  std::vector<SplitSpec> out;
  out.reserve(n_trials);
  for (int t = 0; t < n_trials; ++t) {
    SplitSpec s;
    s.trial_seed = seed + static_cast<std::uint64_t>(t);
    Rng rng(s.trial_seed);
    std::vector<std::string> order = uniq;
    rng.shuffle(order);
    std::size_t taken = 0, n_train = 0;
    while (taken + 1 < order.size() && static_cast<double>(n_train) < target) {
      n_train += members[order[taken]].size();
      ++taken;
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
      auto& dst = k < taken ? s.train : s.test;
      const auto& m = members[order[k]];
      dst.insert(dst.end(), m.begin(), m.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hdrvqa
