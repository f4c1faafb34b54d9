#include "hdrvqa/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hdrvqa/csv.h"
#include "hdrvqa/error.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/rng.h"
#include "hdrvqa/simplex.h"
#include "hdrvqa/stats.h"

namespace hdrvqa {

double logistic5(const LogisticParams& b, double s) {
  return (b[0] - b[1]) / (1 + std::exp(-(s - b[2]) / b[3])) + b[4];
}

namespace {

double sse(const LogisticParams& b, std::span<const double> pred, std::span<const double> mos) {
  double e = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = logistic5(b, pred[i]) - mos[i];
    e += r * r;
  }
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

}  // namespace

LogisticFit logistic_fit(std::span<const double> pred, std::span<const double> mos,
                         int max_iterations, double rel_tol) {
  if (pred.size() != mos.size()) throw UsageError("logistic fit: length mismatch");
  if (pred.size() < 6) {
    throw UsageError(fmt::format("logistic fit needs at least 6 points, got {}", pred.size()));
  }
  const auto [pmin, pmax] = std::minmax_element(pred.begin(), pred.end());
  if (*pmin == *pmax) throw DegenerateInputError("logistic fit: constant predictions");
  const auto [mmin, mmax] = std::minmax_element(mos.begin(), mos.end());
  const double b2 = *mmin;
  const double sd = stddev(pred);

  struct Candidate {
    LogisticParams beta;
    double sse;
    int iterations;
    bool converged;
  };
  SimplexOptions opts;
  opts.max_iterations = max_iterations;
  opts.rel_tol = rel_tol;
  auto run = [&](const LogisticParams& start) {
    auto f = [&](std::span<const double> p) {
      return sse({p[0], b2, p[1], p[2], p[3]}, pred, mos);
    };
    const double scale = std::max({std::abs(start[0] - b2), *mmax - *mmin, 1e-12});
    const std::vector<double> x0 = {start[0], start[2], start[3], start[4]};
    const std::vector<double> step = {0.1 * scale, 0.1 * sd, 0.1 * std::abs(start[3]), 0.1 * scale};
    const SimplexResult r = nelder_mead(f, x0, step, opts);
    const LogisticParams b{r.x[0], b2, r.x[1], r.x[2], r.x[3]};
    return Candidate{b, sse(b, pred, mos), r.iterations, r.converged};
  };

  std::vector<Candidate> candidates;
  candidates.push_back(run({*mmax, b2, mean(pred), sd / 4, 0.0}));

  // Straight-line fit embedded with a very wide logistic: over the data
  // range the curvature term is below 1e-12 of the slope term.
  const double pm = mean(pred), mm = mean(mos);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sxy += (pred[i] - pm) * (mos[i] - mm);
    sxx += (pred[i] - pm) * (pred[i] - pm);
  }
  const double q = sxy / sxx;
  const double k = 1e6 * (*pmax - *pmin);
  const double amp = 4 * k * q;
  const LogisticParams affine{b2 + amp, b2, pm, k, mm - amp / 2};
  candidates.push_back({affine, sse(affine, pred, mos), 0, true});
  candidates.push_back(run(affine));

  const auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [](const Candidate& a, const Candidate& b) { return a.sse < b.sse; });
  LogisticFit out;
  out.beta = best->beta;
  out.iterations = candidates.front().iterations;
  out.converged = best->converged;
  out.fitted.reserve(pred.size());
  for (double p : pred) out.fitted.push_back(logistic5(out.beta, p));
  if (!out.converged) spdlog::debug("logistic fit stopped at the iteration cap");
  return out;
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  return {median(std::vector<double>(values.begin(), values.end())), stddev(values)};
}

MetricReport evaluate_splits(const Matrix& x, std::span<const double> y,
                             std::span<const SplitSpec> splits, const std::string& layout_version,
                             const EvalOptions& opts, const std::vector<std::string>* content_ids) {
  if (x.rows() != y.size()) throw UsageError("feature rows and targets differ in count");
  if (content_ids && content_ids->size() != y.size()) throw UsageError("content ids differ in count");
  MetricReport report;
  report.trials.resize(splits.size());
  parallel_for(splits.size(), opts.threads, [&](std::size_t t) {
    const SplitSpec& s = splits[t];
    TrialResult& r = report.trials[t];
    r.trial = static_cast<int>(t);
    r.seed = s.trial_seed;
    r.test_rows = s.test;
    try {
      const Matrix xtr = x.select_rows(s.train);
      const Matrix xte = x.select_rows(s.test);
      std::vector<double> yall(y.begin(), y.end());
      if (opts.shuffle_seed) {
        Rng rng(*opts.shuffle_seed + 0x9e3779b97f4a7c15ULL * (t + 1));
        rng.shuffle(yall);
      }
      std::vector<double> ytr, yte;
      for (auto i : s.train) ytr.push_back(yall[i]);
      for (auto i : s.test) yte.push_back(yall[i]);
      ForestModel model;
      if (opts.cross_validate) {
        TrainOptions to;
        if (content_ids) {
          std::vector<std::string> g;
          for (auto i : s.train) g.push_back((*content_ids)[i]);
          to.groups = std::move(g);
        }
        model = train_forest(xtr, ytr, opts.grid, s.trial_seed, layout_version, to);
      } else {
        model = fit_forest(xtr, ytr, opts.fixed, s.trial_seed, layout_version);
      }
      r.params = model.params;
      r.pred = predict(model, xte, layout_version);
      r.srcc = srcc(r.pred, yte);
      const LogisticFit fit = logistic_fit(r.pred, yte);
      r.beta = fit.beta;
      r.fit_converged = fit.converged;
      r.fitted = fit.fitted;
      r.plcc = plcc(r.fitted, yte);
      r.rmse = rmse(r.fitted, yte);
      r.targets = std::move(yte);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  });
  std::vector<double> s, p, e;
  for (const auto& r : report.trials) {
    if (!r.ok) {
      ++report.failed;
      spdlog::warn("trial {} failed: {}", r.trial, r.error);
      continue;
    }
    s.push_back(r.srcc);
    p.push_back(r.plcc);
    e.push_back(r.rmse);
  }
  report.srcc = summarize(s);
  report.plcc = summarize(p);
  report.rmse = summarize(e);
  return report;
}

void write_trials_csv(const MetricReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << "trial,seed,status,srcc,plcc,rmse,beta1,beta2,beta3,beta4,beta5,fit_converged,"
        "n_estimators,max_features,error\n";
  for (const auto& r : report.trials) {
    os << r.trial << ',' << r.seed << ',' << (r.ok ? "ok" : "failed");
    if (r.ok) {
      os << ',' << format_double(r.srcc) << ',' << format_double(r.plcc) << ','
         << format_double(r.rmse);
      for (double b : r.beta) os << ',' << format_double(b);
      os << ',' << (r.fit_converged ? 1 : 0) << ',' << r.params.n_estimators << ','
         << to_string(r.params.max_features) << ',';
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << ",,,,,,,,,,,," << msg;
    }
    os << '\n';
  }
}

void write_summary_json(const MetricReport& report, const std::string& path) {
  auto block = [](const MetricSummary& m) { return nlohmann::json{{"median", m.median}, {"std", m.std}}; };
  const nlohmann::json j = {{"trials", report.trials.size()},
                            {"failed", report.failed},
                            {"srcc", block(report.srcc)},
                            {"plcc", block(report.plcc)},
                            {"rmse", block(report.rmse)}};
  std::ofstream os(path);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << j.dump(2) << '\n';
}

void write_scatter_csv(const MetricReport& report, std::span<const std::string> video_ids,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << "trial,video_id,pred,fitted,mos\n";
  for (const auto& r : report.trials) {
    if (!r.ok) continue;
    for (std::size_t k = 0; k < r.test_rows.size(); ++k) {
      const auto i = r.test_rows[k];
      os << r.trial << ',' << video_ids[i] << ',' << format_double(r.pred[k]) << ','
         << format_double(r.fitted[k]) << ',' << format_double(r.targets[k]) << '\n';
    }
  }
}

}  // namespace hdrvqa
