#include "hdrvqa/subjective.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hdrvqa/csv.h"
#include "hdrvqa/error.h"
#include "hdrvqa/forest.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/simplex.h"
#include "hdrvqa/stats.h"

namespace hdrvqa {

SubjectScoreTable SubjectScoreTable::read_csv(const std::string& path) {
  const CsvTable t = hdrvqa::read_csv(path);
  const auto cs = t.column("subject_id"), cv = t.column("video_id"), cd = t.column("device_id"),
             cscore = t.column("score");
  SubjectScoreTable out;
  std::set<std::tuple<std::string, std::string, int>> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string ctx = fmt::format("{} row {}", path, i + 1);
    ScoreRecord rec{r[cs], r[cv], static_cast<int>(parse_long(r[cd], ctx)), parse_double(r[cscore], ctx)};
    if (!std::isfinite(rec.score)) throw FormatError(ctx + ": non-finite score");
    if (!seen.emplace(rec.subject, rec.video, rec.device).second) {
      throw FormatError(fmt::format("{}: duplicate score for subject {} video {} device {}", ctx,
                                    rec.subject, rec.video, rec.device));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

void SubjectScoreTable::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << "subject_id,video_id,device_id,score\n";
  for (const auto& r : records) {
    os << r.subject << ',' << r.video << ',' << r.device << ',' << format_double(r.score) << '\n';
  }
}

double MosSolution::psi_of(const std::string& video, int device) const {
  const Stimulus key{video, device};
  const auto it = std::lower_bound(stimuli.begin(), stimuli.end(), key);
  if (it == stimuli.end() || *it != key) {
    throw Error(fmt::format("no score for video '{}' on device {}", video, device));
  }
  return psi[it - stimuli.begin()];
}

namespace {

struct Obs {
  std::size_t subject;
  std::size_t stimulus;
  double u;
};

double log_likelihood(const std::vector<Obs>& obs, const std::vector<double>& psi,
                      const std::vector<double>& delta, const std::vector<double>& nu2) {
  double ll = 0;
  for (const auto& o : obs) {
    const double r = o.u - psi[o.stimulus] - delta[o.subject];
    ll += -0.5 * std::log(2 * std::numbers::pi * nu2[o.subject]) - r * r / (2 * nu2[o.subject]);
  }
  return ll;
}

}  // namespace

MosSolution solve_mos(const SubjectScoreTable& table, int max_sweeps, double tol) {
  MosSolution sol;
  {
    std::set<std::string> subj;
    std::set<Stimulus> stim;
    for (const auto& r : table.records) {
      subj.insert(r.subject);
      stim.insert({r.video, r.device});
    }
    sol.subjects.assign(subj.begin(), subj.end());
    sol.stimuli.assign(stim.begin(), stim.end());
  }
  if (sol.subjects.empty()) throw UsageError("score table is empty");
  const std::size_t ns = sol.subjects.size(), nj = sol.stimuli.size();

  std::vector<Obs> obs;
  obs.reserve(table.records.size());
  for (const auto& r : table.records) {
    const auto i = std::lower_bound(sol.subjects.begin(), sol.subjects.end(), r.subject) - sol.subjects.begin();
    const auto j = std::lower_bound(sol.stimuli.begin(), sol.stimuli.end(), Stimulus{r.video, r.device}) -
                   sol.stimuli.begin();
    obs.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), r.score});
  }
  // Canonical order makes every sum independent of the input row order.
  std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) {
    return std::tie(a.stimulus, a.subject) < std::tie(b.stimulus, b.subject);
  });
  for (std::size_t k = 1; k < obs.size(); ++k) {
    if (obs[k].stimulus == obs[k - 1].stimulus && obs[k].subject == obs[k - 1].subject) {
      throw UsageError(fmt::format("subject {} rated video {} on device {} twice",
                                   sol.subjects[obs[k].subject], sol.stimuli[obs[k].stimulus].video,
                                   sol.stimuli[obs[k].stimulus].device));
    }
  }
  std::vector<int> per_subject(ns, 0), per_stimulus(nj, 0);
  for (const auto& o : obs) {
    ++per_subject[o.subject];
    ++per_stimulus[o.stimulus];
  }
  for (std::size_t j = 0; j < nj; ++j) {
    if (per_stimulus[j] < 2) {
      throw UsageError(fmt::format("video {} on device {} has {} rating(s); need at least 2",
                                   sol.stimuli[j].video, sol.stimuli[j].device, per_stimulus[j]));
    }
  }
  for (std::size_t i = 0; i < ns; ++i) {
    if (per_subject[i] < 2) {
      throw UsageError(fmt::format("subject {} rated {} video(s); need at least 2", sol.subjects[i],
                                   per_subject[i]));
    }
  }

  std::vector<double> psi(nj, 0.0), delta(ns, 0.0), nu2(ns, 1.0);
  for (const auto& o : obs) psi[o.stimulus] += o.u;
  for (std::size_t j = 0; j < nj; ++j) psi[j] /= per_stimulus[j];

  auto update_nu = [&] {
    std::fill(nu2.begin(), nu2.end(), 0.0);
    for (const auto& o : obs) {
      const double r = o.u - psi[o.stimulus] - delta[o.subject];
      nu2[o.subject] += r * r;
    }
    for (std::size_t i = 0; i < ns; ++i) nu2[i] = std::max(nu2[i] / per_subject[i], kNuSquaredFloor);
  };
  update_nu();
  double ll = log_likelihood(obs, psi, delta, nu2);

  std::vector<double> num(nj), den(nj);
  for (sol.sweeps = 1; sol.sweeps <= max_sweeps; ++sol.sweeps) {
    std::fill(num.begin(), num.end(), 0.0);
    std::fill(den.begin(), den.end(), 0.0);
    for (const auto& o : obs) {
      const double w = 1.0 / nu2[o.subject];
      num[o.stimulus] += w * (o.u - delta[o.subject]);
      den[o.stimulus] += w;
    }
    for (std::size_t j = 0; j < nj; ++j) psi[j] = num[j] / den[j];

    std::fill(delta.begin(), delta.end(), 0.0);
    for (const auto& o : obs) delta[o.subject] += o.u - psi[o.stimulus];
    double shift = 0;
    for (std::size_t i = 0; i < ns; ++i) {
      delta[i] /= per_subject[i];
      shift += delta[i];
    }
    shift /= static_cast<double>(ns);
    for (double& d : delta) d -= shift;
    for (double& p : psi) p += shift;

    update_nu();
    const double next = log_likelihood(obs, psi, delta, nu2);
    sol.ll_history.push_back(next);
    if (next < ll - 1e-9 * std::max(1.0, std::abs(ll))) {
      throw Error(fmt::format("solve_mos: log-likelihood fell from {} to {} at sweep {}", ll, next,
                              sol.sweeps));
    }
    const double gain = next - ll;
    ll = next;
    if (gain < tol) {
      sol.converged = true;
      break;
    }
  }
  sol.sweeps = std::min(sol.sweeps, max_sweeps);
  if (!sol.converged) spdlog::warn("solve_mos: no convergence after {} sweeps", max_sweeps);
  for (std::size_t i = 0; i < ns; ++i) {
    if (nu2[i] <= kNuSquaredFloor) {
      sol.floored_subjects.push_back(sol.subjects[i]);
      spdlog::warn("solve_mos: subject {} has no residual spread; nu held at the floor",
                   sol.subjects[i]);
    }
  }
  sol.psi = std::move(psi);
  sol.delta = std::move(delta);
  sol.nu.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) sol.nu[i] = std::sqrt(nu2[i]);
  sol.log_likelihood = ll;
  return sol;
}

std::vector<DmosEntry> dmos(const MosSolution& mos,
                            const std::map<std::string, std::string>& reference_of) {
  std::vector<DmosEntry> out;
  for (std::size_t j = 0; j < mos.stimuli.size(); ++j) {
    const Stimulus& s = mos.stimuli[j];
    const auto it = reference_of.find(s.video);
    if (it == reference_of.end()) {
      throw Error(fmt::format("video '{}' has no reference entry", s.video));
    }
    const Stimulus ref{it->second, s.device};
    const auto r = std::lower_bound(mos.stimuli.begin(), mos.stimuli.end(), ref);
    if (r == mos.stimuli.end() || *r != ref) {
      throw Error(fmt::format("reference '{}' of video '{}' was not rated on device {}", ref.video,
                              s.video, s.device));
    }
    out.push_back({s, ref.video, mos.psi[j] - mos.psi[r - mos.stimuli.begin()]});
  }
  return out;
}

InternalCorrelation internal_correlation(const SubjectScoreTable& table, int device, int n_trials,
                                         std::uint64_t seed, unsigned threads) {
  std::map<std::string, std::vector<const ScoreRecord*>> by_subject;
  std::map<std::string, std::size_t> video_index;
  for (const auto& r : table.records) {
    if (r.device != device) continue;
    by_subject[r.subject].push_back(&r);
    video_index.emplace(r.video, 0);
  }
  std::size_t nv = 0;
  for (auto& [v, idx] : video_index) idx = nv++;

  InternalCorrelation result;
  // z[subject][video], NaN when unrated
  std::vector<std::vector<double>> z;
  for (const auto& [subject, recs] : by_subject) {
    std::vector<double> s;
    for (const auto* r : recs) s.push_back(r->score);
    const double sd = s.size() >= 2 ? stddev(s) : 0.0;
    if (!(sd > 0)) {
      result.excluded_subjects.push_back(subject);
      spdlog::warn("internal correlation: subject {} has no score variance; excluded", subject);
      continue;
    }
    const double mu = mean(s);
    std::vector<double> row(nv, std::numeric_limits<double>::quiet_NaN());
    for (const auto* r : recs) row[video_index.at(r->video)] = (r->score - mu) / sd;
    z.push_back(std::move(row));
  }
  if (z.size() < 4) {
    throw UsageError(fmt::format("internal correlation needs at least 4 subjects on device {}, got {}",
                                 device, z.size()));
  }
  if (n_trials < 1) throw UsageError("n_trials must be positive");

  std::vector<double> r_trial(n_trials, std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(n_trials), threads, [&](std::size_t t) {
    Rng rng(seed + t);
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t half = z.size() / 2;
    std::vector<double> a, b;
    for (std::size_t v = 0; v < nv; ++v) {
      double sa = 0, sb = 0;
      int na = 0, nb = 0;
      for (std::size_t k = 0; k < 2 * half; ++k) {
        const double x = z[order[k]][v];
        if (std::isnan(x)) continue;
        if (k < half) {
          sa += x;
          ++na;
        } else {
          sb += x;
          ++nb;
        }
      }
      if (na > 0 && nb > 0) {
        a.push_back(sa / na);
        b.push_back(sb / nb);
      }
    }
    try {
      r_trial[t] = plcc(a, b);
    } catch (const std::exception&) {
    }
  });
  for (double r : r_trial) {
    if (!std::isnan(r)) result.trial_r.push_back(r);
  }
  if (result.trial_r.empty()) throw DegenerateInputError("internal correlation: every trial failed");
  result.median_r = median(result.trial_r);
  return result;
}

double MergeMap::operator()(double x) const { return (a - b) / (1 + std::exp(-(x - c) / s)) + b; }

MergeMap fit_merge_map(std::span<const double> src, std::span<const double> dst, int max_iterations) {
  if (src.size() != dst.size()) throw UsageError("anchor score lists differ in length");
  if (src.size() < 6) {
    throw UsageError(fmt::format("merge map needs at least 6 anchor pairs, got {}", src.size()));
  }
  const auto [dmin, dmax] = std::minmax_element(dst.begin(), dst.end());
  if (*dmin == *dmax) throw DegenerateInputError("merge map: constant anchor scores (a = b)");
  const double sd = stddev(src);
  if (!(sd > 0)) throw DegenerateInputError("merge map: constant source scores");

  auto sse = [&](std::span<const double> p) {
    const MergeMap m{p[0], p[1], p[2], p[3]};
    double e = 0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double r = m(src[i]) - dst[i];
      e += r * r;
    }
    return e;
  };
  const std::vector<double> x0 = {*dmax, *dmin, mean(src), sd / 4};
  const double range = *dmax - *dmin;
  const std::vector<double> step = {0.1 * range, 0.1 * range, 0.1 * sd, 0.1 * sd};
  SimplexOptions opts;
  opts.max_iterations = max_iterations;
  opts.rel_tol = 1e-10;
  const SimplexResult r = nelder_mead(sse, x0, step, opts);
  MergeMap m{r.x[0], r.x[1], r.x[2], r.x[3]};
  m.iterations = r.iterations;
  m.rmse = std::sqrt(r.f / static_cast<double>(src.size()));
  if (!r.converged) {
    throw Error(fmt::format("merge map did not converge in {} iterations; best so far a={} b={} c={} "
                            "s={} rmse={}",
                            max_iterations, m.a, m.b, m.c, m.s, m.rmse));
  }
  return m;
}

}  // namespace hdrvqa
