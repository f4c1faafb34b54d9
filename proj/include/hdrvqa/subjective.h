#ifndef HDRVQA_SUBJECTIVE_H_
#define HDRVQA_SUBJECTIVE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hdrvqa {

struct ScoreRecord {
  std::string subject;
  std::string video;
  int device = 1;
  double score = 0;
};

// Sparse raw opinion scores keyed by (subject, video, device).
struct SubjectScoreTable {
  std::vector<ScoreRecord> records;

  // CSV with header subject_id,video_id,device_id,score. Duplicate
  // (subject, video, device) keys are rejected.
  static SubjectScoreTable read_csv(const std::string& path);
  void write_csv(const std::string& path) const;
};

// A (video, device) pair: one Psi value.
struct Stimulus {
  std::string video;
  int device = 1;
  auto operator<=>(const Stimulus&) const = default;
};

struct MosSolution {
  std::vector<Stimulus> stimuli;       // sorted
  std::vector<double> psi;             // per stimulus
  std::vector<std::string> subjects;   // sorted
  std::vector<double> delta;           // per subject, sums to 0
  std::vector<double> nu;              // per subject, std
  double log_likelihood = 0;
  std::vector<double> ll_history;      // after each sweep
  int sweeps = 0;
  bool converged = false;
  std::vector<std::string> floored_subjects;

  // Throws Error when the stimulus is unknown.
  double psi_of(const std::string& video, int device) const;
};

inline constexpr double kNuSquaredFloor = 1e-4;

// Maximum-likelihood recovery of u_ij ~ N(Psi_j + Delta_i, nu_i^2) by
// alternating closed-form coordinate updates. Subjects and stimuli are
// processed in sorted order, so the result does not depend on record
// order. Throws Error if a sweep ever lowers the log-likelihood.
MosSolution solve_mos(const SubjectScoreTable& table, int max_sweeps = 1000, double tol = 1e-9);

struct DmosEntry {
  Stimulus stimulus;
  std::string reference;
  double dmos = 0;
};

// reference_of maps each video to its reference video (references map to
// themselves). DMOS = Psi(video, device) - Psi(reference, device).
std::vector<DmosEntry> dmos(const MosSolution& mos,
                            const std::map<std::string, std::string>& reference_of);

struct InternalCorrelation {
  double median_r = 0;
  std::vector<double> trial_r;  // failed trials omitted
  std::vector<std::string> excluded_subjects;
};

// Random half-split agreement of per-subject z-scores on one device.
InternalCorrelation internal_correlation(const SubjectScoreTable& table, int device,
                                         int n_trials = 100, std::uint64_t seed = 0,
                                         unsigned threads = 1);

struct MergeMap {
  double a = 0, b = 0, c = 0, s = 1;
  double rmse = 0;
  int iterations = 0;
  double operator()(double x) const;
};

// Fits f(x) = (a - b) / (1 + exp(-(x - c) / s)) + b to anchor pairs.
MergeMap fit_merge_map(std::span<const double> src, std::span<const double> dst,
                       int max_iterations = 5000);

}  // namespace hdrvqa

#endif  // HDRVQA_SUBJECTIVE_H_
