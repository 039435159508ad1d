#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lpdist/pindex.hpp"
#include "lpdist/sampler.hpp"

namespace lpdist {

// Sampling-work budget for batches that store their values: a request with
// trials * n above this must use the streaming tail estimator instead.
constexpr double kSampleBudget = 1e10;

struct SampleBatch {
  std::vector<double> values;
  PIndex p = PIndex::finite_value(2.0);
  int n = 1;
  DomainKind domain = DomainKind::BallInterior;
  uint64_t trials = 0;
  uint64_t seed = 0;
};

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (N-1)
  uint64_t count = 0;
  double std_error_mean = 0.0;
};

// One-pass central-moment accumulator (Welford, extended through the fourth
// moment) with a pairwise merge. Merged totals can differ from sequential
// ones in the last bits (floating reassociation), so anything that must be
// bit-stable is computed from stored per-trial values instead. Used for
// standard errors of variance estimates.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& o);
  uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance_unbiased() const;
  double central_moment2() const { return n_ ? m2_ / n_ : 0.0; }
  double central_moment4() const { return n_ ? m4_ / n_ : 0.0; }
  // Standard error of the unbiased variance, sqrt((m4 - s^4)/N).
  double std_error_variance() const;

 private:
  uint64_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

// trials draws of the normalized pair distance, trial i always on substream
// i of the seed, so the stored value vector is bit-identical for any worker
// count. Throws ResourceError when trials * n exceeds kSampleBudget.
SampleBatch run_batch(const PIndex& p, int n, DomainKind domain, uint64_t trials,
                      uint64_t seed, int workers);

MomentSummary empirical_moments(const SampleBatch& batch);
MomentSummary empirical_moments(const std::vector<double>& values);

// Kolmogorov-Smirnov distance between the sample and N(center, sigma2),
// both one-sided gaps evaluated at every sorted point.
double ks_distance(const std::vector<double>& values, double center, double sigma2);

// Same statistic against an arbitrary CDF.
double ks_statistic(const std::vector<double>& values, const std::function<double(double)>& cdf);

struct TailEstimate {
  double z = 0.0;
  double rate = 0.0;      // -ln(max(hits,1)/trials)/n
  uint64_t hits = 0;
  bool censored = false;  // hits == 0: rate is only a lower bound
};

// Streaming estimate of -(1/n) ln P(T_n >= z); never stores the sample.
// Same substream schedule as run_batch, so calls with equal seeds share
// their sample exactly (monotonicity in z holds across separate calls).
TailEstimate empirical_tail_rate(const PIndex& p, int n, DomainKind domain, double z,
                                 uint64_t trials, uint64_t seed, int workers = 0);

// Multi-threshold variant: one pass over the sample for all thresholds.
std::vector<TailEstimate> empirical_tail_rates(const PIndex& p, int n, DomainKind domain,
                                               const std::vector<double>& zs, uint64_t trials,
                                               uint64_t seed, int workers = 0);

// Effective worker count: explicit argument wins, then hardware concurrency.
int resolve_workers(int workers);

}  // namespace lpdist
