#include "lpdist/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lpdist/errors.hpp"
#include "lpdist/specfun.hpp"

namespace lpdist {
namespace {

constexpr uint64_t kTrialsPerBlock = 4096;

// Runs body(first_trial, last_trial, worker_index) over [0, trials) in
// blocks handed out by an atomic counter. Each trial's stream depends only
// on its index, so the partition never affects results.
template <typename Body>
void parallel_trials(uint64_t trials, int workers, const Body& body) {
  workers = resolve_workers(workers);
  if (workers <= 1 || trials <= kTrialsPerBlock) {
    body(0, trials, 0);
    return;
  }
  std::atomic<uint64_t> next_block{0};
  const uint64_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const uint64_t b = next_block.fetch_add(1);
        if (b >= blocks) return;
        const uint64_t lo = b * kTrialsPerBlock;
        const uint64_t hi = std::min(trials, lo + kTrialsPerBlock);
        body(lo, hi, w);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void MomentAccumulator::add(double x) {
  const uint64_t n1 = n_;
  n_ += 1;
  const double delta = x - mean_;
  const double dn = delta / static_cast<double>(n_);
  const double dn2 = dn * dn;
  const double term1 = delta * dn * static_cast<double>(n1);
  mean_ += dn;
  m4_ += term1 * dn2 * (static_cast<double>(n_) * n_ - 3.0 * n_ + 3.0) + 6.0 * dn2 * m2_ -
         4.0 * dn * m3_;
  m3_ += term1 * dn * (static_cast<double>(n_) - 2.0) - 3.0 * dn * m2_;
  m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double nc = na + nb;
  const double delta = o.mean_ - mean_;
  const double d2 = delta * delta;
  const double m2c = m2_ + o.m2_ + d2 * na * nb / nc;
  const double m3c = m3_ + o.m3_ + d2 * delta * na * nb * (na - nb) / (nc * nc) +
                     3.0 * delta * (na * o.m2_ - nb * m2_) / nc;
  const double m4c = m4_ + o.m4_ +
                     d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nc * nc * nc) +
                     6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (nc * nc) +
                     4.0 * delta * (na * o.m3_ - nb * m3_) / nc;
  mean_ += delta * nb / nc;
  m2_ = m2c;
  m3_ = m3c;
  m4_ = m4c;
  n_ += o.n_;
}

double MomentAccumulator::variance_unbiased() const {
  if (n_ < 2) return 0.0;
  return m2_ / static_cast<double>(n_ - 1);
}

double MomentAccumulator::std_error_variance() const {
  if (n_ < 2) return 0.0;
  const double s2 = variance_unbiased();
  const double spread = std::max(0.0, central_moment4() - s2 * s2);
  return std::sqrt(spread / static_cast<double>(n_));
}

SampleBatch run_batch(const PIndex& p, int n, DomainKind domain, uint64_t trials,
                      uint64_t seed, int workers) {
  if (trials < 1) throw DomainError("run_batch: trials must be >= 1");
  if (n < 1) throw DomainError("run_batch: dimension must be >= 1");
  const double work = static_cast<double>(trials) * static_cast<double>(n);
  if (work > kSampleBudget) {
    throw ResourceError("run_batch: trials*n = " + std::to_string(work) +
                        " exceeds the stored-batch budget " + std::to_string(kSampleBudget) +
                        "; use the streaming tail estimator for runs of this size");
  }
  SampleBatch batch;
  batch.p = p;
  batch.n = n;
  batch.domain = domain;
  batch.trials = trials;
  batch.seed = seed;
  batch.values.resize(trials);
  double* out = batch.values.data();
  parallel_trials(trials, workers, [&](uint64_t lo, uint64_t hi, int) {
    std::vector<double> x, y;
    for (uint64_t i = lo; i < hi; ++i) {
      RandomStream stream(seed, i);
      out[i] = sample_pair_distance(stream, p, n, domain, x, y);
    }
  });
  return batch;
}

MomentSummary empirical_moments(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("empirical_moments: empty sample");
  MomentAccumulator acc;
  for (double v : values) acc.add(v);
  MomentSummary s;
  s.mean = acc.mean();
  s.variance = acc.variance_unbiased();
  s.count = acc.count();
  s.std_error_mean = std::sqrt(s.variance / static_cast<double>(s.count));
  return s;
}

MomentSummary empirical_moments(const SampleBatch& batch) {
  return empirical_moments(batch.values);
}

double ks_statistic(const std::vector<double>& values,
                    const std::function<double(double)>& cdf) {
  if (values.empty()) throw DomainError("ks_statistic: empty sample");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double inv_n = 1.0 / static_cast<double>(sorted.size());
  double d = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max(d, static_cast<double>(i + 1) * inv_n - f);
    d = std::max(d, f - static_cast<double>(i) * inv_n);
  }
  return d;
}

double ks_distance(const std::vector<double>& values, double center, double sigma2) {
  if (!(sigma2 > 0.0)) {
    throw DomainError("ks_distance: sigma2 must be positive, got " + std::to_string(sigma2));
  }
  const double inv_sigma = 1.0 / std::sqrt(sigma2);
  return ks_statistic(values,
                      [&](double x) { return normal_cdf((x - center) * inv_sigma); });
}

std::vector<TailEstimate> empirical_tail_rates(const PIndex& p, int n, DomainKind domain,
                                               const std::vector<double>& zs, uint64_t trials,
                                               uint64_t seed, int workers) {
  if (trials < 1) throw DomainError("empirical_tail_rate: trials must be >= 1");
  if (n < 1) throw DomainError("empirical_tail_rate: dimension must be >= 1");
  for (double z : zs) {
    if (!(z >= 0.0)) {
      throw DomainError("empirical_tail_rate: threshold must be nonnegative, got " +
                        std::to_string(z));
    }
  }
  const int nw = resolve_workers(workers);
  std::vector<std::vector<uint64_t>> hits_per_worker(
      nw, std::vector<uint64_t>(zs.size(), 0));
  parallel_trials(trials, nw, [&](uint64_t lo, uint64_t hi, int w) {
    std::vector<double> x, y;
    std::vector<uint64_t>& hits = hits_per_worker[w];
    for (uint64_t i = lo; i < hi; ++i) {
      RandomStream stream(seed, i);
      const double t = sample_pair_distance(stream, p, n, domain, x, y);
      for (size_t k = 0; k < zs.size(); ++k) {
        if (t >= zs[k]) ++hits[k];
      }
    }
  });
  std::vector<TailEstimate> out(zs.size());
  for (size_t k = 0; k < zs.size(); ++k) {
    uint64_t total = 0;
    for (int w = 0; w < nw; ++w) total += hits_per_worker[w][k];
    out[k].z = zs[k];
    out[k].hits = total;
    out[k].censored = (total == 0);
    const double effective = static_cast<double>(std::max<uint64_t>(total, 1));
    out[k].rate = -std::log(effective / static_cast<double>(trials)) / static_cast<double>(n);
  }
  return out;
}

TailEstimate empirical_tail_rate(const PIndex& p, int n, DomainKind domain, double z,
                                 uint64_t trials, uint64_t seed, int workers) {
  return empirical_tail_rates(p, n, domain, {z}, trials, seed, workers)[0];
}

}  // namespace lpdist
