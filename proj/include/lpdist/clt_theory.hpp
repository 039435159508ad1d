#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lpdist/pindex.hpp"
#include "lpdist/sampler.hpp"

namespace lpdist {

struct CltConstants {
  PIndex p = PIndex::finite_value(2.0);
  double center = 0.0;
  double sigma2 = 0.0;
  // The exact-sphere value at p=2 (1/2), which disagrees with the general
  // formula there; recorded so reports can adjudicate empirically.
  std::optional<double> sigma2_alternate;
};

// LLN center of the normalized distance: sqrt(2 E|g|^2) in all cases, i.e.
// sqrt(2) sqrt(Γ(3/p)/Γ(1/p)) p^{1/p} for finite p and sqrt(2/3) at p=inf.
double clt_center(const PIndex& p);

// Fluctuation variance: p^{2/p} (M_p(4) + M_p(2)^2) / (4 M_p(2)) for finite
// p; 7/30 at p=inf.
double clt_variance(const PIndex& p);

CltConstants clt_constants(const PIndex& p);

// Exact law of the distance of two uniform points on the Euclidean unit
// sphere in R^n: P(dist <= t), via the incomplete-beta reduction of
// (Γ(n/2)/(√π Γ((n-1)/2))) ∫_{1-t²/2}^1 (1-x²)^{(n-3)/2} dx.
double sphere_cdf(int n, double t);

// E[dist] = 2^{n-1} Γ(n/2)² / (√π Γ(n-1/2)), evaluated in log space.
double sphere_mean(int n);

// Var[dist] = 2 - sphere_mean(n)², clamped at 0 against roundoff.
double sphere_variance(int n);

struct CltReport {
  CltConstants constants;
  int n = 0;
  DomainKind domain = DomainKind::BallBoundary;
  uint64_t trials = 0;
  uint64_t seed = 0;
  double mean_t = 0.0;       // mean of the raw statistic
  double se_mean_t = 0.0;
  double mean_z = 0.0;       // Z = sqrt(n) (T - center)
  double var_z = 0.0;
  double se_var_z = 0.0;
  double ks_vs_theory = 0.0;
  std::optional<double> ks_vs_alternate;
  bool center_ok = false;    // |mean_t - center| <= 4 se + 0.5/n
  // Which variance candidate the sample supports: "theory", "alternate",
  // or "ambiguous" when the rejected candidate is under 10 SEs away.
  // "theory" with no alternate candidate means nothing competed.
  std::string sigma2_decision = "theory";
  double decision_margin_se = 0.0;  // distance of the rejected candidate, in SEs
};

// Runs a batch, normalizes, and checks it against the CLT constants (and
// the alternate variance when one exists).
CltReport clt_report(const PIndex& p, int n, DomainKind domain, uint64_t trials,
                     uint64_t seed, int workers = 0);

}  // namespace lpdist
