#include "lpdist/ldp_rate.hpp"
#include <cstdio>
#include <cstdlib>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <utility>

#include "lpdist/errors.hpp"
#include "lpdist/specfun.hpp"
#include "lpdist/stats.hpp"

namespace lpdist {
namespace {

constexpr double kPsiEscapeThreshold = 1e4;  // objective level declared unbounded
constexpr double kGoldenTol = 1e-7;          // 1-D argument tolerance
constexpr double kTruncationRel = 1e-12;     // R-doubling increment target
constexpr double kDensityRel = 1e-10;        // node-doubling agreement target
constexpr double kLogAxisBound = 46.0;       // search window e^{+-46} on log axes

// ---------------------------------------------------------------------------
// Gauss-Legendre rule via Newton iteration on the Legendre recurrence.

struct GaussRule {
  std::vector<double> x, w;
};

GaussRule make_gauss_rule(int m) {
  GaussRule r;
  r.x.resize(m);
  r.w.resize(m);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    // One clean evaluation of P'_m at the converged node for the weight.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < m; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
    }
    pp = m * (z * p0 - p1) / (z * z - 1.0);
    r.x[i] = -z;
    r.x[m - 1 - i] = z;
    r.w[i] = r.w[m - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

const GaussRule& rule20() {
  static const GaussRule r = make_gauss_rule(20);
  return r;
}

// ---------------------------------------------------------------------------
// Axis grids for the tensor quadrature, with |node|^p cached per (R, density).

struct AxisGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> pow_p;       // |node|^p
  std::vector<double> pow_over_p;  // |node|^p / p
};

class QuadTable {
 public:
  explicit QuadTable(double p) : p_(p) {}

  const AxisGrid& grid(double R, int density) {
    const auto key = std::make_pair(R, density);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    AxisGrid g;
    const GaussRule& gl = rule20();
    const int panels = static_cast<int>(std::lround(2.0 * R * density));
    const double half = R / panels;
    g.nodes.reserve(panels * gl.x.size());
    for (int k = 0; k < panels; ++k) {
      const double c = -R + (2.0 * k + 1.0) * half;
      for (size_t j = 0; j < gl.x.size(); ++j) {
        const double node = c + half * gl.x[j];
        g.nodes.push_back(node);
        g.weights.push_back(half * gl.w[j]);
        const double ap = std::pow(std::fabs(node), p_);
        g.pow_p.push_back(ap);
        g.pow_over_p.push_back(ap / p_);
      }
    }
    return cache_.emplace(key, std::move(g)).first->second;
  }

 private:
  double p_;
  std::map<std::pair<double, int>, AxisGrid> cache_;
};

struct TiltedSums {
  double lam = 0.0;
  double g1 = 0.0, g2 = 0.0;
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
};

// ---------------------------------------------------------------------------
// Context owning the cached grids and the established truncation/density for
// one value of p. Single-owner per thread of work.

class MgfContext {
 public:
  explicit MgfContext(double p)
      : p_(p),
        table_(p),
        log_cp2_(2.0 * (std::log(2.0) + std::log(p) / p + log_gamma(1.0 + 1.0 / p))) {}

  double p() const { return p_; }
  bool established() const { return est_R_ > 0.0; }

  // Full pipeline: expand R until the doubling increment is negligible, then
  // refine node density until two levels agree; records the scales for
  // subsequent fast evaluations.
  MgfEvaluation eval_full(double t1, double t2) {
    check_domain(t1, t2);
    // Always climb from the base radius: costs are geometric in R, so the
    // retries are cheap, and a previous evaluation at an extreme tilt must
    // not pin later ones to its giant grid. On agreement the *smaller*
    // radius is the settled one (the doubling added nothing).
    double R = 8.0;
    TiltedSums at_r = eval_raw(t1, t2, R, 2);
    bool r_ok = false;
    while (R <= 512.0) {
      const TiltedSums at_2r = eval_raw(t1, t2, 2.0 * R, 2);
      if (std::fabs(at_2r.lam - at_r.lam) <= kTruncationRel * std::max(1.0, std::fabs(at_2r.lam))) {
        r_ok = true;
        break;
      }
      R = 2.0 * R;
      at_r = at_2r;
    }
    if (!r_ok) {
      throw ConvergenceError("log_mgf: truncation radius exceeded 1024 without the tail"
                             " increment dropping below tolerance", 0,
                             std::fabs(at_r.lam));
    }
    TiltedSums prev = at_r;  // density 2 at the settled radius
    for (int density = 4; density <= 32; density *= 2) {
      const TiltedSums cur = eval_raw(t1, t2, R, density);
      const double diff = std::fabs(cur.lam - prev.lam);
      if (diff <= kDensityRel * std::max(1.0, std::fabs(cur.lam))) {
        est_R_ = R;
        est_density_ = density / 2;  // the coarser of the agreeing pair
        est_error_ = diff;
        return pack(t1, t2, cur, diff, true);
      }
      prev = cur;
    }
    throw ConvergenceError("log_mgf: node-density refinement stalled above tolerance", 0,
                           std::fabs(prev.lam));
  }

  // Re-evaluation at the established scales; used inside iterative solvers,
  // which certify their final point with eval_full.
  MgfEvaluation eval_fast(double t1, double t2) {
    if (!established()) return eval_full(t1, t2);
    check_domain(t1, t2);
    return pack(t1, t2, eval_raw(t1, t2, est_R_, est_density_), est_error_, true);
  }

 private:
  void check_domain(double t1, double t2) const {
    if (!mgf_domain_contains(p_, t1, t2)) {
      throw DomainError("log_mgf: (t1,t2) = (" + std::to_string(t1) + "," +
                        std::to_string(t2) + ") outside the MGF domain for p = " +
                        std::to_string(p_));
    }
  }

  static MgfEvaluation pack(double t1, double t2, const TiltedSums& s, double err,
                            bool reliable) {
    MgfEvaluation e;
    e.t1 = t1;
    e.t2 = t2;
    e.value = s.lam;
    e.grad[0] = s.g1;
    e.grad[1] = s.g2;
    e.hess[0] = s.h11;
    e.hess[1] = s.h12;
    e.hess[2] = s.h22;
    e.quad_error = err;
    e.reliable = reliable;
    return e;
  }

  TiltedSums eval_raw(double t1, double t2, double R, int density) {
    static const bool trace = std::getenv("LPDIST_TRACE_QUAD") != nullptr;
    if (trace) {
      std::fprintf(stderr, "eval_raw R=%g density=%d t1=%.6g t2=%.6g\n", R, density, t1, t2);
    }
    const AxisGrid& g = table_.grid(R, density);
    const size_t m = g.nodes.size();
    const double c2 = t2 - 1.0 / p_;

    // Tilted sums of 1, a = (x-y)^2, b = |y|^p and their squares, in one
    // streaming pass: the running peak M rescales the accumulators whenever
    // it rises (log-sum-exp), so nothing overflows and no separate max scan
    // is needed. The joint flip (x,y) -> (-x,-y) leaves the integrand and
    // the summed monomials invariant, so only the y > 0 half is visited;
    // the factor 2 cancels in every ratio and enters lam as log(2).
    double M = -1e308;
    double s0 = 0.0, s1a = 0.0, s1b = 0.0, s2aa = 0.0, s2ab = 0.0, s2bb = 0.0;
    for (size_t j = m / 2; j < m; ++j) {
      const double y = g.nodes[j];
      const double b = g.pow_p[j];
      const double qy = c2 * b;
      const double wy = g.weights[j];
      for (size_t i = 0; i < m; ++i) {
        const double d = g.nodes[i] - y;
        const double a = d * d;
        const double e = t1 * a + qy - g.pow_over_p[i];
        if (e < M - 50.0) continue;  // below 2e-22 of the peak: invisible
        if (e > M) {
          const double f = std::exp(M - e);  // 0 on the first kept term
          s0 *= f;
          s1a *= f;
          s1b *= f;
          s2aa *= f;
          s2ab *= f;
          s2bb *= f;
          M = e;
        }
        const double t = wy * g.weights[i] * std::exp(e - M);
        s0 += t;
        s1a += t * a;
        s1b += t * b;
        s2aa += t * a * a;
        s2ab += t * a * b;
        s2bb += t * b * b;
      }
    }
    TiltedSums out;
    out.lam = M + std::log(2.0 * s0) - log_cp2_;
    out.g1 = s1a / s0;
    out.g2 = s1b / s0;
    out.h11 = s2aa / s0 - out.g1 * out.g1;
    out.h12 = s2ab / s0 - out.g1 * out.g2;
    out.h22 = s2bb / s0 - out.g2 * out.g2;
    return out;
  }

  double p_;
  QuadTable table_;
  double log_cp2_;
  double est_R_ = 0.0;
  int est_density_ = 0;
  double est_error_ = 0.0;
};

// Closed Gaussian form at p = 2: Lambda = -ln(det A)/2 for the quadratic
// form A = [[1-2t1, 2t1], [2t1, 1-2t1-2t2]].
MgfEvaluation gauss_log_mgf(double t1, double t2) {
  const double D = (1.0 - 2.0 * t1) * (1.0 - 2.0 * t1 - 2.0 * t2) - 4.0 * t1 * t1;
  MgfEvaluation e;
  e.t1 = t1;
  e.t2 = t2;
  e.value = -0.5 * std::log(D);
  e.grad[0] = 2.0 * (1.0 - t2) / D;
  e.grad[1] = (1.0 - 2.0 * t1) / D;
  e.hess[0] = 8.0 * (1.0 - t2) * (1.0 - t2) / (D * D);
  e.hess[1] = (-2.0 * D + 4.0 * (1.0 - t2) * (1.0 - 2.0 * t1)) / (D * D);
  e.hess[2] = 2.0 * (1.0 - 2.0 * t1) * (1.0 - 2.0 * t1) / (D * D);
  e.quad_error = 0.0;
  e.reliable = true;
  return e;
}

void require_ldp_exponent(double p) {
  if (std::isnan(p) || p < 2.0) {
    throw UnsupportedError("rate functions are available for p >= 2 only (no large-"
                           "deviation principle is implemented below 2); got p = " +
                           std::to_string(p));
  }
  if (std::isinf(p)) {
    throw UnsupportedError("finite p expected here; the cube has its own rate function");
  }
}

// ---------------------------------------------------------------------------
// Damped-Newton Legendre-Fenchel conjugation with a warm-startable state.

class ConjugateSolver {
 public:
  explicit ConjugateSolver(double p) : p_(p), ctx_(p) {}

  MgfEvaluation evaluate(double t1, double t2, bool certified) {
    if (p_ == 2.0) return gauss_log_mgf(t1, t2);
    return certified ? ctx_.eval_full(t1, t2) : ctx_.eval_fast(t1, t2);
  }

  bool in_domain(double t1, double t2) const { return mgf_domain_contains(p_, t1, t2); }

  // sup_t [x t1 + y t2 - Lambda(t)]. With certified = false the result is
  // accepted from the fast-scale evaluation without the adaptive
  // re-certification; line-search probes use this and the final minimizer
  // is re-solved certified.
  ExtendedReal solve(double x, double y, ConjugateInfo* info, bool certified = true) {
    double t1 = warm_ ? wt1_ : 0.0;
    double t2 = warm_ ? wt2_ : 0.0;
    if (!in_domain(t1, t2)) {
      t1 = 0.0;
      t2 = 0.0;
    }
    const double scale = 1.0 + std::fabs(x) + std::fabs(y);
    const double gtol = 1e-9 * scale;
    int total_iter = 0;

    // Stationarity is KKT-style: for p > 2 the effective domain has the
    // face {t2 = 1/p, t1 < 0} in its closure (the coupling supplies the
    // |y|^p decay there), and some targets attain their supremum on it. At
    // such points the t2-residual stays positive; the iterate converges to
    // the face and the value error is bounded by residual * gap. Away from
    // the face, a plain gradient norm is the wrong yardstick in flat
    // directions (the optimal residual scales like sqrt(eps * curvature)),
    // so the primary test is the Newton decrement: it bounds the remaining
    // objective gap on the concave model, independent of conditioning.
    auto stationary = [&](const MgfEvaluation& e, double at_t2, double tol) {
      const double rx = x - e.grad[0];
      double ry = y - e.grad[1];
      if (p_ != 2.0 && ry > 0.0 && (1.0 / p_ - at_t2) * ry <= tol) ry = 0.0;
      if (std::max(std::fabs(rx), std::fabs(ry)) <= tol) return true;
      const double det = e.hess[0] * e.hess[2] - e.hess[1] * e.hess[1];
      if (!(det > 1e-300) || !std::isfinite(det)) return false;
      const double d1 = (e.hess[2] * rx - e.hess[1] * ry) / det;
      const double d2 = (e.hess[0] * ry - e.hess[1] * rx) / det;
      const double decrement = 0.5 * (rx * d1 + ry * d2);
      return decrement >= 0.0 && decrement <= 1e-12 * scale;
    };

    for (int restart = 0; restart < 3; ++restart) {
      MgfEvaluation ev = evaluate(t1, t2, false);
      double psi = x * t1 + y * t2 - ev.value;
      for (int iter = 0; iter < 200; ++iter, ++total_iter) {
        const double gx = x - ev.grad[0];
        const double gy = y - ev.grad[1];
        static const bool trace_iter = std::getenv("LPDIST_TRACE_ITER") != nullptr;
        if (trace_iter) {
          std::fprintf(stderr,
                       "iter=%d t=(%.12g,%.12g) g=(%.3g,%.3g) psi=%.12g"
                       " hess=(%.3g,%.3g,%.3g)\n",
                       iter, t1, t2, gx, gy, psi, ev.hess[0], ev.hess[1],
                       ev.hess[2]);
        }
        if (stationary(ev, t2, gtol)) break;

        // Candidate ascent directions, tried in order: full Newton on the
        // concave objective, then the coordinate Newton steps (the full
        // direction can point out of the domain when an iterate sits near
        // the t2 boundary, where every feasible fraction of it is
        // microscopic), then the scaled gradient.
        const double det = ev.hess[0] * ev.hess[2] - ev.hess[1] * ev.hess[1];
        const double tr = std::max(ev.hess[0] + ev.hess[2], 1e-12);
        double cand[5][2];
        int ncand = 0;
        // When the local model's unconstrained optimum lies beyond the p > 2
        // face, the constrained optimum sits on the face itself. Jump there
        // in one step -- t2 to just inside the boundary (close enough for the
        // KKT product test), t1 by Newton along the face -- instead of letting
        // the backtracking creep toward it by geometric halving.
        if (p_ != 2.0 && gy > 0.0) {
          const double gap = 1.0 / p_ - t2;
          const double nd2 = det > 1e-300 && std::isfinite(det)
                                 ? (ev.hess[0] * gy - ev.hess[1] * gx) / det
                                 : gap;
          const double d2 = gap - 0.025 * gtol / gy;
          if (nd2 >= gap && d2 > 0.0) {
            cand[ncand][0] =
                ev.hess[0] > 1e-300 ? (gx - ev.hess[1] * d2) / ev.hess[0] : 0.0;
            cand[ncand][1] = d2;
            ++ncand;
          }
        }
        if (det > 1e-300 && std::isfinite(det)) {
          cand[ncand][0] = (ev.hess[2] * gx - ev.hess[1] * gy) / det;
          cand[ncand][1] = (ev.hess[0] * gy - ev.hess[1] * gx) / det;
          ++ncand;
        }
        if (ev.hess[0] > 1e-300) {
          cand[ncand][0] = gx / ev.hess[0];
          cand[ncand][1] = 0.0;
          ++ncand;
        }
        if (ev.hess[2] > 1e-300) {
          cand[ncand][0] = 0.0;
          cand[ncand][1] = gy / ev.hess[2];
          ++ncand;
        }
        cand[ncand][0] = gx / tr;
        cand[ncand][1] = gy / tr;
        ++ncand;

        bool stepped = false;
        for (int c = 0; c < ncand && !stepped; ++c) {
          const double d1 = cand[c][0];
          const double d2 = cand[c][1];
          const double slope = gx * d1 + gy * d2;
          if (!(slope > 0.0)) continue;  // not an ascent direction
          double alpha = 1.0;
          for (int bt = 0; bt < 40; ++bt, alpha *= 0.5) {
            const double n1 = t1 + alpha * d1;
            const double n2 = t2 + alpha * d2;
            if (n1 == t1 && n2 == t2) break;  // underflowed: no move left
            if (!in_domain(n1, n2)) continue;
            const MgfEvaluation trial = evaluate(n1, n2, false);
            const double psi_trial = x * n1 + y * n2 - trial.value;
            if (psi_trial >= psi + 1e-4 * alpha * slope) {
              t1 = n1;
              t2 = n2;
              ev = trial;
              psi = psi_trial;
              stepped = true;
              break;
            }
          }
        }
        if (psi > kPsiEscapeThreshold) {
          // Objective escaped the configured level while still ascending:
          // the supremum is unbounded.
          if (info) {
            info->t1 = t1;
            info->t2 = t2;
            info->iterations = total_iter;
            info->converged = true;
          }
          return ExtendedReal::infinity();
        }
        // A stalled iteration falls through: the post-loop certification
        // re-establishes the quadrature scales for this region of t and the
        // ascent restarts on accurate evaluations.
        if (!stepped) break;
      }

      if (!certified) {
        if (stationary(ev, t2, 1e-5 * scale)) {
          warm_ = true;
          wt1_ = t1;
          wt2_ = t2;
          if (info) {
            info->t1 = t1;
            info->t2 = t2;
            info->iterations = total_iter;
            info->converged = true;
          }
          return ExtendedReal::finite_value(x * t1 + y * t2 - ev.value);
        }
        // Fast scales were not good enough here; continue into the
        // certified path below, which self-heals them.
      }

      // Certify the candidate maximizer against the fully adaptive
      // evaluation; re-enter the ascent if the refined gradient moved.
      const MgfEvaluation cert = evaluate(t1, t2, true);
      const double rx = x - cert.grad[0];
      const double ry = y - cert.grad[1];
      static const bool trace = std::getenv("LPDIST_TRACE_NEWTON") != nullptr;
      if (trace) {
        std::fprintf(stderr,
                     "cert restart=%d target=(%.6g,%.6g) t=(%.8g,%.8g) resid=(%.3g,%.3g)"
                     " gtol=%.3g hess=(%.3g,%.3g,%.3g) iters=%d\n",
                     restart, x, y, t1, t2, rx, ry, gtol, cert.hess[0], cert.hess[1],
                     cert.hess[2], total_iter);
      }
      if (stationary(cert, t2, 20.0 * gtol)) {
        warm_ = true;
        wt1_ = t1;
        wt2_ = t2;
        if (info) {
          info->t1 = t1;
          info->t2 = t2;
          info->iterations = total_iter;
          info->converged = true;
        }
        return ExtendedReal::finite_value(x * t1 + y * t2 - cert.value);
      }
    }
    throw ConvergenceError("legendre2: certified gradient residual stayed above"
                           " tolerance after restarts", 3, 0.0);
  }

 private:
  double p_;
  MgfContext ctx_;
  bool warm_ = false;
  double wt1_ = 0.0, wt2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Golden-section minimization on a log axis over extended-real objectives.

bool er_less(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_inf()) return false;
  if (b.is_inf()) return true;
  return a.finite() < b.finite();
}

struct LogAxisResult {
  double u_best = 0.0;
  ExtendedReal f_best = ExtendedReal::infinity();
  bool bracketed = false;
};

template <typename F>
LogAxisResult minimize_log_axis(const F& f, double u_start, double u_lo, double u_hi,
                                double tol) {
  LogAxisResult res;
  auto probe = [&](double u) {
    const ExtendedReal v = f(u);
    if (er_less(v, res.f_best)) {
      res.f_best = v;
      res.u_best = u;
    }
    return v;
  };

  double u0 = std::clamp(u_start, u_lo, u_hi);
  ExtendedReal f0 = probe(u0);

  // Find the downhill direction, then march with doubling steps until the
  // value turns back up (three-point pattern) or a bound is reached.
  double step = 0.25;
  double a = u0, c = u0;
  ExtendedReal fb = f0;
  double b = u0;
  int dir = 0;
  if (u0 + step <= u_hi) {
    const ExtendedReal fr = probe(u0 + step);
    if (er_less(fr, fb)) {
      dir = +1;
      b = u0 + step;
      fb = fr;
    }
  }
  if (dir == 0 && u0 - step >= u_lo) {
    const ExtendedReal fl = probe(u0 - step);
    if (er_less(fl, fb)) {
      dir = -1;
      b = u0 - step;
      fb = fl;
    }
  }
  if (dir == 0) {
    // Both neighbors are at least as large: the pattern already holds on
    // the clamped +-step interval.
    a = std::max(u0 - step, u_lo);
    c = std::min(u0 + step, u_hi);
    res.bracketed = true;
  } else {
    a = u0;
    double s = 2.0 * step;
    for (int k = 0; k < 200; ++k) {
      double next = b + dir * s;
      bool at_bound = false;
      if (next >= u_hi) {
        next = u_hi;
        at_bound = true;
      }
      if (next <= u_lo) {
        next = u_lo;
        at_bound = true;
      }
      const ExtendedReal fn = probe(next);
      if (!er_less(fn, fb)) {
        c = next;
        res.bracketed = true;
        break;
      }
      a = b;
      b = next;
      fb = fn;
      if (at_bound) {
        // Still descending at the search boundary; minimize on the last leg.
        c = next;
        res.bracketed = true;
        break;
      }
      s *= 2.0;
    }
    if (dir < 0) std::swap(a, c);
  }
  if (!res.bracketed) return res;
  if (c - a <= tol) return res;

  // Golden section on [a, c], tracking the best point ever seen.
  const double phi = 0.6180339887498949;
  double x1 = c - phi * (c - a);
  double x2 = a + phi * (c - a);
  ExtendedReal f1 = probe(x1);
  ExtendedReal f2 = probe(x2);
  while (c - a > tol) {
    if (er_less(f1, f2)) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - phi * (c - a);
      f1 = probe(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (c - a);
      f2 = probe(x2);
    }
  }
  return res;
}

ExtendedReal er_add(const ExtendedReal& a, double c) {
  if (a.is_inf()) return a;
  return ExtendedReal::finite_value(a.finite() + c);
}

// Shared implementation so the interior rate can reuse one solver and warm
// hints across its inner minimizations. Probes run on the solver's fast
// scales; with certify_final the minimizer is re-solved with the fully
// adaptive evaluation and that value is returned.
ExtendedReal rate_boundary_impl(ConjugateSolver& solver, double p, double z,
                                double y_hint, RateInfo* info, double* y_found,
                                bool certify_final) {
  long evals = 0;
  long failures = 0;
  auto conjugate_at = [&](double u, bool certified) -> ExtendedReal {
    const double y = std::exp(u);
    const double x = z * z * std::pow(y, 2.0 / p);
    ++evals;
    return solver.solve(x, y, nullptr, certified);
  };
  auto phi = [&](double u) -> ExtendedReal {
    try {
      return conjugate_at(u, false);
    } catch (const ConvergenceError& e) {
      static const bool trace = std::getenv("LPDIST_TRACE_FAIL") != nullptr;
      if (trace) {
        std::fprintf(stderr, "probe fail z=%.6g y=%.6g: %s (iter=%ld resid=%.3g)\n", z,
                     std::exp(u), e.what(), e.iterations, e.residual);
      }
      ++failures;
      return ExtendedReal::infinity();
    }
  };
  const LogAxisResult res = minimize_log_axis(phi, std::log(y_hint), -kLogAxisBound,
                                              kLogAxisBound, kGoldenTol);
  if (res.f_best.is_inf() && failures > 0) {
    throw ConvergenceError("rate_boundary: every inner conjugation attempt failed",
                           failures, z);
  }
  ExtendedReal best = res.f_best;
  bool final_ok = true;
  if (certify_final && !best.is_inf()) {
    try {
      best = conjugate_at(res.u_best, true);
    } catch (const ConvergenceError&) {
      final_ok = false;  // keep the fast value, flag the point
    }
  }
  if (info) {
    info->inner_argmin = std::exp(res.u_best);
    info->converged = res.bracketed && failures == 0 && final_ok;
    info->evaluations += evals;
  }
  if (y_found) *y_found = std::exp(res.u_best);
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------

bool mgf_domain_contains(double p, double t1, double t2) {
  require_ldp_exponent(p);
  if (std::isnan(t1) || std::isnan(t2)) return false;
  if (p == 2.0) {
    const double lead = 0.5 - t1;
    return lead > 0.0 && lead * (0.5 - t1 - t2) - t1 * t1 > 0.0;
  }
  return t2 < 1.0 / p;
}

MgfEvaluation log_mgf(double p, double t1, double t2) {
  require_ldp_exponent(p);
  if (!mgf_domain_contains(p, t1, t2)) {
    throw DomainError("log_mgf: (t1,t2) outside the MGF domain");
  }
  if (p == 2.0) return gauss_log_mgf(t1, t2);
  MgfContext ctx(p);
  return ctx.eval_full(t1, t2);
}

MgfEvaluation log_mgf_quadrature(double p, double t1, double t2) {
  require_ldp_exponent(p);
  if (!mgf_domain_contains(p, t1, t2)) {
    throw DomainError("log_mgf_quadrature: (t1,t2) outside the MGF domain");
  }
  MgfContext ctx(p);
  return ctx.eval_full(t1, t2);
}

ExtendedReal legendre2(double p, double x, double y, ConjugateInfo* info) {
  require_ldp_exponent(p);
  ConjugateSolver solver(p);
  return solver.solve(x, y, info);
}

ExtendedReal rate_boundary(double p, double z, RateInfo* info) {
  require_ldp_exponent(p);
  if (info) {
    info->inner_argmin = 0.0;
    info->converged = true;
    info->evaluations = 0;
  }
  // Negative z is unreachable (the statistic is nonnegative); z = 0 forces
  // the first conjugate argument to 0, the boundary of the tilted-moment
  // range, where the supremum diverges. Both get +inf exactly.
  if (std::isnan(z)) throw DomainError("rate_boundary: z is NaN");
  if (z <= 0.0) return ExtendedReal::infinity();
  ConjugateSolver solver(p);
  return rate_boundary_impl(solver, p, z, 1.0, info, nullptr, true);
}

ExtendedReal rate_radial(double z) {
  if (std::isnan(z)) throw DomainError("rate_radial: z is NaN");
  if (z <= 0.0 || z > 1.0) return ExtendedReal::infinity();
  return ExtendedReal::finite_value(-std::log(z));
}

ExtendedReal rate_ball(double p, double z, RateInfo* info) {
  require_ldp_exponent(p);
  if (info) {
    info->inner_argmin = 0.0;
    info->converged = true;
    info->evaluations = 0;
  }
  if (std::isnan(z)) throw DomainError("rate_ball: z is NaN");
  if (z <= 0.0) return ExtendedReal::infinity();

  ConjugateSolver solver(p);
  double y_hint = 1.0;
  long evals = 0;
  bool inner_ok = true;
  // v = ln z1 over (-inf, 0]; each inner boundary minimization reuses the
  // solver's warm maximizer and the previous inner argmin.
  auto g = [&](double v, bool certify) -> ExtendedReal {
    const double w = z * std::exp(-v);
    RateInfo sub;
    double y_here = y_hint;
    const ExtendedReal inner =
        rate_boundary_impl(solver, p, w, y_hint, &sub, &y_here, certify);
    y_hint = y_here;
    evals += sub.evaluations;
    if (!sub.converged) inner_ok = false;
    return er_add(inner, -v);
  };
  auto g_fast = [&](double v) { return g(v, false); };
  const LogAxisResult res = minimize_log_axis(g_fast, 0.0, -kLogAxisBound, 0.0, kGoldenTol);
  ExtendedReal best = res.f_best;
  if (!best.is_inf()) {
    const ExtendedReal cert = g(res.u_best, true);
    if (!cert.is_inf()) best = cert;
  }
  if (info) {
    info->inner_argmin = std::exp(res.u_best);
    info->converged = res.bracketed && inner_ok;
    info->evaluations = evals;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Cube (p = inf) one-dimensional machinery.

namespace {

struct CubeEval {
  double lam = 0.0;
  double d1 = 0.0;  // tilted <x^2> = Lambda'
  double d2 = 0.0;  // tilted variance of x^2 = Lambda''
};

// Integrates e^{t x^2} (1 - x/2) over [a,b] (subinterval of [0,2]) after
// subtracting the peak exponent `shift`, accumulating the moments of x^2.
// Composite 20-point Gauss-Legendre over `panels` equal panels.
void cube_panel_sums(double t, double a, double b, double shift, int panels, double* s0,
                     double* s1, double* s2) {
  const GaussRule& gl = rule20();
  *s0 = *s1 = *s2 = 0.0;
  const double half = (b - a) / (2.0 * panels);
  for (int k = 0; k < panels; ++k) {
    const double c = a + (2.0 * k + 1.0) * half;
    for (size_t j = 0; j < gl.x.size(); ++j) {
      const double x = c + half * gl.x[j];
      // Grouped form of t x^2 - shift: for shift = 4t this is -t(2-x)(2+x),
      // which avoids cancellation between two huge terms when t is large.
      const double e = shift > 0.0 ? -t * (2.0 - x) * (2.0 + x) : t * x * x;
      if (e < -720.0) continue;
      const double f = half * gl.w[j] * std::exp(e) * (1.0 - 0.5 * x);
      const double x2 = x * x;
      *s0 += f;
      *s1 += f * x2;
      *s2 += f * x2 * x2;
    }
  }
}

// Right-peak form for t > 100: the mass sits within ~360/t of x = 2, where
// x-coordinates are quantized at eps(2) and u = 2 - x would lose most of its
// relative precision. Integrating in u directly keeps the density factor
// u/2 and the exponent t x^2 - 4t = -t u (4 - u) fully accurate.
void cube_panel_sums_near2(double t, double u_max, int panels, double* s0, double* s1,
                           double* s2) {
  const GaussRule& gl = rule20();
  *s0 = *s1 = *s2 = 0.0;
  const double half = u_max / (2.0 * panels);
  for (int k = 0; k < panels; ++k) {
    const double c = (2.0 * k + 1.0) * half;
    for (size_t j = 0; j < gl.x.size(); ++j) {
      const double u = c + half * gl.x[j];
      const double e = -t * u * (4.0 - u);
      if (e < -720.0) continue;
      const double f = half * gl.w[j] * std::exp(e) * 0.5 * u;
      const double x2 = (2.0 - u) * (2.0 - u);
      *s0 += f;
      *s1 += f * x2;
      *s2 += f * x2 * x2;
    }
  }
}

CubeEval cube_eval(double t) {
  if (std::isnan(t)) throw DomainError("cube_log_mgf: t is NaN");
  if (t == 0.0) {
    // Untilted integrand is the density itself: mass exactly 1, moments
    // of x^2 are 2/3 and 16/15.
    CubeEval out;
    out.lam = 0.0;
    out.d1 = 2.0 / 3.0;
    out.d2 = 16.0 / 15.0 - 4.0 / 9.0;
    return out;
  }
  // Peak of t x^2 on [0,2]: x = 2 for t > 0, x = 0 otherwise. For very
  // peaked integrands, integrate only where the scaled integrand is above
  // 1e-320 of the peak; outside, it contributes nothing representable.
  const double shift = std::max(0.0, 4.0 * t);
  const bool near2 = t > 100.0;
  double a = 0.0, b = 2.0;
  if (t < -100.0) {
    b = std::min(2.0, std::sqrt(720.0 / -t));  // e^{t b^2} = e^{-720}
  } else if (near2) {
    b = std::min(2.0, 360.0 / t);  // u range: exponent gap 4t*u <= 1440
  }
  auto sums = [&](int n, double* r0, double* r1, double* r2) {
    if (near2) {
      cube_panel_sums_near2(t, b, n, r0, r1, r2);
    } else {
      cube_panel_sums(t, a, b, shift, n, r0, r1, r2);
    }
  };
  int panels = 16;
  double s0, s1, s2;
  sums(panels, &s0, &s1, &s2);
  for (int iter = 0; iter < 12; ++iter) {
    double r0, r1, r2;
    sums(panels * 2, &r0, &r1, &r2);
    if (std::fabs(r0 - s0) <= 1e-12 * std::fabs(r0)) {
      CubeEval out;
      out.lam = shift + std::log(r0);
      out.d1 = r1 / r0;
      out.d2 = r2 / r0 - out.d1 * out.d1;
      return out;
    }
    panels *= 2;
    s0 = r0;
    s1 = r1;
    s2 = r2;
  }
  throw ConvergenceError("cube_log_mgf: panel refinement stalled", 12, s0);
}

}  // namespace

double cube_log_mgf(double t) { return cube_eval(t).lam; }

ExtendedReal cube_rate(double z, RateInfo* info) {
  if (info) {
    info->inner_argmin = 0.0;
    info->converged = true;
    info->evaluations = 0;
  }
  if (std::isnan(z)) throw DomainError("cube_rate: z is NaN");
  if (z < 0.0) return ExtendedReal::infinity();
  const double target = z * z;
  long evals = 0;

  // Bracket t with Lambda'(lo) < target < Lambda'(hi). Lambda' is a strictly
  // increasing bijection onto the open interval (0, 4); a bracket end
  // running away means the target is outside and the supremum diverges.
  auto deriv = [&](double t) {
    ++evals;
    return cube_eval(t);
  };
  double lo = -1.0, hi = 1.0;
  CubeEval elo = deriv(lo), ehi = deriv(hi);
  while (elo.d1 > target) {
    lo *= 4.0;
    if (lo < -1e12) {
      if (info) info->evaluations = evals;
      return ExtendedReal::infinity();  // z^2 at or below 0: maximizer runs to -inf
    }
    elo = deriv(lo);
  }
  while (ehi.d1 < target) {
    hi *= 4.0;
    if (hi > 1e12) {
      if (info) info->evaluations = evals;
      return ExtendedReal::infinity();  // z^2 at or above 4: maximizer runs to +inf
    }
    ehi = deriv(hi);
  }

  // Bracketed Newton on Lambda'(t) = z^2 with bisection fallback.
  double t = 0.5 * (lo + hi);
  CubeEval e = deriv(t);
  for (int iter = 0; iter < 200; ++iter) {
    const double resid = e.d1 - target;
    if (std::fabs(resid) <= 1e-13 * std::max(1.0, target) || hi - lo < 1e-14 * (1.0 + std::fabs(t))) {
      if (info) {
        info->inner_argmin = t;
        info->converged = true;
        info->evaluations = evals;
      }
      return ExtendedReal::finite_value(target * t - e.lam);
    }
    if (resid > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    double next = t - resid / e.d2;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
    e = deriv(t);
  }
  throw ConvergenceError("cube_rate: root solve for the maximizer stalled", 200,
                         std::fabs(e.d1 - target));
}

RateCurve rate_curve(const PIndex& p, DomainKind domain, double z_min, double z_max,
                     int steps, int workers) {
  if (!(z_min < z_max) || steps < 2) {
    throw DomainError("rate_curve: need z_min < z_max and steps >= 2");
  }
  if (p.is_inf() && domain == DomainKind::BallBoundary) {
    throw UnsupportedError("rate_curve: no boundary rate function is available for the"
                           " cube; use the interior domain");
  }
  if (!p.is_inf()) require_ldp_exponent(p.finite());

  RateCurve curve;
  curve.p = p;
  curve.domain = domain;
  curve.z_grid.resize(steps);
  for (int i = 0; i < steps; ++i) {
    curve.z_grid[i] = z_min + (z_max - z_min) * i / (steps - 1);
  }

  struct PointResult {
    ExtendedReal rate = ExtendedReal::infinity();
    double inner = 0.0;
    bool converged = false;
  };
  std::vector<PointResult> results(steps);
  std::atomic<int> next{0};
  const int nw = std::min(resolve_workers(workers), steps);

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= steps) return;
      const double z = curve.z_grid[i];
      RateInfo ri;
      PointResult pr;
      try {
        if (p.is_inf()) {
          pr.rate = cube_rate(z, &ri);
        } else if (domain == DomainKind::BallBoundary) {
          pr.rate = rate_boundary(p.finite(), z, &ri);
        } else {
          pr.rate = rate_ball(p.finite(), z, &ri);
        }
        pr.inner = ri.inner_argmin;
        pr.converged = ri.converged;
      } catch (const ConvergenceError&) {
        pr.rate = ExtendedReal::infinity();
        pr.inner = 0.0;
        pr.converged = false;
      }
      results[i] = pr;
    }
  };
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  curve.rates.reserve(steps);
  curve.inner_argmin.reserve(steps);
  curve.converged.reserve(steps);
  for (const PointResult& pr : results) {
    curve.rates.push_back(pr.rate);
    curve.inner_argmin.push_back(pr.inner);
    curve.converged.push_back(pr.converged);
  }
  return curve;
}

}  // namespace lpdist
