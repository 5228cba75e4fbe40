#include "chatmeta/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "chatmeta/error.hpp"

namespace chatmeta {

FitMethod fit_method_from_name(std::string_view name) {
  if (name == "reml") return FitMethod::reml;
  if (name == "ml") return FitMethod::ml;
  throw Error(Errc::invalid_config, "unknown fit method '" + std::string(name) + "'");
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kRssFloor = 1e-30;

struct GroupStats {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
};

struct Design {
  std::vector<GroupStats> groups;
  // map from input row -> group index, for BLUP/residual evaluation
  std::vector<int> group_of_row;
  std::vector<double> x, y; // input order
  int n = 0;
};

Design build_design(std::span<const ChatRpPair> pairs) {
  Design d;
  d.n = static_cast<int>(pairs.size());
  d.x.reserve(pairs.size());
  d.y.reserve(pairs.size());

  // Canonical group order (sorted donor ids) and canonical within-group
  // accumulation order make the fit independent of input row order.
  std::map<std::string, std::vector<std::pair<double, double>>> by_donor;
  std::map<std::string, int> group_index;
  for (const auto& p : pairs) by_donor[p.donor_id].push_back({p.rp_alter, p.rp_ego});
  int gi = 0;
  for (auto& [donor, rows] : by_donor) {
    std::sort(rows.begin(), rows.end());
    GroupStats g;
    for (const auto& [x, y] : rows) {
      g.n += 1;
      g.sx += x;
      g.sy += y;
      g.sxx += x * x;
      g.sxy += x * y;
      g.syy += y * y;
    }
    d.groups.push_back(g);
    group_index[donor] = gi++;
  }
  for (const auto& p : pairs) {
    d.group_of_row.push_back(group_index[p.donor_id]);
    d.x.push_back(p.rp_alter);
    d.y.push_back(p.rp_ego);
  }
  return d;
}

struct GlsResult {
  double beta0 = 0, beta1 = 0;
  double a11 = 0, a12 = 0, a22 = 0; // X' H^-1 X
  double det_a = 0;
  double rss = 0;      // (y-Xb)' H^-1 (y-Xb)
  double logdet_h = 0; // sum over groups of log det(I + lambda J)
};

GlsResult gls_at_lambda(const Design& d, double lambda) {
  GlsResult r;
  double b1 = 0, b2 = 0, q = 0;
  for (const auto& g : d.groups) {
    const double c = lambda / (1.0 + lambda * g.n);
    r.a11 += g.n - c * g.n * g.n;
    r.a12 += g.sx - c * g.n * g.sx;
    r.a22 += g.sxx - c * g.sx * g.sx;
    b1 += g.sy - c * g.n * g.sy;
    b2 += g.sxy - c * g.sx * g.sy;
    q += g.syy - c * g.sy * g.sy;
    r.logdet_h += std::log1p(lambda * g.n);
  }
  r.det_a = r.a11 * r.a22 - r.a12 * r.a12;
  if (!(r.det_a > 0) || !std::isfinite(r.det_a))
    throw Error(Errc::singular_design, "X'X is singular (is rp_alter constant?)");
  r.beta1 = (r.a11 * b2 - r.a12 * b1) / r.det_a;
  r.beta0 = (b1 - r.a12 * r.beta1) / r.a11;
  const double rss = q - 2.0 * (r.beta0 * b1 + r.beta1 * b2) +
                     (r.beta0 * r.beta0 * r.a11 + 2.0 * r.beta0 * r.beta1 * r.a12 +
                      r.beta1 * r.beta1 * r.a22);
  r.rss = std::max(rss, 0.0);
  return r;
}

double criterion(const Design& d, const GlsResult& g, FitMethod method) {
  const double n = d.n;
  const double rss = std::max(g.rss, kRssFloor);
  if (method == FitMethod::ml) {
    const double m2l = n * std::log(rss / n) + g.logdet_h + n * (1.0 + std::log(kTwoPi));
    return -0.5 * m2l;
  }
  const double np = n - 2.0;
  const double m2l = np * std::log(rss / np) + g.logdet_h + std::log(g.det_a) +
                     np * (1.0 + std::log(kTwoPi));
  return -0.5 * m2l;
}

// Golden-section maximization of f over [lo, hi] to a relative tolerance on
// lambda of 1e-10.
template <typename F>
double golden_max(F&& f, double lo, double hi) {
  constexpr double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-10 * std::max(1e-2, 0.5 * (std::abs(a) + std::abs(b)))) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double optimize_lambda(const Design& d, FitMethod method, double lambda_hi) {
  const auto f = [&](double lam) { return criterion(d, gls_at_lambda(d, lam), method); };

  // Coarse scan brackets the optimum; the profiled criterion is smooth and
  // effectively unimodal over lambda but may peak at the 0 boundary.
  std::vector<double> grid{0.0};
  const int steps = 57;
  for (int i = 0; i <= steps; ++i) {
    const double e = -8.0 + (std::log10(lambda_hi) + 8.0) * i / steps;
    grid.push_back(std::pow(10.0, e));
  }
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = best == 0 ? 0.0 : grid[best - 1];
  const double hi = best + 1 < grid.size() ? grid[best + 1] : grid.back();
  double lam = golden_max(f, lo, hi);
  // The boundary lambda = 0 is a legitimate optimum (no donor-level
  // variance); prefer it when it is at least as good.
  if (f(0.0) >= f(lam)) lam = 0.0;
  return lam;
}

} // namespace

double profiled_loglik(std::span<const ChatRpPair> pairs, double lambda, FitMethod method) {
  const Design d = build_design(pairs);
  return criterion(d, gls_at_lambda(d, lambda), method);
}

LmmFit fit_random_intercept(std::span<const ChatRpPair> pairs, const LmmOptions& opts) {
  const Design d = build_design(pairs);
  if (d.groups.size() < 2)
    throw Error(Errc::too_few_groups,
                "need at least 2 donors, got " + std::to_string(d.groups.size()));
  if (d.n < 3)
    throw Error(Errc::too_few_groups,
                "need at least 3 observations, got " + std::to_string(d.n));

  LmmFit fit;
  fit.method = opts.method;
  fit.n_obs = d.n;
  fit.n_groups = static_cast<int>(d.groups.size());
  fit.lambda = opts.fixed_lambda ? *opts.fixed_lambda
                                 : optimize_lambda(d, opts.method, opts.lambda_hi);

  const GlsResult g = gls_at_lambda(d, fit.lambda);
  fit.beta0 = g.beta0;
  fit.beta1 = g.beta1;
  fit.log_likelihood = criterion(d, g, opts.method);

  const double denom = opts.method == FitMethod::reml ? d.n - 2.0 : static_cast<double>(d.n);
  double sigma_e2 = g.rss / denom;
  // y perfectly explained (e.g. y == x): the residual variance hits its
  // numeric floor and every derived SE loses meaning.
  const double scale = std::max(1.0, g.a22 / std::max(1.0, g.a11));
  fit.degenerate = sigma_e2 < 1e-18 * scale;
  sigma_e2 = std::max(sigma_e2, 1e-24);
  fit.sigma_e = std::sqrt(sigma_e2);
  fit.sigma_u = std::sqrt(fit.lambda * sigma_e2);

  fit.se0 = std::sqrt(sigma_e2 * g.a22 / g.det_a);
  fit.se1 = std::sqrt(sigma_e2 * g.a11 / g.det_a);

  fit.df0 = fit.df1 = d.n - 2.0;
  const boost::math::students_t tdist(fit.df1);
  const double tq = boost::math::quantile(tdist, 0.975);
  fit.ci95_lo0 = fit.beta0 - tq * fit.se0;
  fit.ci95_hi0 = fit.beta0 + tq * fit.se0;
  fit.ci95_lo1 = fit.beta1 - tq * fit.se1;
  fit.ci95_hi1 = fit.beta1 + tq * fit.se1;

  const auto pvalue = [&](double t) {
    if (!std::isfinite(t)) return 0.0;
    return 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(t)));
  };
  fit.t0 = fit.se0 > 0 ? fit.beta0 / fit.se0 : std::numeric_limits<double>::infinity();
  fit.t1 = fit.se1 > 0 ? fit.beta1 / fit.se1 : std::numeric_limits<double>::infinity();
  fit.p0 = pvalue(fit.t0);
  fit.p1 = pvalue(fit.t1);

  // BLUPs: u_j = lambda * (sum of marginal residuals in group) / (1 + lambda n_j)
  std::vector<double> sum_resid(d.groups.size(), 0.0);
  for (int i = 0; i < d.n; ++i)
    sum_resid[d.group_of_row[i]] += d.y[i] - (fit.beta0 + fit.beta1 * d.x[i]);
  std::vector<double> blup(d.groups.size());
  for (std::size_t j = 0; j < d.groups.size(); ++j)
    blup[j] = fit.lambda * sum_resid[j] / (1.0 + fit.lambda * d.groups[j].n);

  fit.fitted.resize(d.n);
  fit.residuals.resize(d.n);
  for (int i = 0; i < d.n; ++i) {
    fit.fitted[i] = fit.beta0 + fit.beta1 * d.x[i] + blup[d.group_of_row[i]];
    fit.residuals[i] = d.y[i] - fit.fitted[i];
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Random-slope extension (uncorrelated intercept + slope per donor).
// H_j = I + U C U' with U = [1 x], C = diag(lu, lv). With D = C^(1/2),
// everything reduces to 2x2 algebra per group:
//   K = I2 + D S D        (S = U'U)
//   a' H^-1 b = a'b - (D U'a)' K^-1 (D U'b)
//   log det H = log det K
// which stays valid on the lv = 0 boundary.

namespace {

struct Mat2 {
  double m00 = 0, m01 = 0, m11 = 0; // symmetric
};

struct SlopeCriterion {
  const Design& d;
  FitMethod method;

  double operator()(double lu, double lv) const { return evaluate(lu, lv, nullptr); }

  double evaluate(double lu, double lv, double* rss_out) const {
    const double d0 = std::sqrt(std::max(lu, 0.0));
    const double d1 = std::sqrt(std::max(lv, 0.0));

    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0, q = 0, logdet_h = 0;
    for (const auto& g : d.groups) {
      const Mat2 s{g.n, g.sx, g.sxx};
      // K = I + D S D
      const double k00 = 1.0 + d0 * s.m00 * d0;
      const double k01 = d0 * s.m01 * d1;
      const double k11 = 1.0 + d1 * s.m11 * d1;
      const double detk = k00 * k11 - k01 * k01;
      if (!(detk > 0) || !std::isfinite(detk)) return -std::numeric_limits<double>::infinity();
      logdet_h += std::log(detk);
      // K^-1
      const double i00 = k11 / detk, i01 = -k01 / detk, i11 = k00 / detk;

      // D U'a for a = 1-column, x-column, y
      const double du1[2] = {d0 * g.n, d1 * g.sx};
      const double dux[2] = {d0 * g.sx, d1 * g.sxx};
      const double duy[2] = {d0 * g.sy, d1 * g.sxy};
      const auto quad = [&](const double a[2], const double b[2]) {
        return a[0] * (i00 * b[0] + i01 * b[1]) + a[1] * (i01 * b[0] + i11 * b[1]);
      };
      a11 += g.n - quad(du1, du1);
      a12 += g.sx - quad(du1, dux);
      a22 += g.sxx - quad(dux, dux);
      b1 += g.sy - quad(du1, duy);
      b2 += g.sxy - quad(dux, duy);
      q += g.syy - quad(duy, duy);
    }

    const double det_a = a11 * a22 - a12 * a12;
    if (!(det_a > 0) || !std::isfinite(det_a))
      return -std::numeric_limits<double>::infinity();
    const double beta1 = (a11 * b2 - a12 * b1) / det_a;
    const double beta0 = (b1 - a12 * beta1) / a11;
    double rss = q - 2.0 * (beta0 * b1 + beta1 * b2) +
                 (beta0 * beta0 * a11 + 2.0 * beta0 * beta1 * a12 + beta1 * beta1 * a22);
    rss = std::max(rss, kRssFloor);
    if (rss_out) *rss_out = rss;

    const double n = d.n;
    if (method == FitMethod::ml) {
      return -0.5 * (n * std::log(rss / n) + logdet_h + n * (1.0 + std::log(kTwoPi)));
    }
    const double np = n - 2.0;
    return -0.5 * (np * std::log(rss / np) + logdet_h + std::log(det_a) +
                   np * (1.0 + std::log(kTwoPi)));
  }
};

struct SlopeFit {
  double lu = 0, lv = 0;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Nelder-Mead over (a, b) with (lu, lv) = (a^2, b^2); the squaring keeps the
// search unconstrained while the variance ratios stay non-negative.
SlopeFit fit_random_slope(const Design& d, FitMethod method) {
  const SlopeCriterion crit{d, method};
  const auto eval_sq = [&](double a, double b) { return crit(a * a, b * b); };

  double best_lu = 0, best_lv = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  const double coarse[] = {0.0, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e4};
  for (const double lu : coarse)
    for (const double lv : coarse) {
      const double v = crit(lu, lv);
      if (v > best_val) {
        best_val = v;
        best_lu = lu;
        best_lv = lv;
      }
    }

  struct Vertex {
    double a, b, val;
  };
  const double a0 = std::sqrt(best_lu), b0 = std::sqrt(best_lv);
  std::array<Vertex, 3> simplex{{{a0, b0, eval_sq(a0, b0)},
                                 {a0 + std::max(0.5, 0.5 * a0), b0, 0},
                                 {a0, b0 + std::max(0.5, 0.5 * b0), 0}}};
  simplex[1].val = eval_sq(simplex[1].a, simplex[1].b);
  simplex[2].val = eval_sq(simplex[2].a, simplex[2].b);

  for (int iter = 0; iter < 400; ++iter) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& l, const Vertex& r) { return l.val > r.val; });
    if (std::abs(simplex[0].val - simplex[2].val) <
        1e-13 * (std::abs(simplex[0].val) + 1.0))
      break;

    const double ca = 0.5 * (simplex[0].a + simplex[1].a);
    const double cb = 0.5 * (simplex[0].b + simplex[1].b);
    const Vertex& worst = simplex[2];
    Vertex refl{ca + (ca - worst.a), cb + (cb - worst.b), 0};
    refl.val = eval_sq(refl.a, refl.b);
    if (refl.val > simplex[0].val) {
      Vertex expand{ca + 2.0 * (ca - worst.a), cb + 2.0 * (cb - worst.b), 0};
      expand.val = eval_sq(expand.a, expand.b);
      simplex[2] = expand.val > refl.val ? expand : refl;
    } else if (refl.val > simplex[1].val) {
      simplex[2] = refl;
    } else {
      Vertex ctr{ca + 0.5 * (worst.a - ca), cb + 0.5 * (worst.b - cb), 0};
      ctr.val = eval_sq(ctr.a, ctr.b);
      if (ctr.val > worst.val) {
        simplex[2] = ctr;
      } else {
        for (int k = 1; k < 3; ++k) {
          simplex[k].a = 0.5 * (simplex[k].a + simplex[0].a);
          simplex[k].b = 0.5 * (simplex[k].b + simplex[0].b);
          simplex[k].val = eval_sq(simplex[k].a, simplex[k].b);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const Vertex& l, const Vertex& r) { return l.val > r.val; });

  SlopeFit out;
  out.lu = simplex[0].a * simplex[0].a;
  out.lv = simplex[0].b * simplex[0].b;
  out.loglik = simplex[0].val;
  if (best_val > out.loglik) { // NM never beats the grid: keep the grid point
    out.lu = best_lu;
    out.lv = best_lv;
    out.loglik = best_val;
  }
  out.converged = std::isfinite(out.loglik);
  return out;
}

} // namespace

LadderReport model_ladder(std::span<const ChatRpPair> pairs, FitMethod method) {
  LadderReport report;
  report.base = fit_random_intercept(pairs, LmmOptions{.method = method});

  const Design d = build_design(pairs);
  const SlopeFit slope = fit_random_slope(d, method);
  report.slope_converged = slope.converged;
  if (!slope.converged) return report;

  report.slope_loglik = slope.loglik;
  report.lrt_stat = std::max(0.0, 2.0 * (slope.loglik - report.base.log_likelihood));
  const boost::math::chi_squared chi1(1.0);
  report.lrt_p = boost::math::cdf(boost::math::complement(chi1, report.lrt_stat));
  report.extension_selected = report.lrt_p < 0.05;

  // sigma_v on the data scale, from the profiled sigma_e of the slope model
  double rss = 0;
  SlopeCriterion{d, method}.evaluate(slope.lu, slope.lv, &rss);
  const double denom = method == FitMethod::reml ? d.n - 2.0 : static_cast<double>(d.n);
  report.sigma_v = std::sqrt(slope.lv * rss / denom);
  return report;
}

std::vector<QqPoint> residual_diagnostics(const LmmFit& fit) {
  const std::size_t n = fit.residuals.size();
  if (n < 2)
    throw Error(Errc::empty_series, "need at least 2 residuals for a Q-Q table");

  double mean = 0;
  for (const double r : fit.residuals) mean += r;
  mean /= static_cast<double>(n);
  double var = 0;
  for (const double r : fit.residuals) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n - 1);
  const double sd = std::sqrt(std::max(var, 1e-300));

  std::vector<double> sorted(fit.residuals);
  std::sort(sorted.begin(), sorted.end());

  const boost::math::normal std_normal;
  std::vector<QqPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    out[i].theoretical = boost::math::quantile(std_normal, p);
    out[i].sample = (sorted[i] - mean) / sd;
  }
  return out;
}

} // namespace chatmeta
