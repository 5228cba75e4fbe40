#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chatmeta/metrics.hpp"

namespace chatmeta {

enum class FitMethod { reml, ml };

FitMethod fit_method_from_name(std::string_view name);

// Random-intercept linear mixed model
//
//   rp_ego = beta0 + beta1 * rp_alter + u_donor + e,   u ~ N(0, sigma_u^2)
//
// fitted by profiling the (restricted) log-likelihood over the variance
// ratio lambda = sigma_u^2 / sigma_e^2. No transformation or
// standardization of the inputs.
struct LmmFit {
  double beta0 = 0, beta1 = 0;
  double se0 = 0, se1 = 0;
  double ci95_lo0 = 0, ci95_hi0 = 0;
  double ci95_lo1 = 0, ci95_hi1 = 0;
  double sigma_u = 0, sigma_e = 0;
  double lambda = 0;             // sigma_u^2 / sigma_e^2
  double df0 = 0, df1 = 0;       // residual method: n_obs - 2
  double t0 = 0, t1 = 0;
  double p0 = 1, p1 = 1;
  double log_likelihood = 0;     // maximized criterion (natural log)
  FitMethod method = FitMethod::reml;
  int n_obs = 0;
  int n_groups = 0;
  bool degenerate = false;       // residual variance collapsed (e.g. y == x)
  std::vector<double> fitted;    // beta0 + beta1*x + BLUP(u), input row order
  std::vector<double> residuals; // y - fitted, input row order
};

struct LmmOptions {
  FitMethod method = FitMethod::reml;
  // Pin lambda instead of optimizing; lambda = 0 reduces the fit to OLS.
  std::optional<double> fixed_lambda;
  double lambda_hi = 1e6; // optimization upper bound
};

LmmFit fit_random_intercept(std::span<const ChatRpPair> pairs, const LmmOptions& opts = {});

// Profiled criterion at a given lambda (same normalization as
// LmmFit::log_likelihood); exposed for grid audits of the optimizer.
double profiled_loglik(std::span<const ChatRpPair> pairs, double lambda, FitMethod method);

// Model ladder: starts from the random-intercept fit and tests the
// uncorrelated random-slope extension with a likelihood-ratio test at
// alpha = 0.05. The extension is selected only when it improves fit.
struct LadderReport {
  LmmFit base;
  bool slope_converged = false;
  double slope_loglik = 0;
  double sigma_v = 0; // random-slope SD under the extension
  double lrt_stat = 0;
  double lrt_p = 1;
  bool extension_selected = false;
};

LadderReport model_ladder(std::span<const ChatRpPair> pairs,
                          FitMethod method = FitMethod::reml);

// Plot data for a residual Q-Q check: sorted standardized residuals against
// normal quantiles at (i - 0.5)/n. Throws EmptySeries when fewer than two
// residuals exist.
struct QqPoint {
  double theoretical = 0;
  double sample = 0;
};

std::vector<QqPoint> residual_diagnostics(const LmmFit& fit);

} // namespace chatmeta
