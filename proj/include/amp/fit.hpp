#pragma once
// Small fitting helpers shared by the diagnostics: least-squares power-law
// fits in log-log coordinates and Spearman rank correlation.

#include <span>
#include <vector>

namespace amp {

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  // in log coordinates
  double residual = 0.0;   // RMS of log-residuals
};

// Fits log(y) = slope*log(x) + intercept. Requires x, y > 0 and >= 2 points.
PowerLawFit loglog_fit(std::span<const double> x, std::span<const double> y);

double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace amp
