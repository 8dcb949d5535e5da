#pragma once
// One-way repeated-measures ANOVA. Subjects are their own controls: total
// variance splits into subject, condition and error components, and the
// condition effect is tested against the subject-by-condition interaction.
// The F tail probability comes from the regularized incomplete beta
// function (boost::math), well past the 1e-10 accuracy target.

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "stylusfx/io.hpp"

namespace stylusfx {

struct AnovaResult {
  double F = 0.0;
  int df_num = 0;
  int df_den = 0;
  double p = 1.0;
};

/// Upper tail of the F distribution: P(F_{d1,d2} > f).
inline double f_tail_probability(double f, int d1, int d2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  double x = static_cast<double>(d2) / (d2 + d1 * f);
  return boost::math::ibeta(d2 / 2.0, d1 / 2.0, x);
}

/// data[i][j] = measurement of participant i under condition j. Requires a
/// complete matrix with at least 2 participants and 2 conditions.
inline AnovaResult rm_anova_oneway(const std::vector<std::vector<double>>& data) {
  size_t n = data.size();
  if (n < 2) throw error("rm_anova: need at least 2 participants");
  size_t k = data[0].size();
  if (k < 2) throw error("rm_anova: need at least 2 conditions");
  for (const auto& row : data)
    if (row.size() != k) throw error("rm_anova: incomplete matrix");

  double grand = 0.0;
  for (const auto& row : data)
    for (double v : row) grand += v;
  grand /= static_cast<double>(n * k);

  std::vector<double> subj_mean(n, 0.0), cond_mean(k, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j) {
      subj_mean[i] += data[i][j] / static_cast<double>(k);
      cond_mean[j] += data[i][j] / static_cast<double>(n);
    }

  double ss_total = 0.0, ss_subj = 0.0, ss_cond = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j) {
      double d = data[i][j] - grand;
      ss_total += d * d;
    }
  for (double m : subj_mean) ss_subj += static_cast<double>(k) * (m - grand) * (m - grand);
  for (double m : cond_mean) ss_cond += static_cast<double>(n) * (m - grand) * (m - grand);
  double ss_err = ss_total - ss_subj - ss_cond;

  AnovaResult r;
  r.df_num = static_cast<int>(k) - 1;
  r.df_den = (static_cast<int>(k) - 1) * (static_cast<int>(n) - 1);

  double scale = std::max(ss_total, 1e-300);
  if (ss_cond <= 1e-12 * scale) {
    r.F = 0.0;
    r.p = 1.0;
    return r;
  }
  if (ss_err <= 1e-12 * scale) {
    r.F = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.F = (ss_cond / r.df_num) / (ss_err / r.df_den);
  r.p = f_tail_probability(r.F, r.df_num, r.df_den);
  return r;
}

}  // namespace stylusfx
