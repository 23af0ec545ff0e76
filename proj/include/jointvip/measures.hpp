#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jointvip/ingest.hpp"

namespace jointvip {

// Which numerator the standardized mean difference uses. Both flavors divide
// by the pilot-sample standard deviation.
//   cross_sample: analysis treated mean - pilot (control) mean
//   pure:         analysis treated mean - analysis control mean
enum class SmdFlavor { cross_sample, pure };

std::string_view to_string(SmdFlavor f);
SmdFlavor parse_smd_flavor(std::string_view s);

struct CovariateMeasure {
  std::string name;
  double pilot_mean = 0.0;
  double pilot_sd = 0.0;
  double analysis_treated_mean = 0.0;
  double analysis_control_mean = 0.0;
  double smd_pure = 0.0;
  double smd_cross = 0.0;
  double outcome_cor = 0.0;
  double bias_pure = 0.0;
  double bias_cross = 0.0;

  double smd(SmdFlavor f) const { return f == SmdFlavor::pure ? smd_pure : smd_cross; }
  double bias(SmdFlavor f) const { return f == SmdFlavor::pure ? bias_pure : bias_cross; }

  bool operator==(const CovariateMeasure&) const = default;
};

struct JointVipModel {
  std::vector<CovariateMeasure> measures;  // in RoleSpec covariate order
  std::size_t n_pilot = 0;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  RoleSpec roles;
};

struct ReportOptions {
  SmdFlavor smd_flavor = SmdFlavor::cross_sample;
  bool use_abs = true;
  double bias_tol = 0.01;

  // Throws InvalidOptions unless bias_tol is finite and positive.
  void validate() const;
};

struct SummaryReport {
  double max_abs_bias = 0.0;  // unrounded
  std::size_t n_above_tol = 0;
  std::size_t n_plottable = 0;
};

struct TableRow {
  std::string name;
  double bias = 0.0;  // |bias| when use_abs, signed otherwise
};

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator), two-pass. Needs >= 2 values.
double sample_sd(std::span<const double> values);

// Pearson correlation over paired values, two-pass. Needs >= 3 pairs and a
// nonzero spread in both. The result is clipped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

double smd(const ValidatedStudy& study, std::string_view covariate, SmdFlavor flavor);

// Correlation of `covariate` with the table's outcome column. Only pilot rows
// ever feed this.
double outcome_correlation(const SampleTable& pilot, std::string_view covariate);

inline double bias_score(double smd_value, double cor_value) { return smd_value * cor_value; }

JointVipModel create_jointvip(const ValidatedStudy& study);

SummaryReport summarize(const JointVipModel& model, const ReportOptions& opts);

// Covariates with |bias| > bias_tol, by |bias| descending then name ascending.
std::vector<TableRow> tabulate(const JointVipModel& model, const ReportOptions& opts);

// Indices into model.measures that tabulate would return, in its order.
std::vector<std::size_t> ranked_above_tol(const JointVipModel& model, const ReportOptions& opts);

}  // namespace jointvip
