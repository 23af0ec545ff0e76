#include "jointvip/measures.hpp"

#include <algorithm>
#include <cmath>

#include "jointvip/error.hpp"

namespace jointvip {

namespace {

// Slack allowed on |r| before clipping; anything further out is a bug.
constexpr double kCorrelationSlack = 1e-12;

const std::vector<double>& covariate_column(const SampleTable& table, std::string_view name) {
  const auto j = table.roles.covariate_index(name);
  if (!j) {
    throw Error(ErrorCode::UnknownCovariate, "unknown covariate '" + std::string(name) + "'",
                {{"covariate", std::string(name)}});
  }
  return table.covariates[*j];
}

struct ArmMeans {
  double treated = 0.0;
  double control = 0.0;
};

ArmMeans arm_means(const SampleTable& table, const std::vector<double>& column) {
  double sum_t = 0.0, sum_c = 0.0;
  std::size_t n_t = 0, n_c = 0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (table.treatment[i]) {
      sum_t += column[i];
      ++n_t;
    } else {
      sum_c += column[i];
      ++n_c;
    }
  }
  return {sum_t / static_cast<double>(n_t), sum_c / static_cast<double>(n_c)};
}

}  // namespace

std::string_view to_string(SmdFlavor f) {
  return f == SmdFlavor::pure ? "pure" : "cross-sample";
}

SmdFlavor parse_smd_flavor(std::string_view s) {
  if (s == "cross-sample" || s == "cross_sample" || s == "cross") return SmdFlavor::cross_sample;
  if (s == "pure") return SmdFlavor::pure;
  throw Error(ErrorCode::InvalidOptions, "unknown SMD flavor '" + std::string(s) + "'",
              {{"smd", std::string(s)}});
}

void ReportOptions::validate() const {
  if (!std::isfinite(bias_tol) || !(bias_tol > 0.0)) {
    throw Error(ErrorCode::InvalidOptions, "bias tolerance must be finite and positive",
                {{"bias_tol", bias_tol}});
  }
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::TooFewValues, "mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::TooFewValues, "standard deviation needs at least 2 values",
                {{"n", values.size()}});
  }
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::Internal, "correlation inputs differ in length");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::TooFewValues, "correlation needs at least 3 pairs",
                {{"n", x.size()}});
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::ZeroVariance, "first variable has zero variance");
  if (!(syy > 0.0)) throw Error(ErrorCode::ZeroVariance, "second variable has zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  if (std::abs(r) > 1.0 + kCorrelationSlack) {
    throw Error(ErrorCode::Internal, "correlation outside [-1, 1]", {{"r", r}});
  }
  return std::clamp(r, -1.0, 1.0);
}

double smd(const ValidatedStudy& study, std::string_view covariate, SmdFlavor flavor) {
  const auto& pilot_col = covariate_column(study.pilot, covariate);
  const auto& analysis_col = covariate_column(study.analysis, covariate);
  const ArmMeans arms = arm_means(study.analysis, analysis_col);
  const double reference = flavor == SmdFlavor::pure ? arms.control : mean(pilot_col);
  return (arms.treated - reference) / sample_sd(pilot_col);
}

double outcome_correlation(const SampleTable& pilot, std::string_view covariate) {
  const auto& x = covariate_column(pilot, covariate);
  try {
    return pearson(x, pilot.outcome);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroVariance) throw;
    const bool covariate_flat = sample_sd(x) == 0.0;
    const std::string column = covariate_flat ? std::string(covariate) : pilot.roles.outcome;
    throw Error(ErrorCode::ZeroVariance,
                "column '" + column + "' has zero variance in the pilot sample",
                {{"column", column}});
  }
}

JointVipModel create_jointvip(const ValidatedStudy& study) {
  const RoleSpec& roles = study.roles;
  JointVipModel model;
  model.roles = roles;
  model.n_pilot = study.pilot.rows();
  model.n_treated = study.analysis.n_treated();
  model.n_control = study.analysis.n_control();
  model.measures.reserve(roles.covariates.size());

  for (std::size_t j = 0; j < roles.covariates.size(); ++j) {
    const auto& pilot_col = study.pilot.covariates[j];
    const ArmMeans arms = arm_means(study.analysis, study.analysis.covariates[j]);

    CovariateMeasure m;
    m.name = roles.covariates[j];
    m.pilot_mean = mean(pilot_col);
    m.pilot_sd = sample_sd(pilot_col);
    m.analysis_treated_mean = arms.treated;
    m.analysis_control_mean = arms.control;
    m.smd_pure = (arms.treated - arms.control) / m.pilot_sd;
    m.smd_cross = (arms.treated - m.pilot_mean) / m.pilot_sd;
    m.outcome_cor = outcome_correlation(study.pilot, m.name);
    m.bias_pure = bias_score(m.smd_pure, m.outcome_cor);
    m.bias_cross = bias_score(m.smd_cross, m.outcome_cor);
    model.measures.push_back(std::move(m));
  }
  return model;
}

SummaryReport summarize(const JointVipModel& model, const ReportOptions& opts) {
  opts.validate();
  SummaryReport report;
  for (const auto& m : model.measures) {
    const double x = m.smd(opts.smd_flavor);
    const double b = m.bias(opts.smd_flavor);
    if (!std::isfinite(x) || !std::isfinite(m.outcome_cor)) continue;
    ++report.n_plottable;
    report.max_abs_bias = std::max(report.max_abs_bias, std::abs(b));
    if (std::abs(b) > opts.bias_tol) ++report.n_above_tol;
  }
  return report;
}

std::vector<std::size_t> ranked_above_tol(const JointVipModel& model, const ReportOptions& opts) {
  opts.validate();
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < model.measures.size(); ++j) {
    const double b = model.measures[j].bias(opts.smd_flavor);
    if (std::isfinite(b) && std::abs(b) > opts.bias_tol) idx.push_back(j);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ba = std::abs(model.measures[a].bias(opts.smd_flavor));
    const double bb = std::abs(model.measures[b].bias(opts.smd_flavor));
    if (ba != bb) return ba > bb;
    return model.measures[a].name < model.measures[b].name;
  });
  return idx;
}

std::vector<TableRow> tabulate(const JointVipModel& model, const ReportOptions& opts) {
  std::vector<TableRow> rows;
  for (std::size_t j : ranked_above_tol(model, opts)) {
    const double b = model.measures[j].bias(opts.smd_flavor);
    rows.push_back({model.measures[j].name, opts.use_abs ? std::abs(b) : b});
  }
  return rows;
}

}  // namespace jointvip
