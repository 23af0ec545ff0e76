#include "jointvip/post.hpp"

#include <cmath>

#include "jointvip/error.hpp"

namespace jointvip {

namespace {

double weighted_arm_mean(const SampleTable& table, const std::vector<double>& column,
                         std::uint8_t arm) {
  double sum_wx = 0.0, sum_w = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (table.treatment[i] != arm) continue;
    sum_wx += table.weight[i] * column[i];
    sum_w += table.weight[i];
  }
  return sum_wx / sum_w;
}

}  // namespace

PostJointVipModel create_post_jointvip(const JointVipModel& base,
                                       const SampleTable& post_analysis) {
  require_both_arms(post_analysis);

  PostJointVipModel model;
  model.base = base;
  model.n_post_treated = post_analysis.n_treated();
  model.n_post_control = post_analysis.n_control();
  model.post.reserve(base.measures.size());

  for (const auto& m : base.measures) {
    const auto j = post_analysis.roles.covariate_index(m.name);
    if (!j) {
      throw Error(ErrorCode::CovariateMissingInPost,
                  "post-adjustment sample lacks covariate '" + m.name + "'",
                  {{"covariate", m.name}});
    }
    const auto& column = post_analysis.covariates[*j];

    PostMeasure p;
    p.name = m.name;
    p.post_treated_mean = weighted_arm_mean(post_analysis, column, 1);
    p.post_control_mean = weighted_arm_mean(post_analysis, column, 0);
    p.post_smd_pure = (p.post_treated_mean - p.post_control_mean) / m.pilot_sd;
    p.post_smd_cross = (p.post_treated_mean - m.pilot_mean) / m.pilot_sd;
    p.post_bias_pure = bias_score(p.post_smd_pure, m.outcome_cor);
    p.post_bias_cross = bias_score(p.post_smd_cross, m.outcome_cor);
    model.post.push_back(std::move(p));
  }
  return model;
}

PostReport post_summarize(const PostJointVipModel& model, const ReportOptions& opts,
                          double post_bias_tol) {
  if (!std::isfinite(post_bias_tol) || !(post_bias_tol > 0.0)) {
    throw Error(ErrorCode::InvalidOptions, "post bias tolerance must be finite and positive",
                {{"post_bias_tol", post_bias_tol}});
  }
  PostReport report;
  report.base = summarize(model.base, opts);
  report.post_bias_tol = post_bias_tol;
  for (const auto& p : model.post) {
    const double b = std::abs(p.bias(opts.smd_flavor));
    if (!std::isfinite(b)) continue;
    report.max_abs_post_bias = std::max(report.max_abs_post_bias, b);
    if (b > post_bias_tol) ++report.n_post_above_tol;
  }
  return report;
}

std::vector<PostTableRow> post_tabulate(const PostJointVipModel& model,
                                        const ReportOptions& opts) {
  std::vector<PostTableRow> rows;
  for (std::size_t j : ranked_above_tol(model.base, opts)) {
    const double b = model.base.measures[j].bias(opts.smd_flavor);
    const double pb = model.post[j].bias(opts.smd_flavor);
    rows.push_back({model.base.measures[j].name, opts.use_abs ? std::abs(b) : b,
                    opts.use_abs ? std::abs(pb) : pb});
  }
  return rows;
}

}  // namespace jointvip
