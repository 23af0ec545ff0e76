#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "jointvip/ingest.hpp"
#include "jointvip/measures.hpp"

namespace jointvip {

struct PostMeasure {
  std::string name;
  double post_treated_mean = 0.0;
  double post_control_mean = 0.0;
  double post_smd_pure = 0.0;
  double post_smd_cross = 0.0;
  double post_bias_pure = 0.0;
  double post_bias_cross = 0.0;

  double smd(SmdFlavor f) const { return f == SmdFlavor::pure ? post_smd_pure : post_smd_cross; }
  double bias(SmdFlavor f) const {
    return f == SmdFlavor::pure ? post_bias_pure : post_bias_cross;
  }

  bool operator==(const PostMeasure&) const = default;
};

// A base model plus balance recomputed on an adjusted (matched or weighted)
// analysis sample. post[j] corresponds to base.measures[j]. Pilot SD, pilot
// mean and outcome correlation are taken from the base model unchanged.
struct PostJointVipModel {
  JointVipModel base;
  std::vector<PostMeasure> post;
  std::size_t n_post_treated = 0;
  std::size_t n_post_control = 0;
};

struct PostReport {
  SummaryReport base;
  double max_abs_post_bias = 0.0;
  std::size_t n_post_above_tol = 0;
  double post_bias_tol = 0.005;
};

struct PostTableRow {
  std::string name;
  double bias = 0.0;
  double post_bias = 0.0;
};

inline constexpr double kDefaultPostBiasTol = 0.005;

// Arm means are weighted by the table's weight column (all 1 unless bound).
// Covariates are matched to the base model by name.
PostJointVipModel create_post_jointvip(const JointVipModel& base, const SampleTable& post_analysis);

PostReport post_summarize(const PostJointVipModel& model, const ReportOptions& opts,
                          double post_bias_tol = kDefaultPostBiasTol);

// Rows are selected and ordered on the base bias, exactly as tabulate().
std::vector<PostTableRow> post_tabulate(const PostJointVipModel& model, const ReportOptions& opts);

}  // namespace jointvip
