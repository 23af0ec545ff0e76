#pragma once

#include <string>
#include <vector>

#include "jointvip/measures.hpp"
#include "jointvip/post.hpp"

namespace jointvip {

// 17 significant digits ("%.17g"); non-finite values become "null".
std::string format_real(double v);

// Rounded to `decimals` places with trailing zeros dropped: 0.1130 -> "0.113",
// 0.0 -> "0". Used for the summary sentences.
std::string format_rounded(double v, int decimals = 3);

// Fixed `decimals` places, used in table cells: 0.045 -> "0.045".
std::string format_fixed(double v, int decimals = 3);

// Shortest form with up to 7 significant digits: 0.01 -> "0.01", 1.0 -> "1".
std::string format_tolerance(double v);

// Model JSON: {"treatment", "outcome", "covariates": [...], "n_pilot",
// "n_treated", "n_control"}. Each covariate object carries every
// CovariateMeasure field plus "smd" and "bias" for the chosen flavor.
std::string model_json(const JointVipModel& model, SmdFlavor flavor);

// model_json with a parallel "post_covariates" array and post arm counts.
std::string post_model_json(const PostJointVipModel& model, SmdFlavor flavor);

std::string summary_json(const SummaryReport& report, const ReportOptions& opts);
std::string post_summary_json(const PostReport& report, const ReportOptions& opts);
std::string table_json(const std::vector<TableRow>& rows);
std::string post_table_json(const std::vector<PostTableRow>& rows);

// The three summary sentences.
std::vector<std::string> summary_lines(const SummaryReport& report, const ReportOptions& opts);

// Base sentences, a blank line, then the two post-adjustment sentences.
std::vector<std::string> post_summary_lines(const PostReport& report, const ReportOptions& opts);

std::string join_lines(const std::vector<std::string>& lines);

// Right-aligned columns under a header, covariate names left-aligned:
//
//            bias
//   log_re75 0.113
std::string table_text(const std::vector<TableRow>& rows);
std::string post_table_text(const std::vector<PostTableRow>& rows);

std::string json_quote(const std::string& s);

}  // namespace jointvip
