#include "jointvip/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace jointvip {

namespace {

// Builds JSON text by hand so reals keep exactly 17 significant digits and
// keys keep insertion order.
class JsonObject {
public:
  JsonObject& raw(const std::string& key, const std::string& value) {
    text_ += (text_.empty() ? "{" : ",") + json_quote(key) + ":" + value;
    return *this;
  }
  JsonObject& real(const std::string& key, double v) { return raw(key, format_real(v)); }
  JsonObject& count(const std::string& key, std::size_t n) { return raw(key, std::to_string(n)); }
  JsonObject& str(const std::string& key, const std::string& s) { return raw(key, json_quote(s)); }
  JsonObject& boolean(const std::string& key, bool b) { return raw(key, b ? "true" : "false"); }

  std::string done() const { return text_.empty() ? "{}" : text_ + "}"; }

private:
  std::string text_;
};

std::string json_array(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out + "]";
}

std::string measure_json(const CovariateMeasure& m, SmdFlavor flavor) {
  return JsonObject()
      .str("name", m.name)
      .real("pilot_mean", m.pilot_mean)
      .real("pilot_sd", m.pilot_sd)
      .real("analysis_treated_mean", m.analysis_treated_mean)
      .real("analysis_control_mean", m.analysis_control_mean)
      .real("smd_pure", m.smd_pure)
      .real("smd_cross", m.smd_cross)
      .real("outcome_cor", m.outcome_cor)
      .real("bias_pure", m.bias_pure)
      .real("bias_cross", m.bias_cross)
      .real("smd", m.smd(flavor))
      .real("bias", m.bias(flavor))
      .done();
}

std::string post_measure_json(const PostMeasure& p, SmdFlavor flavor) {
  return JsonObject()
      .str("name", p.name)
      .real("post_treated_mean", p.post_treated_mean)
      .real("post_control_mean", p.post_control_mean)
      .real("post_smd_pure", p.post_smd_pure)
      .real("post_smd_cross", p.post_smd_cross)
      .real("post_bias_pure", p.post_bias_pure)
      .real("post_bias_cross", p.post_bias_cross)
      .real("post_smd", p.smd(flavor))
      .real("post_bias", p.bias(flavor))
      .done();
}

JsonObject model_fields(const JointVipModel& model, SmdFlavor flavor) {
  std::vector<std::string> covariates;
  for (const auto& m : model.measures) covariates.push_back(measure_json(m, flavor));
  JsonObject obj;
  obj.str("treatment", model.roles.treatment)
      .str("outcome", model.roles.outcome)
      .raw("covariates", json_array(covariates))
      .count("n_pilot", model.n_pilot)
      .count("n_treated", model.n_treated)
      .count("n_control", model.n_control);
  return obj;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// names[i] followed by the cells of row i; columns right-aligned.
std::string aligned_table(const std::vector<std::string>& headers,
                          const std::vector<std::string>& names,
                          const std::vector<std::vector<std::string>>& cells) {
  if (names.empty()) {
    std::string out = "<0 rows>:";
    for (const auto& h : headers) out += " " + h;
    return out + "\n";
  }
  std::size_t name_width = 0;
  for (const auto& n : names) name_width = std::max(name_width, n.size());
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < headers.size(); ++c) {
    std::size_t w = headers[c].size();
    for (const auto& row : cells) w = std::max(w, row[c].size());
    widths.push_back(w);
  }
  std::string out(name_width, ' ');
  for (std::size_t c = 0; c < headers.size(); ++c) out += " " + pad_left(headers[c], widths[c]);
  out += '\n';
  for (std::size_t r = 0; r < names.size(); ++r) {
    out += pad_right(names[r], name_width);
    for (std::size_t c = 0; c < headers.size(); ++c) out += " " + pad_left(cells[r][c], widths[c]);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string json_quote(const std::string& s) { return nlohmann::json(s).dump(); }

std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_rounded(double v, int decimals) {
  std::string s = format_fixed(v, decimals);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::string format_tolerance(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.7g", v);
  return buf;
}

std::string model_json(const JointVipModel& model, SmdFlavor flavor) {
  return model_fields(model, flavor).done();
}

std::string post_model_json(const PostJointVipModel& model, SmdFlavor flavor) {
  std::vector<std::string> post;
  for (const auto& p : model.post) post.push_back(post_measure_json(p, flavor));
  return model_fields(model.base, flavor)
      .raw("post_covariates", json_array(post))
      .count("n_post_treated", model.n_post_treated)
      .count("n_post_control", model.n_post_control)
      .done();
}

std::vector<std::string> summary_lines(const SummaryReport& report, const ReportOptions& opts) {
  return {
      "Max absolute bias is " + format_rounded(report.max_abs_bias),
      std::to_string(report.n_above_tol) + " variables are above the desired " +
          format_tolerance(opts.bias_tol) + " absolute bias tolerance",
      std::to_string(report.n_plottable) + " variables can be plotted",
  };
}

std::vector<std::string> post_summary_lines(const PostReport& report, const ReportOptions& opts) {
  std::vector<std::string> lines = summary_lines(report.base, opts);
  lines.emplace_back();
  lines.push_back("Max absolute post-bias is " + format_rounded(report.max_abs_post_bias));
  lines.push_back("Post-measure has " + std::to_string(report.n_post_above_tol) +
                  " variable(s) above the desired " + format_tolerance(report.post_bias_tol) +
                  " absolute bias tolerance");
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string summary_json(const SummaryReport& report, const ReportOptions& opts) {
  std::vector<std::string> lines;
  for (const auto& l : summary_lines(report, opts)) lines.push_back(json_quote(l));
  return JsonObject()
      .raw("max_abs_bias", format_rounded(report.max_abs_bias))
      .real("max_abs_bias_exact", report.max_abs_bias)
      .count("n_above_tol", report.n_above_tol)
      .count("n_plottable", report.n_plottable)
      .real("bias_tol", opts.bias_tol)
      .str("smd", std::string(to_string(opts.smd_flavor)))
      .boolean("use_abs", opts.use_abs)
      .raw("lines", json_array(lines))
      .done();
}

std::string post_summary_json(const PostReport& report, const ReportOptions& opts) {
  std::vector<std::string> lines;
  for (const auto& l : post_summary_lines(report, opts)) lines.push_back(json_quote(l));
  return JsonObject()
      .raw("base", summary_json(report.base, opts))
      .raw("max_abs_post_bias", format_rounded(report.max_abs_post_bias))
      .real("max_abs_post_bias_exact", report.max_abs_post_bias)
      .count("n_post_above_tol", report.n_post_above_tol)
      .real("post_bias_tol", report.post_bias_tol)
      .raw("lines", json_array(lines))
      .done();
}

std::string table_json(const std::vector<TableRow>& rows) {
  std::vector<std::string> items;
  for (const auto& r : rows) {
    items.push_back(JsonObject()
                        .str("name", r.name)
                        .real("bias", r.bias)
                        .str("bias_display", format_fixed(r.bias))
                        .done());
  }
  return json_array(items);
}

std::string post_table_json(const std::vector<PostTableRow>& rows) {
  std::vector<std::string> items;
  for (const auto& r : rows) {
    items.push_back(JsonObject()
                        .str("name", r.name)
                        .real("bias", r.bias)
                        .real("post_bias", r.post_bias)
                        .str("bias_display", format_fixed(r.bias))
                        .str("post_bias_display", format_fixed(r.post_bias))
                        .done());
  }
  return json_array(items);
}

std::string table_text(const std::vector<TableRow>& rows) {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    names.push_back(r.name);
    cells.push_back({format_fixed(r.bias)});
  }
  return aligned_table({"bias"}, names, cells);
}

std::string post_table_text(const std::vector<PostTableRow>& rows) {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    names.push_back(r.name);
    cells.push_back({format_fixed(r.bias), format_fixed(r.post_bias)});
  }
  return aligned_table({"bias", "post_bias"}, names, cells);
}

}  // namespace jointvip
