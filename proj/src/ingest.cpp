#include "jointvip/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "jointvip/error.hpp"
#include "jointvip/measures.hpp"

namespace jointvip {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

nlohmann::json cell_detail(std::size_t row, const std::string& column) {
  return {{"row", row}, {"column", column}};
}

double parse_cell(std::string_view cell, std::size_t row, const std::string& column) {
  if (cell.empty() || cell == "NA") {
    throw Error(ErrorCode::MissingValue,
                "missing value in column '" + column + "' at row " + std::to_string(row),
                cell_detail(row, column));
  }
  std::string_view digits = cell;
  if (digits.front() == '+') digits.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::NonNumericCell,
                "non-numeric value '" + std::string(cell) + "' in column '" + column +
                    "' at row " + std::to_string(row),
                cell_detail(row, column));
  }
  return value;
}

std::string format_csv_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SampleTable parse_table_impl(std::string_view csv_text, const RoleSpec& roles,
                             bool post_sample) {
  roles.validate();
  const auto lines = split_lines(csv_text);
  if (lines.empty()) throw Error(ErrorCode::MalformedCsv, "CSV text has no header row");

  const auto header = split_fields(lines.front());
  auto find_column = [&](const std::string& name, bool is_covariate) -> std::size_t {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] != name) continue;
      if (found != header.size()) {
        throw Error(ErrorCode::MalformedCsv, "duplicate header column '" + name + "'",
                    {{"column", name}});
      }
      found = i;
    }
    if (found == header.size()) {
      if (post_sample && is_covariate) {
        throw Error(ErrorCode::CovariateMissingInPost,
                    "post-adjustment sample lacks covariate '" + name + "'",
                    {{"covariate", name}});
      }
      throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header",
                  {{"column", name}});
    }
    return found;
  };

  const std::size_t treat_idx = find_column(roles.treatment, false);
  const std::size_t outcome_idx = find_column(roles.outcome, false);
  std::vector<std::size_t> cov_idx;
  cov_idx.reserve(roles.covariates.size());
  for (const auto& name : roles.covariates) cov_idx.push_back(find_column(name, true));
  const std::optional<std::size_t> weight_idx =
      roles.weight ? std::optional(find_column(*roles.weight, false)) : std::nullopt;

  SampleTable table;
  table.roles = roles;
  table.covariates.resize(roles.covariates.size());
  const std::size_t n = lines.size() - 1;
  table.treatment.reserve(n);
  table.outcome.reserve(n);
  table.weight.reserve(n);
  for (auto& col : table.covariates) col.reserve(n);

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv,
                  "row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()),
                  {{"row", r}});
    }
    const double t = parse_cell(fields[treat_idx], r, roles.treatment);
    if (t != 0.0 && t != 1.0) {
      throw Error(ErrorCode::NonBinaryTreatment,
                  "treatment value '" + std::string(fields[treat_idx]) + "' at row " +
                      std::to_string(r) + " is not 0 or 1",
                  {{"row", r}});
    }
    table.treatment.push_back(t == 1.0 ? 1 : 0);
    table.outcome.push_back(parse_cell(fields[outcome_idx], r, roles.outcome));
    for (std::size_t j = 0; j < cov_idx.size(); ++j) {
      table.covariates[j].push_back(parse_cell(fields[cov_idx[j]], r, roles.covariates[j]));
    }
    if (weight_idx) {
      const double w = parse_cell(fields[*weight_idx], r, *roles.weight);
      if (!(w > 0.0)) {
        throw Error(ErrorCode::NonPositiveWeight,
                    "weight at row " + std::to_string(r) + " is not positive",
                    cell_detail(r, *roles.weight));
      }
      table.weight.push_back(w);
    } else {
      table.weight.push_back(1.0);
    }
  }
  return table;
}

}  // namespace

std::size_t SampleTable::n_treated() const noexcept {
  return static_cast<std::size_t>(std::count(treatment.begin(), treatment.end(), 1));
}

void RoleSpec::validate() const {
  if (covariates.empty()) throw Error(ErrorCode::InvalidRoles, "no covariates named");
  std::set<std::string_view> seen;
  auto add = [&](const std::string& name, const char* role) {
    if (name.empty()) {
      throw Error(ErrorCode::InvalidRoles, std::string("empty column name for ") + role);
    }
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::InvalidRoles, "column '" + name + "' is named more than once",
                  {{"column", name}});
    }
  };
  add(treatment, "treatment");
  add(outcome, "outcome");
  if (weight) add(*weight, "weight");
  for (const auto& c : covariates) add(c, "covariate");
}

std::optional<std::size_t> RoleSpec::covariate_index(std::string_view name) const {
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    if (covariates[j] == name) return j;
  }
  return std::nullopt;
}

std::string_view to_string(Transform t) {
  return t == Transform::log1p ? "log1p" : "identity";
}

Transform parse_transform(std::string_view tag) {
  if (tag == "identity") return Transform::identity;
  if (tag == "log1p") return Transform::log1p;
  throw Error(ErrorCode::InvalidTransform, "unknown transform '" + std::string(tag) + "'",
              {{"transform", std::string(tag)}});
}

SampleTable parse_table(std::string_view csv_text, const RoleSpec& roles) {
  return parse_table_impl(csv_text, roles, false);
}

SampleTable parse_post_table(std::string_view csv_text, const RoleSpec& roles) {
  SampleTable table = parse_table_impl(csv_text, roles, true);
  require_both_arms(table);
  return table;
}

std::string to_csv(const SampleTable& table) {
  const RoleSpec& roles = table.roles;
  std::string out = roles.treatment + "," + roles.outcome;
  for (const auto& c : roles.covariates) out += "," + c;
  if (roles.weight) out += "," + *roles.weight;
  out += '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out += table.treatment[i] ? "1" : "0";
    out += ',' + format_csv_real(table.outcome[i]);
    for (const auto& col : table.covariates) out += ',' + format_csv_real(col[i]);
    if (roles.weight) out += ',' + format_csv_real(table.weight[i]);
    out += '\n';
  }
  return out;
}

void require_both_arms(const SampleTable& table) {
  const std::size_t treated = table.n_treated();
  if (treated == 0) {
    throw Error(ErrorCode::NoTreatedInAnalysis, "sample has no treated units");
  }
  if (treated == table.rows()) {
    throw Error(ErrorCode::NoControlInAnalysis, "sample has no control units");
  }
}

ValidatedStudy validate_study(const SampleTable& pilot, const SampleTable& analysis,
                              const RoleSpec& roles) {
  roles.validate();
  if (pilot.roles != roles || analysis.roles != roles) {
    throw Error(ErrorCode::InvalidRoles, "pilot and analysis tables are bound to different roles");
  }
  if (const std::size_t treated = pilot.n_treated(); treated > 0) {
    throw Error(ErrorCode::TreatedInPilot,
                std::to_string(treated) + " treated unit(s) in the pilot sample",
                {{"count", treated}});
  }
  require_both_arms(analysis);
  if (pilot.rows() < 2) {
    throw Error(ErrorCode::TooFewValues, "pilot sample needs at least 2 rows",
                {{"rows", pilot.rows()}});
  }
  for (std::size_t j = 0; j < roles.covariates.size(); ++j) {
    const double sd = sample_sd(pilot.covariates[j]);
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw Error(ErrorCode::ZeroPilotVariance,
                  "covariate '" + roles.covariates[j] + "' is constant in the pilot sample",
                  {{"covariate", roles.covariates[j]}});
    }
  }
  return ValidatedStudy{pilot, analysis, roles};
}

SampleTable apply_transforms(const SampleTable& table, const TransformSpec& spec) {
  SampleTable out = table;
  for (const auto& [column, transform] : spec) {
    std::vector<double>* values = nullptr;
    if (column == table.roles.outcome) {
      values = &out.outcome;
    } else if (const auto j = table.roles.covariate_index(column)) {
      values = &out.covariates[*j];
    } else {
      throw Error(ErrorCode::InvalidTransform,
                  "transform target '" + column + "' is not the outcome or a covariate",
                  {{"column", column}});
    }
    if (transform == Transform::identity) continue;
    for (std::size_t i = 0; i < values->size(); ++i) {
      double& v = (*values)[i];
      if (v < 0.0) {
        throw Error(ErrorCode::NegativeInputForLog,
                    "log1p of negative value in column '" + column + "' at row " +
                        std::to_string(i + 1),
                    cell_detail(i + 1, column));
      }
      v = std::log1p(v);
    }
  }
  return out;
}

namespace {

std::pair<RoleSpec, TransformSpec> roles_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidManifest, "expected a JSON object");
  auto required_string = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::InvalidManifest, std::string("missing string key '") + key + "'",
                  {{"key", key}});
    }
    return j[key].get<std::string>();
  };
  RoleSpec roles;
  roles.treatment = required_string("treatment");
  roles.outcome = required_string("outcome");
  if (!j.contains("covariates") || !j["covariates"].is_array()) {
    throw Error(ErrorCode::InvalidManifest, "missing array key 'covariates'",
                {{"key", "covariates"}});
  }
  for (const auto& c : j["covariates"]) {
    if (!c.is_string()) {
      throw Error(ErrorCode::InvalidManifest, "covariate names must be strings");
    }
    roles.covariates.push_back(c.get<std::string>());
  }
  if (j.contains("weight") && !j["weight"].is_null()) {
    if (!j["weight"].is_string()) {
      throw Error(ErrorCode::InvalidManifest, "'weight' must be a string");
    }
    roles.weight = j["weight"].get<std::string>();
  }
  TransformSpec transforms;
  if (j.contains("transforms") && !j["transforms"].is_null()) {
    if (!j["transforms"].is_object()) {
      throw Error(ErrorCode::InvalidManifest, "'transforms' must be an object");
    }
    for (const auto& [column, tag] : j["transforms"].items()) {
      if (!tag.is_string()) {
        throw Error(ErrorCode::InvalidManifest, "transform tags must be strings");
      }
      transforms[column] = parse_transform(tag.get<std::string>());
    }
  }
  roles.validate();
  return {std::move(roles), std::move(transforms)};
}

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::pair<RoleSpec, TransformSpec> parse_roles_json(std::string_view json_text) {
  return roles_from_json(parse_json(json_text));
}

Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  const nlohmann::json j = parse_json(json_text);
  auto [roles, transforms] = roles_from_json(j);
  auto path_key = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::InvalidManifest, std::string("missing string key '") + key + "'",
                  {{"key", key}});
    }
    std::filesystem::path p = j[key].get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  Manifest m;
  m.pilot_csv = path_key("pilot_csv");
  m.analysis_csv = path_key("analysis_csv");
  if (j.contains("post_analysis_csv") && !j["post_analysis_csv"].is_null()) {
    m.post_analysis_csv = path_key("post_analysis_csv");
  }
  m.roles = std::move(roles);
  m.transforms = std::move(transforms);
  return m;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'",
                {{"path", path.string()}});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedStudy load_study(const std::string& pilot_csv, const std::string& analysis_csv,
                       const RoleSpec& roles, const TransformSpec& transforms) {
  const SampleTable pilot = apply_transforms(parse_table(pilot_csv, roles), transforms);
  const SampleTable analysis = apply_transforms(parse_table(analysis_csv, roles), transforms);
  return LoadedStudy{validate_study(pilot, analysis, roles), transforms, std::nullopt};
}

LoadedStudy load_manifest(const std::filesystem::path& manifest_path) {
  const Manifest m =
      parse_manifest(read_text_file(manifest_path), manifest_path.parent_path());
  LoadedStudy loaded = load_study(read_text_file(m.pilot_csv), read_text_file(m.analysis_csv),
                                  m.roles, m.transforms);
  if (m.post_analysis_csv) {
    loaded.post_analysis = apply_transforms(
        parse_post_table(read_text_file(*m.post_analysis_csv), m.roles), m.transforms);
  }
  return loaded;
}

}  // namespace jointvip
