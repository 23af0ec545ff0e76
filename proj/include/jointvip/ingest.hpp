#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jointvip {

// Names the columns that play each role in a study.
struct RoleSpec {
  std::string treatment;
  std::string outcome;
  std::vector<std::string> covariates;
  std::optional<std::string> weight;

  // Throws InvalidRoles unless every named column is distinct, non-empty and
  // at least one covariate is listed.
  void validate() const;

  // Index of `name` in covariates, or nullopt.
  std::optional<std::size_t> covariate_index(std::string_view name) const;

  bool operator==(const RoleSpec&) const = default;
};

// Unit-level data bound to a RoleSpec. Stored column-wise: covariates[j][i]
// is covariate j of row i, aligned with roles.covariates.
struct SampleTable {
  RoleSpec roles;
  std::vector<std::uint8_t> treatment;
  std::vector<double> outcome;
  std::vector<std::vector<double>> covariates;
  std::vector<double> weight;  // 1.0 per row when roles.weight is unset

  std::size_t rows() const noexcept { return treatment.size(); }
  std::size_t n_treated() const noexcept;
  std::size_t n_control() const noexcept { return rows() - n_treated(); }

  bool operator==(const SampleTable&) const = default;
};

struct ValidatedStudy {
  SampleTable pilot;
  SampleTable analysis;
  RoleSpec roles;
};

enum class Transform { identity, log1p };

// Column name -> transform. Columns not listed are left untouched.
using TransformSpec = std::map<std::string, Transform>;

std::string_view to_string(Transform t);
Transform parse_transform(std::string_view tag);

// Parses comma-separated text with a header row. Only columns named in
// `roles` are read; others are ignored. Row numbers in errors are 1-based
// data rows (the header is row 0).
SampleTable parse_table(std::string_view csv_text, const RoleSpec& roles);

// parse_table for a post-adjustment sample: a missing covariate column is
// reported as CovariateMissingInPost, and both arms must be present.
SampleTable parse_post_table(std::string_view csv_text, const RoleSpec& roles);

// Writes the bound columns back out (treatment, outcome, covariates, weight
// when bound) with 17 significant digits, so parse_table(to_csv(t)) == t.
std::string to_csv(const SampleTable& table);

// Checks the pilot/analysis contract and returns copies of both tables.
ValidatedStudy validate_study(const SampleTable& pilot,
                              const SampleTable& analysis,
                              const RoleSpec& roles);

// Throws NoTreatedInAnalysis / NoControlInAnalysis when an arm is empty.
void require_both_arms(const SampleTable& table);

SampleTable apply_transforms(const SampleTable& table,
                             const TransformSpec& spec);

// Study manifest: two CSV paths plus roles and transforms, and an optional
// post-adjustment sample. Relative paths resolve against base_dir.
struct Manifest {
  std::filesystem::path pilot_csv;
  std::filesystem::path analysis_csv;
  std::optional<std::filesystem::path> post_analysis_csv;
  RoleSpec roles;
  TransformSpec transforms;
};

Manifest parse_manifest(std::string_view json_text,
                        const std::filesystem::path& base_dir = {});

// Parses just the role/transform keys (treatment, outcome, covariates,
// weight, transforms) from a JSON object. Used by the HTTP service.
std::pair<RoleSpec, TransformSpec> parse_roles_json(std::string_view json_text);

std::string read_text_file(const std::filesystem::path& path);

// A manifest with its tables read, transformed and validated.
struct LoadedStudy {
  ValidatedStudy study;
  TransformSpec transforms;
  std::optional<SampleTable> post_analysis;
};

LoadedStudy load_study(const std::string& pilot_csv,
                       const std::string& analysis_csv,
                       const RoleSpec& roles,
                       const TransformSpec& transforms);

LoadedStudy load_manifest(const std::filesystem::path& manifest_path);

}  // namespace jointvip
