#include "jointvip/jointvip.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "jointvip/error.hpp"
#include "jointvip/ingest.hpp"
#include "jointvip/measures.hpp"
#include "jointvip/post.hpp"
#include "jointvip/render.hpp"
#include "jointvip/report.hpp"
#include "jointvip/service.hpp"

struct jvip_study {
  jointvip::LoadedStudy loaded;
};

struct jvip_model {
  jointvip::JointVipModel model;
};

struct jvip_post_model {
  jointvip::PostJointVipModel post;
};

namespace {

struct LastError {
  jvip_status status = JVIP_OK;
  std::string message;
  std::string json = "{}";
};

thread_local LastError last_error;

jvip_status status_of(jointvip::ErrorCode code) {
  using jointvip::ErrorCode;
  switch (code) {
    case ErrorCode::MalformedCsv: return JVIP_E_MALFORMED_CSV;
    case ErrorCode::MissingColumn: return JVIP_E_MISSING_COLUMN;
    case ErrorCode::NonNumericCell: return JVIP_E_NON_NUMERIC_CELL;
    case ErrorCode::MissingValue: return JVIP_E_MISSING_VALUE;
    case ErrorCode::NonBinaryTreatment: return JVIP_E_NON_BINARY_TREATMENT;
    case ErrorCode::NonPositiveWeight: return JVIP_E_NON_POSITIVE_WEIGHT;
    case ErrorCode::InvalidRoles: return JVIP_E_INVALID_ROLES;
    case ErrorCode::InvalidTransform: return JVIP_E_INVALID_TRANSFORM;
    case ErrorCode::NegativeInputForLog: return JVIP_E_NEGATIVE_INPUT_FOR_LOG;
    case ErrorCode::InvalidManifest: return JVIP_E_INVALID_MANIFEST;
    case ErrorCode::TreatedInPilot: return JVIP_E_TREATED_IN_PILOT;
    case ErrorCode::NoTreatedInAnalysis: return JVIP_E_NO_TREATED_IN_ANALYSIS;
    case ErrorCode::NoControlInAnalysis: return JVIP_E_NO_CONTROL_IN_ANALYSIS;
    case ErrorCode::ZeroPilotVariance: return JVIP_E_ZERO_PILOT_VARIANCE;
    case ErrorCode::TooFewValues: return JVIP_E_TOO_FEW_VALUES;
    case ErrorCode::ZeroVariance: return JVIP_E_ZERO_VARIANCE;
    case ErrorCode::UnknownCovariate: return JVIP_E_UNKNOWN_COVARIATE;
    case ErrorCode::InvalidOptions: return JVIP_E_INVALID_OPTIONS;
    case ErrorCode::CovariateMissingInPost: return JVIP_E_COVARIATE_MISSING_IN_POST;
    case ErrorCode::InvalidRange: return JVIP_E_INVALID_RANGE;
    case ErrorCode::IoError: return JVIP_E_IO;
    case ErrorCode::Internal: return JVIP_E_INTERNAL;
  }
  return JVIP_E_INTERNAL;
}

jvip_status fail(jvip_status status, const std::string& message, const std::string& json) {
  last_error.status = status;
  last_error.message = message;
  last_error.json = json;
  return status;
}

jvip_status fail(jvip_status status, const std::string& message) {
  nlohmann::json j = {{"code", jvip_status_name(status)}, {"message", message}};
  return fail(status, message, j.dump());
}

// Runs fn, translating exceptions into a status and the thread's last error.
template <typename Fn>
jvip_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return JVIP_OK;
  } catch (const jointvip::Error& e) {
    return fail(status_of(e.code()), e.what(), e.to_json().dump());
  } catch (const std::bad_alloc&) {
    return fail(JVIP_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(JVIP_E_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

jointvip::ReportOptions to_cpp(const jvip_report_options* opts) {
  jointvip::ReportOptions out;
  if (!opts) return out;
  out.smd_flavor = opts->smd_flavor == JVIP_SMD_PURE ? jointvip::SmdFlavor::pure
                                                      : jointvip::SmdFlavor::cross_sample;
  out.use_abs = opts->use_abs != 0;
  out.bias_tol = opts->bias_tol;
  return out;
}

jointvip::SmdFlavor to_cpp(jvip_smd_flavor f) {
  return f == JVIP_SMD_PURE ? jointvip::SmdFlavor::pure : jointvip::SmdFlavor::cross_sample;
}

#define JVIP_REQUIRE(cond)                                                 \
  do {                                                                     \
    if (!(cond)) return fail(JVIP_E_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* jvip_version(void) { return JVIP_VERSION; }

jvip_report_options jvip_report_options_default(void) {
  return jvip_report_options{JVIP_SMD_CROSS_SAMPLE, 1, 0.01};
}

jvip_plot_options jvip_plot_options_default(void) {
  const jointvip::PlotSpec spec;
  jvip_plot_options o{};
  o.report = jvip_report_options_default();
  o.width_px = spec.width_px;
  o.height_px = spec.height_px;
  o.title = nullptr;
  o.label_above_tol_only = 1;
  o.show_post_trails = 0;
  o.curve_levels = nullptr;
  o.n_curve_levels = 0;
  return o;
}

jvip_serve_options jvip_serve_options_default(void) {
  const jointvip::ServiceConfig cfg;
  jvip_serve_options o{};
  o.host = "127.0.0.1";
  o.port = 8080;
  o.max_sessions = cfg.max_sessions;
  o.max_payload_bytes = cfg.max_payload_bytes;
  o.cors_origin = nullptr;
  o.on_ready = nullptr;
  o.user_data = nullptr;
  return o;
}

const char* jvip_status_name(jvip_status status) {
  switch (status) {
    case JVIP_OK: return "Ok";
    case JVIP_E_INVALID_ARGUMENT: return "InvalidArgument";
    case JVIP_E_NO_POST_SAMPLE: return "NoPostSample";
    default: break;
  }
  for (int c = 0; c <= static_cast<int>(jointvip::ErrorCode::Internal); ++c) {
    const auto code = static_cast<jointvip::ErrorCode>(c);
    if (status_of(code) == status) return jointvip::to_string(code).data();
  }
  return "Unknown";
}

jvip_status jvip_last_error_status(void) { return last_error.status; }
const char* jvip_last_error_message(void) { return last_error.message.c_str(); }
const char* jvip_last_error_json(void) { return last_error.json.c_str(); }

void jvip_string_free(char* s) { std::free(s); }

jvip_status jvip_study_load_manifest(const char* manifest_path, jvip_study** out) {
  JVIP_REQUIRE(manifest_path && out);
  *out = nullptr;
  return guarded([&] { *out = new jvip_study{jointvip::load_manifest(manifest_path)}; });
}

jvip_status jvip_study_from_csv(const char* pilot_csv, const char* analysis_csv,
                                const char* roles_json, jvip_study** out) {
  JVIP_REQUIRE(pilot_csv && analysis_csv && roles_json && out);
  *out = nullptr;
  return guarded([&] {
    const auto [roles, transforms] = jointvip::parse_roles_json(roles_json);
    *out = new jvip_study{jointvip::load_study(pilot_csv, analysis_csv, roles, transforms)};
  });
}

int jvip_study_has_post(const jvip_study* study) {
  return study && study->loaded.post_analysis.has_value() ? 1 : 0;
}

void jvip_study_free(jvip_study* study) { delete study; }

jvip_status jvip_model_create(const jvip_study* study, jvip_model** out) {
  JVIP_REQUIRE(study && out);
  *out = nullptr;
  return guarded([&] { *out = new jvip_model{jointvip::create_jointvip(study->loaded.study)}; });
}

void jvip_model_free(jvip_model* model) { delete model; }

size_t jvip_model_covariate_count(const jvip_model* model) {
  return model ? model->model.measures.size() : 0;
}

jvip_status jvip_model_to_json(const jvip_model* model, jvip_smd_flavor flavor, char** out) {
  JVIP_REQUIRE(model && out);
  *out = nullptr;
  return guarded([&] { *out = dup_string(jointvip::model_json(model->model, to_cpp(flavor))); });
}

jvip_status jvip_model_summary(const jvip_model* model, const jvip_report_options* opts,
                               double* max_abs_bias, size_t* n_above_tol, size_t* n_plottable) {
  JVIP_REQUIRE(model);
  return guarded([&] {
    const auto report = jointvip::summarize(model->model, to_cpp(opts));
    if (max_abs_bias) *max_abs_bias = report.max_abs_bias;
    if (n_above_tol) *n_above_tol = report.n_above_tol;
    if (n_plottable) *n_plottable = report.n_plottable;
  });
}

jvip_status jvip_model_summary_text(const jvip_model* model, const jvip_report_options* opts,
                                    char** out) {
  JVIP_REQUIRE(model && out);
  *out = nullptr;
  return guarded([&] {
    const auto o = to_cpp(opts);
    *out = dup_string(
        jointvip::join_lines(jointvip::summary_lines(jointvip::summarize(model->model, o), o)));
  });
}

jvip_status jvip_model_table_text(const jvip_model* model, const jvip_report_options* opts,
                                  char** out) {
  JVIP_REQUIRE(model && out);
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(jointvip::table_text(jointvip::tabulate(model->model, to_cpp(opts))));
  });
}

jvip_status jvip_post_from_study(const jvip_model* model, const jvip_study* study,
                                 jvip_post_model** out) {
  JVIP_REQUIRE(model && study && out);
  *out = nullptr;
  if (!study->loaded.post_analysis) {
    return fail(JVIP_E_NO_POST_SAMPLE, "the manifest has no post_analysis_csv");
  }
  return guarded([&] {
    *out = new jvip_post_model{
        jointvip::create_post_jointvip(model->model, *study->loaded.post_analysis)};
  });
}

jvip_status jvip_post_from_csv(const jvip_model* model, const jvip_study* study,
                               const char* post_csv, jvip_post_model** out) {
  JVIP_REQUIRE(model && study && post_csv && out);
  *out = nullptr;
  return guarded([&] {
    const auto table = jointvip::apply_transforms(
        jointvip::parse_post_table(post_csv, study->loaded.study.roles), study->loaded.transforms);
    *out = new jvip_post_model{jointvip::create_post_jointvip(model->model, table)};
  });
}

void jvip_post_free(jvip_post_model* post) { delete post; }

jvip_status jvip_post_to_json(const jvip_post_model* post, jvip_smd_flavor flavor, char** out) {
  JVIP_REQUIRE(post && out);
  *out = nullptr;
  return guarded([&] { *out = dup_string(jointvip::post_model_json(post->post, to_cpp(flavor))); });
}

jvip_status jvip_post_summary_text(const jvip_post_model* post, const jvip_report_options* opts,
                                   double post_bias_tol, char** out) {
  JVIP_REQUIRE(post && out);
  *out = nullptr;
  return guarded([&] {
    const auto o = to_cpp(opts);
    *out = dup_string(jointvip::join_lines(
        jointvip::post_summary_lines(jointvip::post_summarize(post->post, o, post_bias_tol), o)));
  });
}

jvip_status jvip_post_table_text(const jvip_post_model* post, const jvip_report_options* opts,
                                 char** out) {
  JVIP_REQUIRE(post && out);
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(jointvip::post_table_text(jointvip::post_tabulate(post->post, to_cpp(opts))));
  });
}

jvip_status jvip_render_svg(const jvip_model* model, const jvip_post_model* post,
                            const jvip_plot_options* opts, char** out) {
  JVIP_REQUIRE(model && out);
  *out = nullptr;
  return guarded([&] {
    jointvip::PlotSpec spec;
    if (opts) {
      spec.opts = to_cpp(&opts->report);
      spec.width_px = opts->width_px;
      spec.height_px = opts->height_px;
      if (opts->title) spec.title = opts->title;
      spec.label_above_tol_only = opts->label_above_tol_only != 0;
      spec.show_post_trails = opts->show_post_trails != 0;
      if (opts->curve_levels) {
        spec.curve_levels.assign(opts->curve_levels, opts->curve_levels + opts->n_curve_levels);
      }
    }
    const auto geom =
        post ? jointvip::layout(post->post, spec) : jointvip::layout(model->model, spec);
    *out = dup_string(jointvip::render_svg(geom, spec));
  });
}

jvip_status jvip_serve(const jvip_serve_options* opts) {
  const jvip_serve_options o = opts ? *opts : jvip_serve_options_default();
  jvip_status status = JVIP_OK;
  const jvip_status guard = guarded([&] {
    jointvip::ServiceConfig cfg;
    cfg.max_sessions = o.max_sessions;
    cfg.max_payload_bytes = o.max_payload_bytes;
    if (o.cors_origin) cfg.cors_origin = o.cors_origin;
    jointvip::Service service(cfg);
    const std::string host = o.host ? o.host : "127.0.0.1";
    const int port = service.bind(host, o.port);
    if (port < 0) {
      status = fail(JVIP_E_IO, "cannot bind " + host + ":" + std::to_string(o.port));
      return;
    }
    if (o.on_ready) o.on_ready(port, o.user_data);
    if (!service.run()) status = fail(JVIP_E_IO, "server stopped with an error");
  });
  return guard != JVIP_OK ? guard : status;
}

}  // extern "C"
