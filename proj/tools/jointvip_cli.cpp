// jointvip command-line front end. Talks to the library only through the C API.
//
//   jointvip compute --manifest study.json [--smd pure] [--out model.json]
//   jointvip summary --manifest study.json [--bias-tol 0.01] [--post-bias-tol 0.005]
//   jointvip print   --manifest study.json
//   jointvip plot    --manifest study.json --out plot.svg [--trails]
//   jointvip serve   --serve-addr 127.0.0.1:8080
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "jointvip/jointvip.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitUsage = 4;

struct Options {
  std::string manifest;
  std::string out;
  std::string smd = "cross-sample";
  bool signed_values = false;
  double bias_tol = 0.01;
  double post_bias_tol = 0.005;
  bool trails = false;
  bool label_all = false;
  std::string title;
  int width = 720;
  int height = 540;
  std::string serve_addr = "127.0.0.1:8080";
  std::string cors_origin = "*";
  std::size_t max_sessions = 64;
};

struct Handles {
  std::unique_ptr<jvip_study, decltype(&jvip_study_free)> study{nullptr, jvip_study_free};
  std::unique_ptr<jvip_model, decltype(&jvip_model_free)> model{nullptr, jvip_model_free};
  std::unique_ptr<jvip_post_model, decltype(&jvip_post_free)> post{nullptr, jvip_post_free};
};

class Failure {
public:
  explicit Failure(jvip_status status) : status_(status) {}
  jvip_status status() const { return status_; }

private:
  jvip_status status_;
};

void check(jvip_status status) {
  if (status != JVIP_OK) throw Failure(status);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  jvip_string_free(s);
  return out;
}

jvip_report_options report_options(const Options& o) {
  jvip_report_options r = jvip_report_options_default();
  r.smd_flavor = o.smd == "pure" ? JVIP_SMD_PURE : JVIP_SMD_CROSS_SAMPLE;
  r.use_abs = o.signed_values ? 0 : 1;
  r.bias_tol = o.bias_tol;
  return r;
}

Handles load(const Options& o, bool with_post) {
  Handles h;
  jvip_study* study = nullptr;
  check(jvip_study_load_manifest(o.manifest.c_str(), &study));
  h.study.reset(study);
  jvip_model* model = nullptr;
  check(jvip_model_create(study, &model));
  h.model.reset(model);
  if (with_post && jvip_study_has_post(study)) {
    jvip_post_model* post = nullptr;
    check(jvip_post_from_study(model, study, &post));
    h.post.reset(post);
  }
  return h;
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << std::flush;
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    std::cerr << R"({"code":"IoError","message":"cannot write ')" << out_path << R"('"})" << '\n';
    return kExitIo;
  }
  return kExitOk;
}

int run_compute(const Options& o) {
  const Handles h = load(o, true);
  const jvip_smd_flavor flavor = report_options(o).smd_flavor;
  char* json = nullptr;
  if (h.post) {
    check(jvip_post_to_json(h.post.get(), flavor, &json));
  } else {
    check(jvip_model_to_json(h.model.get(), flavor, &json));
  }
  return emit(take(json) + "\n", o.out);
}

int run_summary(const Options& o) {
  const Handles h = load(o, true);
  const jvip_report_options r = report_options(o);
  char* text = nullptr;
  if (h.post) {
    check(jvip_post_summary_text(h.post.get(), &r, o.post_bias_tol, &text));
  } else {
    check(jvip_model_summary_text(h.model.get(), &r, &text));
  }
  return emit(take(text), o.out);
}

int run_print(const Options& o) {
  const Handles h = load(o, true);
  const jvip_report_options r = report_options(o);
  char* text = nullptr;
  if (h.post) {
    check(jvip_post_table_text(h.post.get(), &r, &text));
  } else {
    check(jvip_model_table_text(h.model.get(), &r, &text));
  }
  return emit(take(text), o.out);
}

int run_plot(const Options& o) {
  const Handles h = load(o, true);
  jvip_plot_options p = jvip_plot_options_default();
  p.report = report_options(o);
  p.width_px = o.width;
  p.height_px = o.height;
  if (!o.title.empty()) p.title = o.title.c_str();
  p.label_above_tol_only = o.label_all ? 0 : 1;
  p.show_post_trails = o.trails ? 1 : 0;
  char* svg = nullptr;
  check(jvip_render_svg(h.model.get(), h.post.get(), &p, &svg));
  return emit(take(svg), o.out);
}

int run_serve(const Options& o) {
  const auto colon = o.serve_addr.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "--serve-addr must look like host:port\n";
    return kExitUsage;
  }
  const std::string host = o.serve_addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.serve_addr.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "--serve-addr must look like host:port\n";
    return kExitUsage;
  }
  jvip_serve_options s = jvip_serve_options_default();
  s.host = host.c_str();
  s.port = port;
  s.cors_origin = o.cors_origin.c_str();
  s.max_sessions = o.max_sessions;
  s.on_ready = [](int bound, void* user) {
    std::cerr << "listening on " << *static_cast<const std::string*>(user) << ":" << bound
              << std::endl;
  };
  s.user_data = const_cast<std::string*>(&host);
  check(jvip_serve(&s));
  return kExitOk;
}

int exit_code(jvip_status status) {
  switch (status) {
    case JVIP_E_IO: return kExitIo;
    case JVIP_E_INTERNAL:
    case JVIP_E_INVALID_ARGUMENT: return kExitInternal;
    default: return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint variable importance: covariate balance weighted by outcome relevance"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(jvip_version()));

  Options o;
  auto add_report_flags = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", o.manifest, "Study manifest JSON")->required();
    cmd->add_option("--out", o.out, "Write output to this file instead of stdout");
    cmd->add_option("--smd", o.smd, "SMD flavor")
        ->check(CLI::IsMember({"cross-sample", "pure"}));
    cmd->add_flag("--signed", o.signed_values, "Report signed instead of absolute values");
    cmd->add_option("--bias-tol", o.bias_tol, "Absolute bias tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--post-bias-tol", o.post_bias_tol, "Post-adjustment bias tolerance")
        ->check(CLI::PositiveNumber);
  };

  auto* compute = app.add_subcommand("compute", "Compute the model and print it as JSON");
  add_report_flags(compute);
  auto* summary = app.add_subcommand("summary", "Print the bias summary");
  add_report_flags(summary);
  auto* print = app.add_subcommand("print", "Print covariates above the bias tolerance");
  add_report_flags(print);
  auto* plot = app.add_subcommand("plot", "Render the plot as SVG");
  add_report_flags(plot);
  plot->add_flag("--trails", o.trails, "Draw pre -> post segments for post manifests");
  plot->add_flag("--label-all", o.label_all, "Label every covariate");
  plot->add_option("--title", o.title, "Plot title");
  plot->add_option("--width", o.width, "Width in px")->check(CLI::Range(100, 20000));
  plot->add_option("--height", o.height, "Height in px")->check(CLI::Range(100, 20000));
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--serve-addr", o.serve_addr, "host:port to listen on");
  serve->add_option("--cors-origin", o.cors_origin, "Allowed CORS origin");
  serve->add_option("--max-sessions", o.max_sessions, "Session cap (LRU eviction)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*compute) return run_compute(o);
    if (*summary) return run_summary(o);
    if (*print) return run_print(o);
    if (*plot) return run_plot(o);
    if (*serve) return run_serve(o);
  } catch (const Failure& f) {
    std::cerr << jvip_last_error_json() << '\n';
    return exit_code(f.status());
  }
  return kExitUsage;
}
