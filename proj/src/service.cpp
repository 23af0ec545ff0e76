#include "jointvip/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "httplib.h"
#include "jointvip/error.hpp"
#include "jointvip/render.hpp"
#include "jointvip/report.hpp"

namespace jointvip {

SessionStore::SessionStore(std::size_t capacity)
    : capacity_(capacity == 0 ? 1 : capacity), rng_(std::random_device{}()) {}

std::string SessionStore::new_id() {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

std::string SessionStore::insert(SessionRecord record) {
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = new_id();
  } while (entries_.count(id));
  record.session_id = id;
  lru_.push_front(id);
  entries_[id] = Entry{{std::make_shared<const SessionRecord>(std::move(record)), nullptr},
                       lru_.begin()};
  while (entries_.size() > capacity_) {
    entries_.erase(lru_.back());
    lru_.pop_back();
  }
  return id;
}

std::optional<SessionSnapshot> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
  return it->second.snapshot;
}

bool SessionStore::attach_post(const std::string& id,
                               std::shared_ptr<const PostJointVipModel> post) {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return false;
  lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
  it->second.snapshot.post = std::move(post);
  return true;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  nlohmann::json body = {{"code", code}, {"message", message}};
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  const int status = is_validation_error(e.code()) ? 400 : 500;
  res.status = status;
  res.set_content(e.to_json().dump(), kJson);
}

std::string param(const httplib::Request& req, const char* key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string();
}

double parse_positive(const std::string& text, const char* key, double fallback) {
  if (text.empty()) return fallback;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v) || !(v > 0.0)) {
    throw Error(ErrorCode::InvalidOptions,
                std::string("query parameter '") + key + "' must be a positive number",
                {{"param", key}, {"value", text}});
  }
  return v;
}

bool parse_flag(const std::string& text, const char* key, bool fallback) {
  if (text.empty()) return fallback;
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorCode::InvalidOptions,
              std::string("query parameter '") + key + "' must be true or false",
              {{"param", key}, {"value", text}});
}

ReportOptions report_options(const httplib::Request& req) {
  ReportOptions opts;
  if (const auto smd = param(req, "smd"); !smd.empty()) opts.smd_flavor = parse_smd_flavor(smd);
  opts.use_abs = parse_flag(param(req, "abs"), "abs", opts.use_abs);
  opts.bias_tol = parse_positive(param(req, "bias_tol"), "bias_tol", opts.bias_tol);
  return opts;
}

std::string multipart_text(const httplib::Request& req, const char* field) {
  if (!req.has_file(field)) {
    throw Error(ErrorCode::InvalidManifest,
                std::string("multipart field '") + field + "' is required", {{"field", field}});
  }
  return req.get_file_value(field).content;
}

std::string measures_body(const SessionSnapshot& s, const ReportOptions& opts,
                          double post_bias_tol) {
  const JointVipModel& model = s.record->model;
  std::string body;
  if (s.post) {
    body = "{\"model\":" + post_model_json(*s.post, opts.smd_flavor) +
           ",\"summary\":" + post_summary_json(post_summarize(*s.post, opts, post_bias_tol), opts) +
           ",\"table\":" + post_table_json(post_tabulate(*s.post, opts)) + "}";
  } else {
    body = "{\"model\":" + model_json(model, opts.smd_flavor) +
           ",\"summary\":" + summary_json(summarize(model, opts), opts) +
           ",\"table\":" + table_json(tabulate(model, opts)) + "}";
  }
  return body;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceConfig cfg) : config(std::move(cfg)), store(config.max_sessions) {}

  template <typename Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  }

  std::optional<SessionSnapshot> session_or_404(const httplib::Request& req,
                                                httplib::Response& res) {
    const std::string id = req.matches[1];
    auto snapshot = store.find(id);
    if (!snapshot) send_error(res, 404, "SessionNotFound", "no session '" + id + "'");
    return snapshot;
  }

  void install_routes() {
    server.set_payload_max_length(config.max_payload_bytes);
    server.set_default_headers({
        {"Access-Control-Allow-Origin", config.cors_origin},
        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      if (res.status == 413) {
        send_error(res, 413, "PayloadTooLarge", "request body exceeds the configured limit");
      } else if (res.status == 404) {
        send_error(res, 404, "NotFound", "no such endpoint");
      } else {
        send_error(res, res.status, "HttpError", httplib::status_message(res.status));
      }
      return httplib::Server::HandlerResponse::Handled;
    });

    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", kJson);
    });

    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto [roles, transforms] = parse_roles_json(multipart_text(req, "roles"));
        LoadedStudy loaded = load_study(multipart_text(req, "pilot"),
                                        multipart_text(req, "analysis"), roles, transforms);
        SessionRecord record;
        record.model = create_jointvip(loaded.study);
        record.study = std::move(loaded.study);
        record.transforms = transforms;
        record.created_at = std::chrono::system_clock::now();
        const SmdFlavor flavor = report_options(req).smd_flavor;
        const std::string model = model_json(record.model, flavor);
        const std::string id = store.insert(std::move(record));
        res.set_content("{\"session_id\":" + json_quote(id) + ",\"model\":" + model + "}", kJson);
      });
    });

    server.Get(R"(/api/sessions/([0-9a-f]+)/measures)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const auto s = session_or_404(req, res);
                   if (!s) return;
                   const ReportOptions opts = report_options(req);
                   const double post_tol = parse_positive(param(req, "post_bias_tol"),
                                                          "post_bias_tol", kDefaultPostBiasTol);
                   res.set_content(measures_body(*s, opts, post_tol), kJson);
                 });
               });

    server.Post(R"(/api/sessions/([0-9a-f]+)/post)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const auto s = session_or_404(req, res);
                    if (!s) return;
                    const RoleSpec& roles = s->record->study.roles;
                    const SampleTable post_table = apply_transforms(
                        parse_post_table(multipart_text(req, "post"), roles),
                        s->record->transforms);
                    auto post = std::make_shared<const PostJointVipModel>(
                        create_post_jointvip(s->record->model, post_table));
                    const std::string body = post_model_json(*post, report_options(req).smd_flavor);
                    if (!store.attach_post(s->record->session_id, std::move(post))) {
                      send_error(res, 404, "SessionNotFound", "session was evicted");
                      return;
                    }
                    res.set_content("{\"session_id\":" + json_quote(s->record->session_id) +
                                        ",\"model\":" + body + "}",
                                    kJson);
                  });
                });

    server.Get(R"(/api/sessions/([0-9a-f]+)/plot\.svg)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const auto s = session_or_404(req, res);
                   if (!s) return;
                   PlotSpec spec;
                   spec.opts = report_options(req);
                   spec.show_post_trails = parse_flag(param(req, "trails"), "trails", false);
                   spec.label_above_tol_only =
                       !parse_flag(param(req, "label_all"), "label_all", false);
                   if (const auto t = param(req, "title"); !t.empty()) spec.title = t;
                   const PlotGeometry geom =
                       s->post ? layout(*s->post, spec) : layout(s->record->model, spec);
                   res.set_content(render_svg(geom, spec), "image/svg+xml");
                 });
               });
  }

  ServiceConfig config;
  SessionStore store;
  httplib::Server server;
  bool bound = false;
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->install_routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound_port = -1;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound_port = port;
  }
  impl_->bound = bound_port > 0;
  return impl_->bound ? bound_port : -1;
}

bool Service::run() {
  if (!impl_->bound) return false;
  return impl_->server.listen_after_bind();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

SessionStore& Service::sessions() { return impl_->store; }

}  // namespace jointvip
