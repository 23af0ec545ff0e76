#pragma once

#include <chrono>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>

#include "jointvip/ingest.hpp"
#include "jointvip/measures.hpp"
#include "jointvip/post.hpp"

namespace jointvip {

struct ServiceConfig {
  std::size_t max_sessions = 64;
  std::size_t max_payload_bytes = 32u << 20;
  std::string cors_origin = "*";
};

// Everything derived once from an upload. Never mutated after creation.
struct SessionRecord {
  std::string session_id;
  ValidatedStudy study;
  TransformSpec transforms;
  JointVipModel model;
  std::chrono::system_clock::time_point created_at;
};

struct SessionSnapshot {
  std::shared_ptr<const SessionRecord> record;
  std::shared_ptr<const PostJointVipModel> post;  // null until a post sample is attached
};

// In-memory sessions with LRU eviction. All members are thread-safe.
class SessionStore {
public:
  explicit SessionStore(std::size_t capacity);

  // Assigns a fresh session id, stores the record, evicts the least recently
  // used session when over capacity. Returns the id.
  std::string insert(SessionRecord record);

  std::optional<SessionSnapshot> find(const std::string& id);

  // Replaces the post model of an existing session. False if id is unknown.
  bool attach_post(const std::string& id, std::shared_ptr<const PostJointVipModel> post);

  std::size_t size() const;

private:
  struct Entry {
    SessionSnapshot snapshot;
    std::list<std::string>::iterator lru_pos;
  };

  std::string new_id();

  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::list<std::string> lru_;  // most recent first
  std::unordered_map<std::string, Entry> entries_;
  std::mt19937_64 rng_;
};

// HTTP front end:
//   GET  /api/health
//   POST /api/sessions                    multipart: pilot, analysis, roles
//   GET  /api/sessions/{id}/measures      ?smd=&abs=&bias_tol=&post_bias_tol=
//   POST /api/sessions/{id}/post          multipart: post
//   GET  /api/sessions/{id}/plot.svg      ?smd=&abs=&bias_tol=&trails=&title=
class Service {
public:
  explicit Service(ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds host:port (port 0 picks a free port). Returns the bound port, or -1.
  int bind(const std::string& host, int port);

  // Serves until stop() is called. Requires a successful bind().
  bool run();

  // Blocks until a concurrent run() is accepting connections.
  void wait_until_ready() const;

  void stop();

  SessionStore& sessions();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace jointvip
