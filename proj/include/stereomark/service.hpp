#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "stereomark/config.hpp"
#include "stereomark/pipeline.hpp"

namespace stereomark {

// Single-writer, many-reader holder for the active scene. Readers get a
// snapshot that stays valid while a writer swaps in a replacement.
class SceneStore {
 public:
  explicit SceneStore(std::shared_ptr<const SceneBundle> initial) : current_(std::move(initial)) {}

  std::shared_ptr<const SceneBundle> get() const {
    std::lock_guard lock(mutex_);
    return current_;
  }

  void replace(std::shared_ptr<const SceneBundle> next) {
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const SceneBundle> current_;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
  std::string content_type;
  // Multipart uploads: field name -> file content.
  std::map<std::string, std::string> files;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path base_dir = ".";  // resolves relative paths in PUT scenes
  std::filesystem::path static_dir;      // optional viewer bundle served at /
  PipelineParams params;
};

// Routes:
//   POST /v1/process          PNG body or multipart upload -> composite + detections
//   GET  /v1/scene            active scene JSON
//   PUT  /v1/scene            validate and atomically replace the scene
//   GET  /v1/dictionary       dictionary JSON
//   GET  /v1/markers/{id}.png printable marker
//   GET  /v1/health
// Errors carry {"error": {"code", "message"}}.
class Service {
 public:
  Service(SceneBundle initial, ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent dispatch, used by the HTTP layer and by tests.
  HttpResponse handle(const HttpRequest& request) const;

  // Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind();
  // Blocks serving requests until stop().
  void listen();
  void stop();

  SceneStore& scenes() { return store_; }

 private:
  HttpResponse process(const HttpRequest& request) const;
  HttpResponse put_scene(const HttpRequest& request) const;
  HttpResponse marker_png(const std::string& id_text) const;

  ServiceOptions options_;
  mutable SceneStore store_;
  struct Http;
  std::unique_ptr<Http> http_;
};

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

Json error_body(ErrorCode code, const std::string& message);
// Response payload shared by the service and `compose --json`.
Json pipeline_result_to_json(const PipelineResult& result, bool include_image);

}  // namespace stereomark
