#include "stereomark/service.hpp"

#include <array>
#include <charconv>
#include <cstdlib>

#include "httplib.h"
#include "stereomark/error.hpp"
#include "stereomark/image_io.hpp"

namespace stereomark {
namespace {

constexpr char kBase64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kInvalidParameter:
    case ErrorCode::kInvalidInput:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kParse: return 400;
    default: return 500;
  }
}

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return json_response(status, {{"error", {{"code", code}, {"message", message}}}});
}

HttpResponse error_response(const Error& e) { return error_response(status_for(e.code()), to_string(e.code()), e.what()); }

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                            (static_cast<std::uint8_t>(bytes[i + 1]) << 8) | static_cast<std::uint8_t>(bytes[i + 2]);
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += kBase64Alphabet[(v >> 6) & 63];
    out += kBase64Alphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += rest == 2 ? kBase64Alphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kBase64Alphabet[i])] = i;
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = lookup[static_cast<unsigned char>(c)];
    if (v < 0) {
      if (c == '\n' || c == '\r' || c == ' ') continue;
      throw Error(ErrorCode::kParse, "invalid base64 character");
    }
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

Json error_body(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", to_string(code)}, {"message", message}}}};
}

Json pipeline_result_to_json(const PipelineResult& result, bool include_image) {
  Json detections = Json::array();
  for (const auto& d : result.detections) detections.push_back(to_json(d));
  Json poses = Json::object();
  for (const auto& [id, pose] : result.poses) {
    Json p = to_json(pose);
    p["modelview16"] = to_modelview16(pose);
    poses[std::to_string(id)] = std::move(p);
  }
  Json timings = Json::array();
  for (const auto& [stage, ms] : result.timings_ms) timings.push_back({{"stage", stage}, {"ms", ms}});
  Json out = {{"width", result.augmented.width()},
              {"height", result.augmented.height()},
              {"detections", detections},
              {"poses", poses},
              {"timings_ms", timings},
              {"total_ms", result.total_ms}};
  if (include_image) out["image_png_base64"] = base64_encode(as_string(encode_png(result.augmented)));
  return out;
}

struct Service::Http {
  httplib::Server server;
  int port = -1;
};

Service::Service(SceneBundle initial, ServiceOptions options)
    : options_(std::move(options)),
      store_(std::make_shared<const SceneBundle>(std::move(initial))),
      http_(std::make_unique<Http>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, req.body, req.get_header_value("Content-Type"), {}};
    for (const auto& [name, file] : req.files) r.files.emplace(name, file.content);
    const HttpResponse out = handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  auto& s = http_->server;
  s.set_payload_max_length(64u << 20);
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Get(R"(/v1/.*)", forward);
  s.Put(R"(/v1/.*)", forward);
  s.Post(R"(/v1/.*)", forward);
  s.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (!options_.static_dir.empty()) s.set_mount_point("/", options_.static_dir.string());
}

Service::~Service() { stop(); }

HttpResponse Service::handle(const HttpRequest& request) const {
  try {
    const std::string& path = request.path;
    if (path == "/v1/health" && request.method == "GET") return json_response(200, {{"status", "ok"}});
    if (path == "/v1/process" && request.method == "POST") return process(request);
    if (path == "/v1/scene" && request.method == "GET") return json_response(200, bundle_to_json(*store_.get()));
    if (path == "/v1/scene" && request.method == "PUT") return put_scene(request);
    if (path == "/v1/dictionary" && request.method == "GET") return json_response(200, to_json(store_.get()->dictionary));
    constexpr std::string_view kMarkers = "/v1/markers/";
    constexpr std::string_view kPng = ".png";
    if (request.method == "GET" && path.starts_with(kMarkers) && path.ends_with(kPng)) {
      return marker_png(path.substr(kMarkers.size(), path.size() - kMarkers.size() - kPng.size()));
    }
    return error_response(404, "not_found", "no route for " + request.method + " " + path);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::process(const HttpRequest& request) const {
  std::string_view payload = request.body;
  if (!request.files.empty()) {
    const auto it = request.files.find("frame");
    payload = it != request.files.end() ? it->second : request.files.begin()->second;
  }
  Frame frame;
  try {
    frame = decode_png({reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()});
  } catch (const Error& e) {
    return error_response(400, "invalid_image", e.what());
  }
  // One snapshot per request: a concurrent PUT cannot tear this frame.
  const auto bundle = store_.get();
  const PipelineResult result =
      process_frame(frame, bundle->scene, bundle->dictionary, bundle->intrinsics, options_.params);
  return json_response(200, pipeline_result_to_json(result, true));
}

HttpResponse Service::put_scene(const HttpRequest& request) const {
  Json j;
  try {
    j = Json::parse(request.body);
  } catch (const Json::parse_error& e) {
    return error_response(400, "parse_error", e.what());
  }
  auto next = std::make_shared<const SceneBundle>(scene_bundle_from_json(j, options_.base_dir));
  store_.replace(next);
  return json_response(200, bundle_to_json(*next));
}

HttpResponse Service::marker_png(const std::string& id_text) const {
  int id = 0;
  const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
  if (ec != std::errc() || ptr != id_text.data() + id_text.size()) {
    return error_response(404, "not_found", "marker id must be an integer");
  }
  const auto bundle = store_.get();
  const MarkerPattern* pattern = bundle->dictionary.find(id);
  if (!pattern) return error_response(404, "not_found", "unknown marker id " + id_text);
  return {200, "image/png", as_string(encode_png(render_marker_image(*pattern)))};
}

int Service::bind() {
  if (options_.port == 0) {
    http_->port = http_->server.bind_to_any_port(options_.host);
  } else {
    http_->port = http_->server.bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  return http_->port;
}

void Service::listen() { http_->server.listen_after_bind(); }

void Service::stop() {
  if (http_) http_->server.stop();
}

}  // namespace stereomark
