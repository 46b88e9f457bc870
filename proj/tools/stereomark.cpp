// stereomark command line: detection, pose, composition, synthetic frames,
// dictionary checks and the HTTP service.
#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "stereomark/config.hpp"
#include "stereomark/image_io.hpp"
#include "stereomark/marker.hpp"
#include "stereomark/pipeline.hpp"
#include "stereomark/service.hpp"
#include "stereomark/synth.hpp"

namespace fs = std::filesystem;
using namespace stereomark;

namespace {

struct Inputs {
  std::string scene;
  std::string dictionary;
  std::string camera;
};

void add_input_options(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--scene", in.scene, "Scene JSON (supplies dictionary and intrinsics)");
  cmd->add_option("--dict", in.dictionary, "Marker dictionary JSON");
  cmd->add_option("--camera", in.camera, "Camera intrinsics JSON");
}

// Dictionary and intrinsics from --scene, overridden by --dict / --camera.
SceneBundle load_inputs(const Inputs& in) {
  SceneBundle b;
  if (!in.scene.empty()) b = load_scene_bundle(in.scene);
  if (!in.dictionary.empty()) b.dictionary = load_dictionary(in.dictionary);
  if (!in.camera.empty()) b.intrinsics = load_intrinsics(in.camera);
  if (b.dictionary.patterns.empty()) throw Error(ErrorCode::kInvalidParameter, "no dictionary: pass --dict or --scene");
  return b;
}

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

int run_detect(const std::string& frame_path, const Inputs& in, const std::string& binary_out) {
  const SceneBundle b = load_inputs(in);
  const GrayImage gray = to_grayscale(load_frame(frame_path));
  PipelineParams params;
  if (!binary_out.empty()) {
    const auto pgm = encode_pgm(binarize(gray, params.threshold));
    write_file(binary_out, pgm);
  }
  Json dets = Json::array();
  for (const auto& d : detect_markers(gray, b.dictionary, params)) dets.push_back(to_json(d));
  print_json({{"detections", dets}});
  return 0;
}

int run_pose(const std::string& frame_path, const Inputs& in, bool text) {
  const SceneBundle b = load_inputs(in);
  const Frame frame = load_frame(frame_path);
  b.intrinsics.validate();
  const auto dets = detect_markers(to_grayscale(frame), b.dictionary);
  Json markers = Json::array();
  for (const auto& d : dets) {
    const MarkerPattern& pattern = *b.dictionary.find(d.pattern_id);
    Json m = to_json(d);
    try {
      const Pose pose = pose_from_marker(d, pattern, b.intrinsics);
      const ModelView16 mv = to_modelview16(pose);
      if (text) {
        std::cout << d.pattern_id << ' ' << format_modelview16(mv) << '\n';
        continue;
      }
      m["pose"] = to_json(pose);
      m["modelview16"] = mv;
      m["reprojection_error_px"] = mean_reprojection_error(pose, pattern, d.corners, b.intrinsics);
    } catch (const Error& e) {
      if (text) {
        std::cerr << "marker " << d.pattern_id << ": " << to_string(e.code()) << '\n';
        continue;
      }
      m["error"] = error_body(e.code(), e.what())["error"];
    }
    markers.push_back(std::move(m));
  }
  if (!text) print_json({{"markers", markers}});
  return 0;
}

struct ComposeArgs {
  std::string frame;
  std::string scene;
  std::string out;
  std::string json_out;
  std::optional<double> separation;
  bool no_anaglyph = false;
};

int run_compose(const ComposeArgs& a) {
  SceneBundle b = load_scene_bundle(a.scene);
  if (a.separation) b.scene.anaglyph.separation = *a.separation;
  if (a.no_anaglyph) b.scene.anaglyph.enabled = false;
  b.scene.validate();
  const auto result = process_frame(load_frame(a.frame), b.scene, b.dictionary, b.intrinsics);
  save_frame(a.out, result.augmented);
  const Json summary = pipeline_result_to_json(result, false);
  if (!a.json_out.empty()) write_text_file(a.json_out, summary.dump(2) + "\n");
  std::cerr << result.detections.size() << " marker(s), " << result.total_ms << " ms\n";
  return 0;
}

int run_synth(const std::string& spec_path, const std::string& out, std::string truth_out) {
  const fs::path spec_file(spec_path);
  const SynthSpec spec = synth_spec_from_json(read_json_file(spec_file), spec_file.parent_path());
  const SynthResult result = render_synthetic(spec);
  save_frame(out, result.frame);
  if (truth_out.empty()) truth_out = fs::path(out).replace_extension(".truth.json").string();
  write_text_file(truth_out, truth_to_json(result.truth).dump(2) + "\n");
  return 0;
}

int run_validate(const std::string& dict_path) {
  const ValidationReport report = validate_dictionary(load_dictionary(dict_path));
  print_json(to_json(report));
  return report.ok() ? 0 : 1;
}

int run_marker(int id, const Inputs& in, const std::string& out, int cell_px) {
  const SceneBundle b = load_inputs(in);
  const MarkerPattern* p = b.dictionary.find(id);
  if (!p) throw Error(ErrorCode::kNotFound, "marker " + std::to_string(id) + " is not in the dictionary");
  write_file(out, encode_png(render_marker_image(*p, cell_px)));
  return 0;
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int run_serve(const std::string& scene_path, const std::string& host, int port, const std::string& static_dir) {
  ServiceOptions opts;
  opts.host = host;
  opts.port = port;
  opts.base_dir = fs::path(scene_path).parent_path();
  opts.static_dir = static_dir;
  Service service(load_scene_bundle(scene_path), opts);
  const int bound = service.bind();
  if (bound < 0) {
    std::cerr << "error: cannot bind " << host << ':' << port << '\n';
    return 2;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << host << ':' << bound << '\n';
  service.listen();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marker-based anaglyph AR engine"};
  app.require_subcommand(1);

  Inputs in;
  std::string frame_path;

  auto* detect = app.add_subcommand("detect", "Detect markers and print them as JSON");
  detect->add_option("frame", frame_path, "Input frame (PNG or PPM)")->required()->check(CLI::ExistingFile);
  add_input_options(detect, in);
  std::string binary_out;
  detect->add_option("--dump-binary", binary_out, "Write the thresholded image as PGM");

  auto* pose = app.add_subcommand("pose", "Detect markers and print poses with ModelView16 matrices");
  pose->add_option("frame", frame_path, "Input frame")->required()->check(CLI::ExistingFile);
  add_input_options(pose, in);
  bool text = false;
  pose->add_flag("--text", text, "One line per marker: id followed by the 16 matrix entries");

  ComposeArgs compose_args;
  auto* compose = app.add_subcommand("compose", "Render the scene over a frame");
  compose->add_option("frame", compose_args.frame, "Input frame")->required()->check(CLI::ExistingFile);
  compose->add_option("--scene", compose_args.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  compose->add_option("-o,--output", compose_args.out, "Output image (.png or .ppm)")->required();
  compose->add_option("--json", compose_args.json_out, "Write detections, poses and timings here");
  compose->add_option("--separation", compose_args.separation, "Override the eye separation (m)");
  compose->add_flag("--no-anaglyph", compose_args.no_anaglyph, "Render a single centre view");

  std::string spec_path, synth_out, truth_out;
  auto* synth = app.add_subcommand("synth", "Render a synthetic frame with ground truth");
  synth->add_option("--spec", spec_path, "Synthetic frame spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--output", synth_out, "Output frame")->required();
  synth->add_option("--truth", truth_out, "Ground-truth JSON (default: <output>.truth.json)");

  std::string dict_path;
  auto* validate = app.add_subcommand("validate-dict", "Check a dictionary for symmetric or ambiguous patterns");
  validate->add_option("dictionary", dict_path, "Dictionary JSON")->required()->check(CLI::ExistingFile);

  int marker_id = 0, cell_px = 32;
  std::string marker_out;
  auto* marker = app.add_subcommand("marker", "Write a printable marker PNG");
  marker->add_option("id", marker_id, "Marker id")->required();
  add_input_options(marker, in);
  marker->add_option("-o,--output", marker_out, "Output PNG")->required();
  marker->add_option("--cell-px", cell_px, "Pixels per cell")->check(CLI::PositiveNumber);

  std::string serve_scene, host = "0.0.0.0", static_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--scene", serve_scene, "Initial scene JSON")->required()->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)")->envname("STEREOMARK_PORT");
  serve->add_option("--static", static_dir, "Directory served at /");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*detect) return run_detect(frame_path, in, binary_out);
    if (*pose) return run_pose(frame_path, in, text);
    if (*compose) return run_compose(compose_args);
    if (*synth) return run_synth(spec_path, synth_out, truth_out);
    if (*validate) return run_validate(dict_path);
    if (*marker) return run_marker(marker_id, in, marker_out, cell_px);
    if (*serve) return run_serve(serve_scene, host, port, static_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
