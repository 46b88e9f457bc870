// Acceptance sweep: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "oracles/naive_rasterizer.hpp"
#include "oracles/projection_oracle.hpp"
#include "stereomark/anaglyph.hpp"
#include "stereomark/config.hpp"
#include "stereomark/homography.hpp"
#include "stereomark/mesh_io.hpp"
#include "stereomark/pipeline.hpp"
#include "stereomark/synth.hpp"
#include "support/fixtures.hpp"

using namespace stereomark;
using namespace stereomark::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void report(const char* name, const Outcome& o) {
  std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

Eigen::Matrix4d homogeneous(const Mat3& r, const Vec3& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Outcome pose_round_trip() {
  constexpr int kPoses = 200;
  const auto start = std::chrono::steady_clock::now();
  const auto dict = sample_dictionary();
  const CameraIntrinsics cam = desk_camera();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int detected = 0, rejected = 0;
  double corner_sum = 0.0, worst_rot = 0.0, worst_trans = 0.0;
  for (int i = 0; i < kPoses;) {
    const auto& pattern = dict.patterns[static_cast<std::size_t>(unit(rng) * dict.patterns.size())];
    const double w = pattern.physical_width;
    const double distance = (2.0 + 8.0 * unit(rng)) * w;
    Pose truth = tilted_pose(distance, 60.0 * unit(rng), 360.0 * unit(rng), 360.0 * unit(rng));
    const double u = (unit(rng) - 0.5) * cam.width / 2.0;
    const double v = (unit(rng) - 0.5) * cam.height / 2.0;
    truth.translation = distance * Vec3(u / cam.fx, v / cam.fy, 1.0).normalized();

    SynthSpec spec;
    spec.cam = cam;
    spec.placements.push_back({pattern, truth});
    SynthResult synth;
    try {
      synth = render_synthetic(spec);
    } catch (const Error&) {
      ++rejected;
      continue;
    }
    ++i;
    const auto dets = detect_markers(to_grayscale(synth.frame), dict);
    if (dets.size() != 1 || dets[0].pattern_id != pattern.id) continue;
    ++detected;
    double corner = 0.0;
    for (int k = 0; k < 4; ++k) corner += (dets[0].corners[k] - synth.truth[0].corners[k]).norm() / 4.0;
    corner_sum += corner;
    try {
      const Pose est = pose_from_marker(dets[0], pattern, cam);
      worst_rot = std::max(worst_rot, rad2deg(rotation_angle_between(est.rotation, truth.rotation)));
      worst_trans = std::max(worst_trans, (est.translation - truth.translation).norm() / truth.translation.norm());
    } catch (const Error&) {
      worst_rot = worst_trans = std::numeric_limits<double>::infinity();
    }
  }
  const double rate = static_cast<double>(detected) / kPoses;
  const double mean_corner = detected ? corner_sum / detected : std::numeric_limits<double>::infinity();
  const double seconds = elapsed_s(start);
  const bool pass = rate >= 0.99 && mean_corner < 0.5 && worst_rot < 1.0 && worst_trans < 0.02 && seconds < 60.0;
  return {pass, fmt("poses=%d redrawn=%d detection=%.1f%% mean_corner=%.4fpx max_rot=%.3fdeg "
                    "max_trans=%.3f%% time=%.1fs",
                    kPoses, rejected, 100.0 * rate, mean_corner, worst_rot, 100.0 * worst_trans, seconds)};
}

Outcome homography_exactness() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> obj(-0.1, 0.1), px(0.0, 640.0), unit(0.0, 1.0);
  auto well_spread = [](const std::array<Point2, 4>& p) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        for (int k = j + 1; k < 4; ++k) {
          const Point2 a = p[j] - p[i], b = p[k] - p[i];
          if (std::abs(a.x() * b.y() - a.y() * b.x()) < 0.05 * a.norm() * b.norm()) return false;
        }
      }
    }
    return true;
  };
  double worst_residual = 0.0;
  for (int n = 0; n < 1000;) {
    std::array<Point2, 4> src, dst;
    for (int i = 0; i < 4; ++i) {
      src[i] = Point2(obj(rng), obj(rng));
      dst[i] = Point2(px(rng), px(rng) * 0.75);
    }
    if (!well_spread(src) || !well_spread(dst)) continue;
    const Homography h = estimate_homography(src, dst);
    for (int i = 0; i < 4; ++i) worst_residual = std::max(worst_residual, (h.apply(src[i]) - dst[i]).norm());
    ++n;
  }

  const CameraIntrinsics cam = desk_camera();
  const double half = 0.04;
  const std::array<Point2, 4> square = {Point2(-half, -half), Point2(-half, half), Point2(half, half),
                                        Point2(half, -half)};
  double worst_r = 0.0, worst_t = 0.0;
  for (int n = 0; n < 1000; ++n) {
    Pose truth = tilted_pose(0.15 + 1.5 * unit(rng), 75.0 * unit(rng), 360.0 * unit(rng), 360.0 * unit(rng));
    truth.translation.x() = (unit(rng) - 0.5) * 0.4 * truth.translation.z();
    truth.translation.y() = (unit(rng) - 0.5) * 0.3 * truth.translation.z();
    const Quad img = oracle::project_marker(cam, truth.rotation, truth.translation, 2 * half);
    const Pose est = pose_from_homography(estimate_homography(square, img), cam);
    worst_r = std::max(worst_r, max_abs_diff(est.rotation, truth.rotation));
    worst_t = std::max(worst_t, (est.translation - truth.translation).cwiseAbs().maxCoeff());
  }
  const bool pass = worst_residual < 1e-9 && worst_r < 1e-6 && worst_t < 1e-6;
  return {pass, fmt("dlt_cases=1000 max_residual=%.2epx pose_cases=1000 max_R_err=%.2e max_t_err=%.2em", worst_residual,
                    worst_r, worst_t)};
}

Outcome anaglyph_bit_exactness() {
  std::mt19937 rng(4242);
  auto random_frame = [&](int w, int h) {
    Frame f(w, h);
    for (auto& p : f.pixels()) p = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                                    static_cast<std::uint8_t>(rng())};
    return f;
  };
  auto random_target = [&](int w, int h) {
    RenderTarget t(w, h);
    t.color = random_frame(w, h);
    const double density = (rng() % 101) / 100.0;
    std::bernoulli_distribution on(density);
    for (auto& c : t.coverage.pixels()) c = on(rng) ? 1 : 0;
    return t;
  };
  const std::array<std::pair<ChannelMask, ChannelMask>, 3> masks = {
      std::pair{ChannelMask{true, false, false}, ChannelMask{false, true, true}},
      std::pair{ChannelMask{false, true, false}, ChannelMask{true, false, true}},
      std::pair{ChannelMask{true, false, false}, ChannelMask{false, false, true}}};
  long mismatches = 0, pixels = 0;
  bool identity = true;
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 80), h = 1 + static_cast<int>(rng() % 60);
    const Frame f = random_frame(w, h);
    const RenderTarget l = random_target(w, h), r = random_target(w, h);
    AnaglyphConfig cfg;
    std::tie(cfg.left_mask, cfg.right_mask) = masks[trial % masks.size()];
    const Frame out = composite(f, l, r, cfg);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::array<std::uint8_t, 3> fv = {f.at(x, y).r, f.at(x, y).g, f.at(x, y).b};
        const std::array<std::uint8_t, 3> lv = {l.color.at(x, y).r, l.color.at(x, y).g, l.color.at(x, y).b};
        const std::array<std::uint8_t, 3> rv = {r.color.at(x, y).r, r.color.at(x, y).g, r.color.at(x, y).b};
        const std::array<std::uint8_t, 3> ov = {out.at(x, y).r, out.at(x, y).g, out.at(x, y).b};
        for (int c = 0; c < 3; ++c) {
          std::uint8_t want = fv[c];
          if (cfg.left_mask[c] && l.coverage.at(x, y)) {
            want = lv[c];
          } else if (cfg.right_mask[c] && r.coverage.at(x, y)) {
            want = rv[c];
          }
          if (ov[c] != want) ++mismatches;
        }
        ++pixels;
      }
    }
    AnaglyphConfig off;
    off.enabled = false;
    const RenderTarget empty(w, h);
    identity = identity && composite(f, empty, empty, off) == f;
  }
  return {mismatches == 0 && identity,
          fmt("trials=300 pixels=%ld channel_mismatches=%ld disabled_identity=%s", pixels, mismatches,
              identity ? "yes" : "no")};
}

Outcome separation_zero() {
  const auto bundle = load_scene_bundle(data_dir() / "scene.json");
  std::vector<Frame> frames;
  for (const char* spec : {"synth_three.json", "synth_single.json"}) {
    frames.push_back(render_synthetic(synth_spec_from_json(read_json_file(data_dir() / spec), data_dir())).frame);
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (frames.size() < 6) {
    SynthSpec spec;
    spec.cam = bundle.intrinsics;
    spec.noise_sigma = 3.0;
    spec.seed = frames.size();
    Pose p = tilted_pose(0.3 + 0.3 * unit(rng), 50.0 * unit(rng), 360.0 * unit(rng), 360.0 * unit(rng));
    spec.placements.push_back({bundle.dictionary.patterns[frames.size() % 3], p});
    try {
      frames.push_back(render_synthetic(spec).frame);
    } catch (const Error&) {
    }
  }
  int identical = 0, augmented = 0;
  for (const auto& frame : frames) {
    Scene zero = bundle.scene, off = bundle.scene;
    zero.anaglyph.separation = 0.0;
    off.anaglyph.enabled = false;
    const auto a = process_frame(frame, zero, bundle.dictionary, bundle.intrinsics);
    const auto b = process_frame(frame, off, bundle.dictionary, bundle.intrinsics);
    identical += a.augmented == b.augmented ? 1 : 0;
    augmented += a.augmented == frame ? 0 : 1;
  }
  const int n = static_cast<int>(frames.size());
  return {identical == n && augmented == n,
          fmt("frames=%d bit_identical=%d non_trivial=%d", n, identical, augmented)};
}

Outcome multi_marker_scene() {
  const auto bundle = load_scene_bundle(data_dir() / "scene.json");
  const auto synth = render_synthetic(synth_spec_from_json(read_json_file(data_dir() / "synth_three.json"), data_dir()));
  const auto dets = detect_markers(to_grayscale(synth.frame), bundle.dictionary);
  PoseMap truth;
  for (const auto& t : synth.truth) truth[t.id] = t.pose;

  Scene scene = bundle.scene;
  scene.bindings[0].translation = Vec3(0.012, -0.008, -0.004);
  scene.bindings[1].scale = 1.3;
  scene.bindings[2].translation = Vec3(-0.01, 0.0, -0.02);
  scene.bindings[2].scale = 0.8;
  const auto placements = resolve(dets, scene, truth);
  double worst = placements.size() == 3 ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const Binding* b = scene.find(dets[i].pattern_id);
    const Pose& mp = truth.at(dets[i].pattern_id);
    const Eigen::Matrix4d want = homogeneous(mp.rotation, mp.translation) * homogeneous(Mat3::Identity(), b->translation);
    const Eigen::Matrix4d got = homogeneous(placements[i].pose.rotation, placements[i].pose.translation);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }

  // Coverage union, on the pipeline's own placements for both eyes.
  const auto result = process_frame(synth.frame, scene, bundle.dictionary, bundle.intrinsics);
  const auto objects = resolve(result.detections, scene, result.poses);
  bool union_ok = objects.size() == 3;
  long covered = 0;
  for (EyeSide side : {EyeSide::kLeft, EyeSide::kRight}) {
    std::vector<RenderObject> eye = objects;
    for (auto& o : eye) o.pose = eye_offset(o.pose, side, scene.anaglyph.separation);
    const RenderTarget& full = side == EyeSide::kLeft ? result.left : result.right;
    CoverageMask joined(full.width(), full.height());
    for (const auto& o : eye) {
      const auto single = render(std::span(&o, 1), bundle.intrinsics);
      for (std::size_t k = 0; k < joined.pixels().size(); ++k) joined.pixels()[k] |= single.coverage.pixels()[k];
    }
    union_ok = union_ok && joined == full.coverage;
    covered += std::count(full.coverage.pixels().begin(), full.coverage.pixels().end(), 1);
  }
  return {dets.size() == 3 && worst < 1e-6 && union_ok && covered > 0,
          fmt("detections=%zu placements=%zu max_placement_err=%.2e coverage_union=%s covered_px=%ld", dets.size(),
              placements.size(), worst, union_ok ? "equal" : "DIFFERENT", covered)};
}

Outcome dictionary_properties() {
  const auto shipped = sample_dictionary();
  const bool shipped_ok = validate_dictionary(shipped).ok();

  MarkerDictionary symmetric = shipped;
  MarkerPattern sym{50, PatternGrid::from_rows({"110000", "100100", "001001", "100100", "001001", "000011"})};
  bool is_half_turn = sym.grid.rotated_cw(2) == sym.grid;
  symmetric.patterns.push_back(sym);
  const auto rs = validate_dictionary(symmetric);
  bool flagged_sym = false;
  for (const auto& v : rs.symmetry) flagged_sym |= v.id == 50 && v.quarter_turns == 2 && v.distance == 0;

  MarkerDictionary duplicate = shipped;
  MarkerPattern dup = shipped.patterns[1];
  dup.id = 60;
  duplicate.patterns.push_back(dup);
  const auto rd = validate_dictionary(duplicate);
  bool flagged_dup = false;
  for (const auto& v : rd.uniqueness) flagged_dup |= v.id_a == shipped.patterns[1].id && v.id_b == 60 && v.distance == 0;

  return {shipped_ok && is_half_turn && flagged_sym && flagged_dup,
          fmt("shipped_violations=%s planted_180_symmetric=%s planted_duplicate=%s", shipped_ok ? "0" : ">0",
              flagged_sym ? "flagged" : "missed", flagged_dup ? "flagged" : "missed")};
}

Outcome rasterizer_oracle() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto checker = std::make_shared<Texture>(make_builtin_texture("builtin:checker"));
  const auto wood = std::make_shared<Texture>(make_builtin_texture("builtin:wood"));
  const std::vector<std::shared_ptr<const Mesh>> meshes = {
      std::make_shared<Mesh>(make_box(Vec3(-0.2, -0.15, -0.1), Vec3(0.15, 0.2, 0.12))),
      std::make_shared<Mesh>(make_table(0.4)), std::make_shared<Mesh>(make_single_seat(0.4)),
      std::make_shared<Mesh>(make_double_seat(0.4))};
  int scenes = 0, mismatched = 0;
  long fragments = 0;
  for (; scenes < 150; ++scenes) {
    const int w = 16 + static_cast<int>(unit(rng) * 49), h = 16 + static_cast<int>(unit(rng) * 49);
    const double f = 0.8 * std::max(w, h);
    const CameraIntrinsics cam{f, f, w / 2.0 + unit(rng) - 0.5, h / 2.0 + unit(rng) - 0.5, w, h};
    std::vector<RenderObject> objs;
    const int n = 1 + scenes % 3;
    for (int i = 0; i < n; ++i) {
      Material m{Vec3(unit(rng), unit(rng), unit(rng)), 0.1 + 0.4 * unit(rng), nullptr};
      if (unit(rng) < 0.6) m.texture = unit(rng) < 0.5 ? checker : wood;
      const Mat3 r = rot_x(360 * unit(rng)) * rot_y(360 * unit(rng)) * rot_z(360 * unit(rng));
      objs.push_back({meshes[static_cast<std::size_t>(unit(rng) * meshes.size())], m,
                      Pose{r, Vec3(0.4 * (unit(rng) - 0.5), 0.4 * (unit(rng) - 0.5), 0.9 + unit(rng))}});
    }
    const Vec3 light = Vec3(unit(rng) - 0.5, unit(rng) - 0.5, 1.0).normalized();
    RenderParams params;
    params.light_direction = light;
    const RenderTarget fast = render(objs, cam, params);
    const RenderTarget slow = oracle::NaiveRasterizer(cam, light).render(objs);
    if (!(fast.color == slow.color && fast.coverage == slow.coverage && fast.depth == slow.depth)) ++mismatched;
    fragments += std::count(fast.coverage.pixels().begin(), fast.coverage.pixels().end(), 1);
  }
  return {mismatched == 0 && fragments > 0,
          fmt("scenes=%d (<=64x64) mismatched=%d covered_px=%ld", scenes, mismatched, fragments)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome compose_determinism() {
  const std::string cli = STEREOMARK_CLI;
  const std::string dir = STEREOMARK_WORK_DIR;
  const std::string data = data_dir().string();
  const std::string frame = dir + "/acceptance_frame.png";
  auto run = [](const std::string& cmd) { return std::system((cmd + " 2>/dev/null").c_str()); };
  if (run(cli + " synth --spec " + data + "/synth_three.json -o " + frame) != 0) return {false, "synth command failed"};
  const std::string a = dir + "/acceptance_compose_a.png", b = dir + "/acceptance_compose_b.png";
  std::remove(a.c_str());
  std::remove(b.c_str());
  for (const auto& out : {a, b}) {
    if (run(cli + " compose " + frame + " --scene " + data + "/scene.json -o " + out) != 0) {
      return {false, "compose command failed"};
    }
  }
  const std::string ba = slurp(a), bb = slurp(b), input = slurp(frame);
  const bool same = !ba.empty() && ba == bb;
  return {same && ba != input, fmt("runs=2 bytes=%zu identical=%s", ba.size(), same ? "yes" : "no")};
}

}  // namespace

int main() {
  report("pose-round-trip", pose_round_trip());
  report("homography-exactness", homography_exactness());
  report("anaglyph-bit-exactness", anaglyph_bit_exactness());
  report("separation-zero-equivalence", separation_zero());
  report("multi-marker-scene", multi_marker_scene());
  report("dictionary-properties", dictionary_properties());
  report("rasterizer-oracle", rasterizer_oracle());
  report("compose-determinism", compose_determinism());
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
