#include "stereomark/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "stereomark/error.hpp"

namespace stereomark {
namespace {

// Position of sub-sample k inside its stratum, in [0, 1)^2. Hashing the pixel
// keeps frames reproducible while decorrelating the pattern between pixels,
// so straight edges do not alias into a common offset.
std::pair<double, double> jitter(int x, int y, int k) {
  std::uint64_t h = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) ^
                    (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 8) ^ static_cast<std::uint64_t>(k);
  // splitmix64 finaliser
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  h ^= h >> 31;
  constexpr double kScale = 1.0 / 4294967296.0;
  return {static_cast<double>(h & 0xffffffffULL) * kScale, static_cast<double>(h >> 32) * kScale};
}

// Kept independent of camera.cpp/pose.cpp on purpose: this generator is the
// reference the detection and pose code is checked against.
struct MarkerPlane {
  const SynthPlacement* placement;
  Mat3 rt;         // rotation transpose
  Vec3 t;
  Vec3 normal;     // marker Z in camera space
  double offset;   // normal . t
  double width;
  double cell;
  Point2 origin;   // marker-plane coordinates of the outer top-left corner
  int cells;       // grid size + 2
};

struct Hit {
  int marker = -1;  // -1 = background
  int row = 0;
  int col = 0;
  double intensity = 0.0;

  bool same_region(const Hit& o) const { return marker == o.marker && row == o.row && col == o.col; }
};

class Caster {
 public:
  explicit Caster(const SynthSpec& spec) : spec_(spec) {
    for (const auto& pl : spec.placements) {
      MarkerPlane m;
      m.placement = &pl;
      m.rt = pl.pose.rotation.transpose();
      m.t = pl.pose.translation;
      m.normal = pl.pose.rotation.col(2);
      m.offset = m.normal.dot(m.t);
      m.width = pl.pattern.physical_width;
      m.cells = pl.pattern.grid.size() + 2;
      m.cell = m.width / m.cells;
      m.origin = pl.pattern.center_offset - Point2(0.5 * m.width, 0.5 * m.width);
      planes_.push_back(m);
    }
  }

  Hit cast(double x, double y) const {
    const Vec3 ray((x - spec_.cam.cx) / spec_.cam.fx, (y - spec_.cam.cy) / spec_.cam.fy, 1.0);
    Hit best;
    double best_s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < planes_.size(); ++i) {
      const MarkerPlane& m = planes_[i];
      const double denom = m.normal.dot(ray);
      if (std::abs(denom) < 1e-12) continue;
      const double s = m.offset / denom;
      if (!(s > 0.0) || s >= best_s) continue;
      const Vec3 local = m.rt * (s * ray - m.t);
      const double a = (local.x() - m.origin.x()) / m.cell;
      const double b = (local.y() - m.origin.y()) / m.cell;
      if (a < 0.0 || b < 0.0 || a >= m.cells || b >= m.cells) continue;
      const int col = std::min(static_cast<int>(a), m.cells - 1);
      const int row = std::min(static_cast<int>(b), m.cells - 1);
      const bool border = row == 0 || col == 0 || row == m.cells - 1 || col == m.cells - 1;
      const bool dark = border || m.placement->pattern.grid.dark(row - 1, col - 1);
      best_s = s;
      best = {static_cast<int>(i), row, col, static_cast<double>(dark ? spec_.dark : spec_.light)};
    }
    return best;
  }

 private:
  const SynthSpec& spec_;
  std::vector<MarkerPlane> planes_;
};

void check_spec(const SynthSpec& spec) {
  try {
    spec.cam.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
  if (!(spec.dark < spec.light)) throw Error(ErrorCode::kInvalidSpec, "dark intensity must be below light");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidSpec, "noise sigma must be >= 0");
  if (spec.background_image &&
      (spec.background_image->width() != spec.cam.width || spec.background_image->height() != spec.cam.height)) {
    throw Error(ErrorCode::kInvalidSpec, "background image must match the camera size");
  }
}

}  // namespace

SynthResult render_synthetic(const SynthSpec& spec) {
  check_spec(spec);
  SynthResult result;
  for (const auto& pl : spec.placements) {
    if (!(pl.pattern.physical_width > 0.0) || pl.pattern.grid.size() < 1) {
      throw Error(ErrorCode::kInvalidSpec, "marker " + std::to_string(pl.pattern.id) + " has no extent");
    }
    const double h = 0.5 * pl.pattern.physical_width;
    const Point2 c = pl.pattern.center_offset;
    const Vec3 centre = pl.pose.rotation * Vec3(c.x(), c.y(), 0.0) + pl.pose.translation;
    // Printed face normal is -Z; it must point back at the camera.
    if (!(pl.pose.rotation.col(2).dot(centre) > 0.0)) {
      throw Error(ErrorCode::kInvalidSpec, "marker " + std::to_string(pl.pattern.id) + " faces away from the camera");
    }
    GroundTruthMarker gt;
    gt.id = pl.pattern.id;
    gt.pose = pl.pose;
    const std::array<Point2, 4> local = {Point2(c.x() - h, c.y() - h), Point2(c.x() - h, c.y() + h),
                                         Point2(c.x() + h, c.y() + h), Point2(c.x() + h, c.y() - h)};
    for (int i = 0; i < 4; ++i) {
      const Vec3 p = pl.pose.rotation * Vec3(local[i].x(), local[i].y(), 0.0) + pl.pose.translation;
      if (!(p.z() > 0.0)) throw Error(ErrorCode::kInvalidSpec, "marker corner behind the camera");
      const double inv_z = 1.0 / p.z();
      gt.corners[i] = {spec.cam.cx + spec.cam.fx * (p.x() * inv_z), spec.cam.cy + spec.cam.fy * (p.y() * inv_z)};
      if (gt.corners[i].x() < 0.0 || gt.corners[i].y() < 0.0 || gt.corners[i].x() > spec.cam.width - 1.0 ||
          gt.corners[i].y() > spec.cam.height - 1.0) {
        throw Error(ErrorCode::kInvalidSpec, "marker " + std::to_string(pl.pattern.id) + " leaves the image");
      }
    }
    result.truth.push_back(gt);
  }

  const Caster caster(spec);
  Frame frame(spec.cam.width, spec.cam.height, spec.background);
  if (spec.background_image) frame = *spec.background_image;
  constexpr int kSub = 4;
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      const Rgb bg = frame.at(x, y);
      const Hit centre = caster.cast(x, y);
      bool uniform = true;
      for (const auto& [dx, dy] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}}) {
        if (!caster.cast(x + dx, y + dy).same_region(centre)) {
          uniform = false;
          break;
        }
      }
      if (uniform) {
        if (centre.marker >= 0) {
          const auto v = static_cast<std::uint8_t>(centre.intensity);
          frame.at(x, y) = {v, v, v};
        }
        continue;
      }
      double sum[3] = {0.0, 0.0, 0.0};
      constexpr double kCount = kSub * kSub;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const auto [jx, jy] = jitter(x, y, sy * kSub + sx);
          const Hit h = caster.cast(x - 0.5 + (sx + jx) / kSub, y - 0.5 + (sy + jy) / kSub);
          if (h.marker >= 0) {
            for (double& s : sum) s += h.intensity;
          } else {
            sum[0] += bg.r;
            sum[1] += bg.g;
            sum[2] += bg.b;
          }
        }
      }
      frame.at(x, y) = {static_cast<std::uint8_t>(std::lround(sum[0] / kCount)),
                        static_cast<std::uint8_t>(std::lround(sum[1] / kCount)),
                        static_cast<std::uint8_t>(std::lround(sum[2] / kCount))};
    }
  }

  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    auto perturb = [&](std::uint8_t v) {
      return static_cast<std::uint8_t>(std::clamp(std::lround(v + noise(rng)), 0L, 255L));
    };
    for (auto& px : frame.pixels()) px = {perturb(px.r), perturb(px.g), perturb(px.b)};
  }
  result.frame = std::move(frame);
  return result;
}

}  // namespace stereomark
