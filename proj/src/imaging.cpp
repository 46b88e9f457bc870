#include "stereomark/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

#include <Eigen/Eigenvalues>

namespace stereomark {
namespace {

// Clockwise on screen: E, SE, S, SW, W, NW, N, NE.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

struct Component {
  int label = 0;
  Eigen::Vector2i first;
  int min_x, min_y, max_x, max_y;
  bool touches_border = false;
};

std::vector<Component> label_components(const BinaryImage& bin, std::vector<int>& labels) {
  const int w = bin.width();
  const int h = bin.height();
  labels.assign(bin.size(), 0);
  std::vector<Component> components;
  std::vector<int> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int idx = y * w + x;
      if (!bin[idx] || labels[idx]) continue;
      Component c{static_cast<int>(components.size()) + 1, {x, y}, x, y, x, y, false};
      labels[idx] = c.label;
      stack.push_back(idx);
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cx = cur % w;
        const int cy = cur / w;
        c.min_x = std::min(c.min_x, cx);
        c.max_x = std::max(c.max_x, cx);
        c.min_y = std::min(c.min_y, cy);
        c.max_y = std::max(c.max_y, cy);
        if (cx == 0 || cy == 0 || cx == w - 1 || cy == h - 1) c.touches_border = true;
        for (int d = 0; d < 8; ++d) {
          const int nx = cx + kDx[d];
          const int ny = cy + kDy[d];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int n = ny * w + nx;
          if (bin[n] && !labels[n]) {
            labels[n] = c.label;
            stack.push_back(n);
          }
        }
      }
      components.push_back(c);
    }
  }
  return components;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Line as (point, unit direction).
struct Line {
  Point2 point;
  Point2 direction;
};

std::optional<Line> fit_line(const std::vector<Point2>& pts) {
  if (pts.size() < 2) return std::nullopt;
  Point2 mean = Point2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Point2 d = p - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  // Largest eigenvalue is last.
  if (eig.eigenvalues()(1) <= 0.0) return std::nullopt;
  return Line{mean, eig.eigenvectors().col(1).normalized()};
}

std::optional<Point2> intersect(const Line& a, const Line& b) {
  const double denom = a.direction.x() * b.direction.y() - a.direction.y() * b.direction.x();
  if (std::abs(denom) < 1e-9) return std::nullopt;
  const Point2 d = b.point - a.point;
  const double s = (d.x() * b.direction.y() - d.y() * b.direction.x()) / denom;
  return a.point + s * a.direction;
}

Point2 outward_normal(const Line& line, const Point2& centroid) {
  Point2 n(-line.direction.y(), line.direction.x());
  if (n.dot(line.point - centroid) < 0.0) n = -n;
  return n;
}

Point2 centroid_of(const Quad& q) { return 0.25 * (q[0] + q[1] + q[2] + q[3]); }

// Intersects four side lines into corners; side i runs from corner i to i+1.
std::optional<Quad> corners_from_sides(const std::array<Line, 4>& sides) {
  Quad out;
  for (int i = 0; i < 4; ++i) {
    auto p = intersect(sides[(i + 3) % 4], sides[i]);
    if (!p) return std::nullopt;
    out[i] = *p;
  }
  return out;
}

// Fits the sides of a contour polygon and pushes them half a pixel outwards so
// the corners land on the dark region's boundary rather than on the centres of
// its outermost pixels.
Quad fit_quad_sides(const std::vector<Point2>& contour, const std::array<std::size_t, 4>& vertex_idx) {
  Quad raw;
  for (int i = 0; i < 4; ++i) raw[i] = contour[vertex_idx[i]];
  const Point2 centroid = centroid_of(raw);
  const std::size_t n = contour.size();
  std::array<Line, 4> sides;
  for (int i = 0; i < 4; ++i) {
    const std::size_t begin = vertex_idx[i];
    const std::size_t end = vertex_idx[(i + 1) % 4];
    const std::size_t count = (end + n - begin) % n;
    const std::size_t trim = std::max<std::size_t>(1, count / 10);
    std::vector<Point2> pts;
    for (std::size_t k = trim; k + trim <= count; ++k) pts.push_back(contour[(begin + k) % n]);
    auto line = fit_line(pts);
    if (!line) line = Line{raw[i], (raw[(i + 1) % 4] - raw[i]).normalized()};
    line->point += 0.5 * outward_normal(*line, centroid);
    sides[i] = *line;
  }
  auto corners = corners_from_sides(sides);
  return corners ? *corners : raw;
}

// Sub-pixel position along `normal` where the profile crosses the midpoint
// between its darkest and brightest samples, searching outward from inside.
std::optional<double> edge_crossing(const GrayImage& gray, const Point2& origin, const Point2& normal,
                                    double radius) {
  constexpr double kStep = 0.25;
  const int steps = static_cast<int>(std::floor(radius / kStep));
  if (steps < 2) return std::nullopt;
  std::vector<double> profile;
  profile.reserve(2 * steps + 1);
  for (int i = -steps; i <= steps; ++i) {
    const Point2 p = origin + (i * kStep) * normal;
    profile.push_back(sample_bilinear(gray, p.x(), p.y()));
  }
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  if (*hi - *lo < 10.0) return std::nullopt;
  const double mid = 0.5 * (*lo + *hi);
  std::optional<double> best;
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    if (profile[i] < mid && profile[i + 1] >= mid) {
      const double frac = (mid - profile[i]) / (profile[i + 1] - profile[i]);
      const double s = (static_cast<double>(i) - steps + frac) * kStep;
      if (!best || std::abs(s) < std::abs(*best)) best = s;
    }
  }
  return best;
}

// Fraction of a unit pixel, centred at signed distance d from a line with
// unit normal (cos t, sin t), lying on the positive side. The projection of
// the square onto the normal is the sum of two uniforms, so this is a
// trapezoid CDF.
double pixel_coverage(double d, double nx, double ny) {
  const double a = 0.5 * std::max(std::abs(nx), std::abs(ny));
  const double b = 0.5 * std::min(std::abs(nx), std::abs(ny));
  if (d < 0.0) return 1.0 - pixel_coverage(-d, nx, ny);
  if (d >= a + b) return 1.0;
  if (d <= a - b) return 0.5 + d / (2.0 * a);
  const double r = a + b - d;
  return 1.0 - r * r / (8.0 * a * b);
}

// Least-squares fit of a straight dark/light step to the raw pixels of a band
// around a side, modelling each pixel as the area average of the step.
// `a`, `b` are the current side end points, `outward` points to the light.
std::optional<Line> fit_step_edge(const GrayImage& gray, const Point2& a, const Point2& b, const Point2& outward) {
  constexpr double kBand = 2.5;
  const double length = (b - a).norm();
  const Point2 dir = (b - a) / length;
  const Point2 mid = 0.5 * (a + b);

  struct Sample {
    Point2 rel;
    double value;
  };
  std::vector<Sample> samples;
  const double pad = kBand + 1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - pad)));
  const int x1 = std::min(gray.width() - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + pad)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - pad)));
  const int y1 = std::min(gray.height() - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + pad)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Point2 rel = Point2(x, y) - mid;
      const double t = rel.dot(dir) / length + 0.5;
      if (t < 0.15 || t > 0.85 || std::abs(rel.dot(outward)) > kBand) continue;
      samples.push_back({rel, static_cast<double>(gray.at(x, y))});
    }
  }
  if (samples.size() < 12) return std::nullopt;

  double theta = std::atan2(outward.y(), outward.x());
  double c = 0.0;
  double dark = 0.0, light = 0.0;
  int n_dark = 0, n_light = 0;
  for (const auto& s : samples) {
    const double d = s.rel.dot(outward);
    if (d < -1.5) dark += s.value, ++n_dark;
    if (d > 1.5) light += s.value, ++n_light;
  }
  if (n_dark < 3 || n_light < 3) return std::nullopt;
  dark /= n_dark;
  light /= n_light;
  if (light - dark < 10.0) return std::nullopt;

  auto model = [&](const Sample& s, double th, double off) {
    const double nx = std::cos(th), ny = std::sin(th);
    return pixel_coverage(nx * s.rel.x() + ny * s.rel.y() - off, nx, ny);
  };
  constexpr double kH = 1e-6;
  for (int iter = 0; iter < 8; ++iter) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (const auto& s : samples) {
      const double f = model(s, theta, c);
      const double r = s.value - (dark + (light - dark) * f);
      Eigen::Vector4d j;
      j(0) = (light - dark) * (model(s, theta + kH, c) - model(s, theta - kH, c)) / (2 * kH);
      j(1) = (light - dark) * (model(s, theta, c + kH) - model(s, theta, c - kH)) / (2 * kH);
      j(2) = 1.0 - f;
      j(3) = f;
      jtj += j * j.transpose();
      jtr += j * r;
    }
    const Eigen::Vector4d step = jtj.ldlt().solve(jtr);
    if (!step.allFinite()) return std::nullopt;
    theta += step(0);
    c += step(1);
    dark += step(2);
    light += step(3);
    if (std::abs(step(0)) < 1e-9 && std::abs(step(1)) < 1e-7) break;
  }
  if (std::abs(c) > 1.0 || light - dark < 10.0) return std::nullopt;
  const Point2 n(std::cos(theta), std::sin(theta));
  if (n.dot(outward) < std::cos(0.05)) return std::nullopt;
  return Line{mid + c * n, Point2(-n.y(), n.x())};
}

}  // namespace

GrayImage to_grayscale(const Frame& frame) {
  GrayImage gray(frame.width(), frame.height());
  const auto src = frame.pixels();
  auto dst = gray.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::uint32_t v = 299u * src[i].r + 587u * src[i].g + 114u * src[i].b;
    dst[i] = static_cast<std::uint8_t>(std::min<std::uint32_t>((v + 500u) / 1000u, 255u));
  }
  return gray;
}

BinaryImage binarize(const GrayImage& gray, const ThresholdParams& params) {
  if (params.window < 3 || params.window % 2 == 0) {
    throw Error(ErrorCode::kInvalidParameter, "threshold window must be odd and >= 3");
  }
  if (params.offset < 0.0) throw Error(ErrorCode::kInvalidParameter, "threshold offset must be >= 0");
  if (params.window > gray.width() && params.window > gray.height()) {
    throw Error(ErrorCode::kInvalidParameter, "threshold window larger than the image");
  }
  const int w = gray.width();
  const int h = gray.height();
  const int r = params.window / 2;
  // Integral image of the edge-clamped extension, (w + 2r + 1) x (h + 2r + 1).
  const int pw = w + 2 * r;
  const int ph = h + 2 * r;
  std::vector<std::int64_t> integral(static_cast<std::size_t>(pw + 1) * (ph + 1), 0);
  auto at = [&](int x, int y) -> std::int64_t& { return integral[static_cast<std::size_t>(y) * (pw + 1) + x]; };
  for (int y = 0; y < ph; ++y) {
    const int sy = std::clamp(y - r, 0, h - 1);
    std::int64_t row = 0;
    for (int x = 0; x < pw; ++x) {
      const int sx = std::clamp(x - r, 0, w - 1);
      row += gray.at(sx, sy);
      at(x + 1, y + 1) = at(x + 1, y) + row;
    }
  }
  const double n = static_cast<double>(params.window) * params.window;
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Window in padded coordinates is [x, x + window) x [y, y + window).
      const int x1 = x + params.window;
      const int y1 = y + params.window;
      const std::int64_t sum = at(x1, y1) - at(x, y1) - at(x1, y) + at(x, y);
      out.at(x, y) = gray.at(x, y) < static_cast<double>(sum) / n - params.offset ? 1 : 0;
    }
  }
  return out;
}

namespace detail {

std::vector<Eigen::Vector2i> trace_outer_border(const std::vector<int>& labels, int width, int height,
                                                Eigen::Vector2i start) {
  const int label = labels[static_cast<std::size_t>(start.y()) * width + start.x()];
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < width && y < height &&
           labels[static_cast<std::size_t>(y) * width + x] == label;
  };
  std::vector<Eigen::Vector2i> contour;
  // The pixel left of the first raster pixel is background: start the
  // clockwise search from the west direction.
  int first_dir = -1;
  for (int k = 0; k < 8; ++k) {
    const int d = (4 + k) % 8;
    if (inside(start.x() + kDx[d], start.y() + kDy[d])) {
      first_dir = d;
      break;
    }
  }
  if (first_dir < 0) return {start};
  const Eigen::Vector2i p1 = start + Eigen::Vector2i(kDx[first_dir], kDy[first_dir]);
  Eigen::Vector2i prev = p1;
  Eigen::Vector2i cur = start;
  while (true) {
    contour.push_back(cur);
    // Counterclockwise search around `cur`, starting after `prev`.
    const int from = direction_of(prev.x() - cur.x(), prev.y() - cur.y());
    Eigen::Vector2i next = cur;
    for (int k = 1; k <= 8; ++k) {
      const int d = (from - k + 16) % 8;
      const int nx = cur.x() + kDx[d];
      const int ny = cur.y() + kDy[d];
      if (inside(nx, ny)) {
        next = {nx, ny};
        break;
      }
    }
    if (next == start && cur == p1) break;
    prev = cur;
    cur = next;
    if (contour.size() > 8 * labels.size()) break;  // unreachable for valid labels
  }
  return contour;
}

std::vector<std::size_t> simplify_closed(const std::vector<Point2>& contour, double tolerance) {
  const std::size_t n = contour.size();
  if (n < 3) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  auto farthest_from = [&](std::size_t from) {
    std::size_t best = from;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (contour[i] - contour[from]).squaredNorm();
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  const std::size_t b = farthest_from(0);
  const std::size_t a = farthest_from(b);
  std::vector<char> keep(n, 0);
  keep[a] = keep[b] = 1;
  // Chains are index ranges walked forward cyclically from `from` to `to`.
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{a, b}, {b, a}};
  while (!stack.empty()) {
    const auto [from, to] = stack.back();
    stack.pop_back();
    const std::size_t len = (to + n - from) % n;
    if (len < 2) continue;
    double max_d = -1.0;
    std::size_t max_i = from;
    for (std::size_t k = 1; k < len; ++k) {
      const std::size_t i = (from + k) % n;
      const double d = point_segment_distance(contour[i], contour[from], contour[to]);
      if (d > max_d) {
        max_d = d;
        max_i = i;
      }
    }
    if (max_d > tolerance) {
      keep[max_i] = 1;
      stack.emplace_back(from, max_i);
      stack.emplace_back(max_i, to);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

}  // namespace detail

Quad order_corners(Quad corners) {
  if (ccw_area(corners) < 0.0) std::reverse(corners.begin(), corners.end());
  std::size_t first = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (corners[i].squaredNorm() < corners[first].squaredNorm()) first = i;
  }
  std::rotate(corners.begin(), corners.begin() + static_cast<std::ptrdiff_t>(first), corners.end());
  return corners;
}

std::vector<QuadCandidate> find_quads(const BinaryImage& bin, const QuadParams& params) {
  std::vector<int> labels;
  const auto components = label_components(bin, labels);
  std::vector<QuadCandidate> quads;
  for (const auto& c : components) {
    if (c.touches_border) continue;
    const double box_area = static_cast<double>(c.max_x - c.min_x + 1) * (c.max_y - c.min_y + 1);
    if (box_area < params.min_area) continue;
    const auto border = detail::trace_outer_border(labels, bin.width(), bin.height(), c.first);
    if (border.size() < 4) continue;
    std::vector<Point2> contour;
    contour.reserve(border.size());
    for (const auto& p : border) contour.emplace_back(p.x(), p.y());
    double perimeter = 0.0;
    for (std::size_t i = 0; i < contour.size(); ++i) {
      perimeter += (contour[(i + 1) % contour.size()] - contour[i]).norm();
    }
    const auto vertices = detail::simplify_closed(contour, params.polygon_tolerance * perimeter);
    if (vertices.size() != 4) continue;
    const Quad fitted = fit_quad_sides(contour, {vertices[0], vertices[1], vertices[2], vertices[3]});
    const Quad ordered = order_corners(fitted);
    if (!is_convex_ccw(ordered)) continue;
    const double area = ccw_area(ordered);
    if (area < params.min_area) continue;
    quads.push_back({ordered, area});
  }
  auto key = [](const QuadCandidate& q) {
    double min_y = q.corners[0].y();
    double min_x = q.corners[0].x();
    for (const auto& p : q.corners) {
      min_y = std::min(min_y, p.y());
      min_x = std::min(min_x, p.x());
    }
    return std::make_pair(min_y, min_x);
  };
  std::stable_sort(quads.begin(), quads.end(),
                   [&](const QuadCandidate& a, const QuadCandidate& b) { return key(a) < key(b); });
  return quads;
}

double sample_bilinear(const GrayImage& gray, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(gray.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(gray.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, gray.width() - 1);
  const int y1 = std::min(y0 + 1, gray.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * gray.at(x0, y0) + fx * gray.at(x1, y0);
  const double bottom = (1.0 - fx) * gray.at(x0, y1) + fx * gray.at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

QuadCandidate refine_corners(const GrayImage& gray, const QuadCandidate& quad, const RefineParams& params) {
  Quad corners = quad.corners;
  for (int iter = 0; iter < params.iterations; ++iter) {
    const Point2 centroid = centroid_of(corners);
    std::array<Line, 4> sides;
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
      const Point2 a = corners[i];
      const Point2 b = corners[(i + 1) % 4];
      const double length = (b - a).norm();
      if (length < 4.0) {
        ok = false;
        break;
      }
      const Line chord{a, (b - a) / length};
      const Point2 normal = outward_normal(chord, centroid);
      const double radius = std::clamp(0.06 * length, 1.0, params.search_radius);
      const int samples = std::clamp(static_cast<int>(length / 2.0), 8, 64);
      std::vector<Point2> edge_points;
      for (int s = 0; s < samples; ++s) {
        const double t = 0.15 + 0.7 * (s + 0.5) / samples;
        const Point2 origin = a + t * (b - a);
        if (auto offset = edge_crossing(gray, origin, normal, radius)) {
          edge_points.push_back(origin + *offset * normal);
        }
      }
      auto line = edge_points.size() >= 3 ? fit_line(edge_points) : std::nullopt;
      if (!line) {
        ok = false;
        break;
      }
      sides[i] = *line;
    }
    if (!ok) break;
    auto refined = corners_from_sides(sides);
    if (!refined) break;
    bool sane = true;
    for (int i = 0; i < 4; ++i) {
      if (((*refined)[i] - quad.corners[i]).norm() > params.max_shift) sane = false;
    }
    if (!sane || !is_convex_ccw(*refined)) break;
    corners = *refined;
  }
  // Final pass: model-based fit of each side on the raw pixels.
  const Point2 centroid = centroid_of(corners);
  std::array<Line, 4> sides;
  for (int i = 0; i < 4; ++i) {
    const Point2& a = corners[i];
    const Point2& b = corners[(i + 1) % 4];
    if ((b - a).norm() < 8.0) return {corners, ccw_area(corners)};
    const Line chord{a, (b - a).normalized()};
    auto side = fit_step_edge(gray, a, b, outward_normal(chord, centroid));
    if (!side) return {corners, ccw_area(corners)};
    sides[i] = *side;
  }
  if (auto polished = corners_from_sides(sides)) {
    bool sane = is_convex_ccw(*polished);
    for (int i = 0; i < 4; ++i) sane = sane && ((*polished)[i] - quad.corners[i]).norm() <= params.max_shift;
    if (sane) corners = *polished;
  }
  return {corners, ccw_area(corners)};
}

}  // namespace stereomark
