#include "stereomark/marker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "stereomark/homography.hpp"

namespace stereomark {

PatternGrid::PatternGrid(int size) : size_(size), cells_(static_cast<std::size_t>(size) * size, 0) {
  if (size < 1) throw Error(ErrorCode::kInvalidInput, "grid size must be positive");
}

PatternGrid::PatternGrid(int size, std::vector<std::uint8_t> cells) : size_(size), cells_(std::move(cells)) {
  if (size < 1 || cells_.size() != static_cast<std::size_t>(size) * size) {
    throw Error(ErrorCode::kInvalidInput, "grid cell count does not match its size");
  }
  for (auto& c : cells_) c = c ? 1 : 0;
}

PatternGrid PatternGrid::from_rows(const std::vector<std::string>& rows) {
  const int n = static_cast<int>(rows.size());
  PatternGrid grid(n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(rows[r].size()) != n) {
      throw Error(ErrorCode::kParse, "pattern row " + std::to_string(r) + " has the wrong length");
    }
    for (int c = 0; c < n; ++c) {
      const char ch = rows[r][c];
      if (ch != '0' && ch != '1') throw Error(ErrorCode::kParse, "pattern rows must be '0'/'1' strings");
      grid.set(r, c, ch == '1');
    }
  }
  return grid;
}

PatternGrid PatternGrid::rotated_cw(int quarter_turns) const {
  quarter_turns = ((quarter_turns % 4) + 4) % 4;
  PatternGrid out = *this;
  for (int t = 0; t < quarter_turns; ++t) {
    PatternGrid next(size_);
    for (int r = 0; r < size_; ++r) {
      for (int c = 0; c < size_; ++c) next.set(r, c, out.dark(size_ - 1 - c, r));
    }
    out = std::move(next);
  }
  return out;
}

int PatternGrid::hamming(const PatternGrid& other) const {
  if (other.size_ != size_) throw Error(ErrorCode::kInvalidInput, "grid size mismatch");
  int d = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) d += cells_[i] != other.cells_[i];
  return d;
}

std::vector<std::string> PatternGrid::rows() const {
  std::vector<std::string> out(size_, std::string(size_, '0'));
  for (int r = 0; r < size_; ++r) {
    for (int c = 0; c < size_; ++c) out[r][c] = dark(r, c) ? '1' : '0';
  }
  return out;
}

const MarkerPattern* MarkerDictionary::find(int id) const {
  for (const auto& p : patterns) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

ValidationReport validate_dictionary(const MarkerDictionary& dict) {
  ValidationReport report;
  if (dict.grid_size < 4) report.structural.push_back("grid_size must be >= 4");
  if (dict.min_hamming < 0) report.structural.push_back("min_hamming must be >= 0");
  std::set<int> seen;
  std::vector<const MarkerPattern*> usable;
  for (const auto& p : dict.patterns) {
    const std::string tag = "pattern " + std::to_string(p.id);
    bool good = true;
    if (p.id < 0) {
      report.structural.push_back(tag + ": id must be non-negative");
      good = false;
    }
    if (!seen.insert(p.id).second) {
      report.structural.push_back(tag + ": duplicate id");
      good = false;
    }
    if (p.grid.size() != dict.grid_size) {
      report.structural.push_back(tag + ": grid size differs from the dictionary's");
      good = false;
    }
    if (!(p.physical_width > 0.0)) {
      report.structural.push_back(tag + ": physical width must be positive");
      good = false;
    }
    if (good) usable.push_back(&p);
  }
  for (const auto* p : usable) {
    for (int turns = 1; turns <= 3; ++turns) {
      const int d = p->grid.rotated_cw(turns).hamming(p->grid);
      if (d <= dict.min_hamming) report.symmetry.push_back({p->id, turns, d});
    }
  }
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t j = i + 1; j < usable.size(); ++j) {
      int best = std::numeric_limits<int>::max();
      for (int turns = 0; turns < 4; ++turns) {
        best = std::min(best, usable[i]->grid.rotated_cw(turns).hamming(usable[j]->grid));
      }
      if (best <= dict.min_hamming) {
        report.uniqueness.push_back({std::min(usable[i]->id, usable[j]->id),
                                     std::max(usable[i]->id, usable[j]->id), best});
      }
    }
  }
  auto by_sym = [](const SymmetryViolation& a, const SymmetryViolation& b) {
    return std::tie(a.id, a.quarter_turns) < std::tie(b.id, b.quarter_turns);
  };
  auto by_pair = [](const UniquenessViolation& a, const UniquenessViolation& b) {
    return std::tie(a.id_a, a.id_b) < std::tie(b.id_a, b.id_b);
  };
  std::sort(report.symmetry.begin(), report.symmetry.end(), by_sym);
  std::sort(report.uniqueness.begin(), report.uniqueness.end(), by_pair);
  return report;
}

std::optional<DetectedMarker> decode(const GrayImage& gray, const QuadCandidate& quad,
                                     const MarkerDictionary& dict, const DecodeParams& params) {
  if (!(ccw_area(quad.corners) > 1.0) || !is_convex_ccw(quad.corners)) {
    throw Error(ErrorCode::kInvalidCandidate, "degenerate or self-intersecting quad");
  }
  const int n = dict.grid_size;
  const int cells = n + 2;
  const double c = static_cast<double>(cells);
  // Cell lattice (col, row) -> image, corners in canonical quad order.
  const std::array<Point2, 4> lattice = {Point2(0, 0), Point2(0, c), Point2(c, c), Point2(c, 0)};
  Homography h;
  try {
    h = estimate_homography(lattice, quad.corners);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidCandidate, e.what());
  }

  const int k = std::max(1, params.samples_per_cell);
  std::vector<double> value(static_cast<std::size_t>(cells) * cells);
  for (int r = 0; r < cells; ++r) {
    for (int col = 0; col < cells; ++col) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
          const Point2 p = h.apply({col + (i + 1.0) / (k + 1.0), r + (j + 1.0) / (k + 1.0)});
          sum += sample_bilinear(gray, p.x(), p.y());
        }
      }
      value[static_cast<std::size_t>(r) * cells + col] = sum / (k * k);
    }
  }
  auto at = [&](int r, int col) { return value[static_cast<std::size_t>(r) * cells + col]; };
  auto is_border = [&](int r, int col) { return r == 0 || col == 0 || r == cells - 1 || col == cells - 1; };

  double border_sum = 0.0;
  int border_count = 0;
  double brightest = -1.0;
  for (int r = 0; r < cells; ++r) {
    for (int col = 0; col < cells; ++col) {
      if (is_border(r, col)) {
        border_sum += at(r, col);
        ++border_count;
      } else {
        brightest = std::max(brightest, at(r, col));
      }
    }
  }
  const double dark_ref = border_sum / border_count;
  if (brightest - dark_ref < params.min_contrast) return std::nullopt;
  const double threshold = 0.5 * (dark_ref + brightest);
  for (int r = 0; r < cells; ++r) {
    for (int col = 0; col < cells; ++col) {
      if (is_border(r, col) && at(r, col) >= threshold) return std::nullopt;
    }
  }
  PatternGrid sampled(n);
  for (int r = 0; r < n; ++r) {
    for (int col = 0; col < n; ++col) sampled.set(r, col, at(r + 1, col + 1) < threshold);
  }

  const MarkerPattern* best = nullptr;
  int best_turns = 0;
  int best_distance = std::numeric_limits<int>::max();
  for (const auto& pattern : dict.patterns) {
    if (pattern.grid.size() != n) continue;
    for (int turns = 0; turns < 4; ++turns) {
      const int d = sampled.hamming(pattern.grid.rotated_cw(turns));
      if (d < best_distance) {
        best_distance = d;
        best = &pattern;
        best_turns = turns;
      }
    }
  }
  if (!best || best_distance > dict.min_hamming) return std::nullopt;

  DetectedMarker out;
  out.pattern_id = best->id;
  out.rotation_index = best_turns;
  // A clockwise quarter turn carries the pattern's corner i to quad slot i - 1.
  for (int i = 0; i < 4; ++i) out.corners[i] = quad.corners[(i - best_turns + 4) % 4];
  out.confidence = 1.0 - static_cast<double>(best_distance) / (n * n);
  return out;
}

GrayImage render_marker_image(const MarkerPattern& pattern, int pixels_per_cell, int quiet_zone_cells) {
  if (pixels_per_cell < 1 || quiet_zone_cells < 0) {
    throw Error(ErrorCode::kInvalidParameter, "marker image needs positive cell size");
  }
  const int n = pattern.grid.size();
  const int cells = n + 2 + 2 * quiet_zone_cells;
  GrayImage img(cells * pixels_per_cell, cells * pixels_per_cell, 255);
  for (int r = 0; r < n + 2; ++r) {
    for (int c = 0; c < n + 2; ++c) {
      const bool border = r == 0 || c == 0 || r == n + 1 || c == n + 1;
      const bool dark = border || pattern.grid.dark(r - 1, c - 1);
      if (!dark) continue;
      const int y0 = (r + quiet_zone_cells) * pixels_per_cell;
      const int x0 = (c + quiet_zone_cells) * pixels_per_cell;
      for (int y = y0; y < y0 + pixels_per_cell; ++y) {
        for (int x = x0; x < x0 + pixels_per_cell; ++x) img.at(x, y) = 0;
      }
    }
  }
  return img;
}

}  // namespace stereomark
