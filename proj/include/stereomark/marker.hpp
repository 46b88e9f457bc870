#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stereomark/geometry.hpp"
#include "stereomark/image.hpp"
#include "stereomark/imaging.hpp"

namespace stereomark {

// Square boolean grid, row-major, top row first; true = dark cell.
class PatternGrid {
 public:
  PatternGrid() = default;
  explicit PatternGrid(int size);
  PatternGrid(int size, std::vector<std::uint8_t> cells);
  static PatternGrid from_rows(const std::vector<std::string>& rows);

  int size() const noexcept { return size_; }
  bool dark(int row, int col) const { return cells_[index(row, col)] != 0; }
  void set(int row, int col, bool dark) { cells_[index(row, col)] = dark ? 1 : 0; }

  // 90 degrees clockwise as displayed.
  PatternGrid rotated_cw(int quarter_turns = 1) const;
  int hamming(const PatternGrid& other) const;
  std::vector<std::string> rows() const;

  friend bool operator==(const PatternGrid&, const PatternGrid&) = default;

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * size_ + col; }

  int size_ = 0;
  std::vector<std::uint8_t> cells_;
};

// The printed marker is (N + 2) x (N + 2) cells: the N x N payload `grid`
// surrounded by a mandatory one-cell dark border. physical_width is the outer
// edge length of that border.
struct MarkerPattern {
  int id = 0;
  PatternGrid grid;
  double physical_width = 0.08;            // meters
  Point2 center_offset = Point2::Zero();   // meters
};

struct MarkerDictionary {
  int grid_size = 6;
  int min_hamming = 4;
  std::vector<MarkerPattern> patterns;

  const MarkerPattern* find(int id) const;
};

struct SymmetryViolation {
  int id;
  int quarter_turns;  // 1, 2 or 3
  int distance;
  friend bool operator==(const SymmetryViolation&, const SymmetryViolation&) = default;
};

struct UniquenessViolation {
  int id_a;  // id_a < id_b
  int id_b;
  int distance;  // minimum over relative rotations
  friend bool operator==(const UniquenessViolation&, const UniquenessViolation&) = default;
};

struct ValidationReport {
  std::vector<std::string> structural;  // malformed entries (size mismatch, duplicate id, ...)
  std::vector<SymmetryViolation> symmetry;
  std::vector<UniquenessViolation> uniqueness;

  bool ok() const { return structural.empty() && symmetry.empty() && uniqueness.empty(); }
};

// A rotation of a grid "within min_hamming" (distance <= min_hamming) of
// itself or of any rotation of another grid is a violation.
ValidationReport validate_dictionary(const MarkerDictionary& dict);

struct DetectedMarker {
  int pattern_id = -1;
  // Counterclockwise as displayed, corner 0 = the pattern's top-left.
  Quad corners;
  int rotation_index = 0;  // clockwise quarter turns of the pattern in the image
  double confidence = 0.0;
};

struct DecodeParams {
  int samples_per_cell = 3;   // k x k samples averaged per cell
  double min_contrast = 30.0; // brightest payload cell minus border mean
};

// Samples the quad on the (N + 2)^2 cell lattice through its rectifying
// homography and matches the payload against every pattern under all four
// rotations. Returns nullopt when nothing is within dict.min_hamming.
// Throws kInvalidCandidate for degenerate (near-zero area, non-convex) quads.
std::optional<DetectedMarker> decode(const GrayImage& gray, const QuadCandidate& quad,
                                     const MarkerDictionary& dict, const DecodeParams& params = {});

// Printable marker: dark border + payload, surrounded by `quiet_zone_cells`
// of white.
GrayImage render_marker_image(const MarkerPattern& pattern, int pixels_per_cell = 32,
                              int quiet_zone_cells = 1);

}  // namespace stereomark
