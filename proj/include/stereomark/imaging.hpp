#pragma once

#include <vector>

#include "stereomark/geometry.hpp"
#include "stereomark/image.hpp"

namespace stereomark {

struct ThresholdParams {
  int window = 15;      // odd, >= 3
  double offset = 7.0;  // >= 0
};

struct QuadParams {
  double min_area = 100.0;          // pixels^2
  double polygon_tolerance = 0.02;  // fraction of the traced contour perimeter
};

struct RefineParams {
  int iterations = 2;
  double search_radius = 3.0;  // px along the edge normal, shrunk for short edges
  double max_shift = 2.0;      // refined corners further than this are discarded
};

// Corners are ordered counterclockwise as displayed, starting from the corner
// closest to the image origin.
struct QuadCandidate {
  Quad corners;
  double area = 0.0;
};

// Rec. 601 luma, round half up.
GrayImage to_grayscale(const Frame& frame);

// bit = gray < mean(window x window, edge clamped) - offset.
BinaryImage binarize(const GrayImage& gray, const ThresholdParams& params = {});

// Outer contours of 8-connected dark components that simplify to convex
// quadrilaterals. Ordered by (min corner y, min corner x).
std::vector<QuadCandidate> find_quads(const BinaryImage& bin, const QuadParams& params = {});

// Moves each side onto the gray-level mid crossing of its edge profile and
// re-intersects the sides. Returns the input unchanged when the edges are
// too weak to measure.
QuadCandidate refine_corners(const GrayImage& gray, const QuadCandidate& quad,
                             const RefineParams& params = {});

// Bilinear sample with edge clamping; pixel (x, y) is centred on (x, y).
double sample_bilinear(const GrayImage& gray, double x, double y);

// Puts four corners into the canonical order used by QuadCandidate.
Quad order_corners(Quad corners);

namespace detail {
// Exposed for tests: outer border of the component containing `start`, which
// must be its first pixel in raster order.
std::vector<Eigen::Vector2i> trace_outer_border(const std::vector<int>& labels, int width, int height,
                                                Eigen::Vector2i start);
// Vertex indices of the iterative end-point fit of a closed contour.
std::vector<std::size_t> simplify_closed(const std::vector<Point2>& contour, double tolerance);
}  // namespace detail

}  // namespace stereomark
