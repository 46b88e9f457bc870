#include "doctest.h"
#include "stereomark/config.hpp"
#include "stereomark/marker.hpp"
#include "support/fixtures.hpp"

using namespace stereomark;
using stereomark::testing::sample_dictionary;

namespace {

GrayImage rotate_image_cw(const GrayImage& g) {
  GrayImage out(g.height(), g.width());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) out.at(g.height() - 1 - y, x) = g.at(x, y);
  }
  return out;
}

// Outer border corners of render_marker_image output (quiet zone of 1 cell).
QuadCandidate printed_quad(int pixels_per_cell, int grid) {
  const double lo = pixels_per_cell - 0.5;
  const double hi = pixels_per_cell * (grid + 3) - 0.5;
  QuadCandidate q;
  q.corners = {Point2(lo, lo), Point2(lo, hi), Point2(hi, hi), Point2(hi, lo)};
  q.area = (hi - lo) * (hi - lo);
  return q;
}

MarkerDictionary single(const PatternGrid& grid, int min_hamming = 4) {
  MarkerDictionary d;
  d.grid_size = grid.size();
  d.min_hamming = min_hamming;
  d.patterns.push_back({7, grid, 0.08, Point2::Zero()});
  return d;
}

}  // namespace

TEST_CASE("rotated_cw turns the grid clockwise as displayed") {
  const auto g = PatternGrid::from_rows({"110", "000", "000"});
  CHECK(g.rotated_cw().rows() == std::vector<std::string>{"001", "001", "000"});
  CHECK(g.rotated_cw(4) == g);
  CHECK(g.rotated_cw(3) == g.rotated_cw(-1));
  CHECK(g.hamming(g.rotated_cw(2)) == 4);
}

TEST_CASE("from_rows rejects malformed rows") {
  CHECK_THROWS_AS(PatternGrid::from_rows({"01", "0"}), Error);
  CHECK_THROWS_AS(PatternGrid::from_rows({"0x", "00"}), Error);
}

TEST_CASE("the shipped dictionary validates") {
  const auto dict = sample_dictionary();
  CHECK(dict.patterns.size() == 3);
  const auto report = validate_dictionary(dict);
  CHECK(report.ok());
}

TEST_CASE("validate_dictionary flags a symmetric pattern") {
  const auto dict = single(PatternGrid::from_rows({"100001", "000000", "001100", "001100", "000000", "100001"}));
  const auto report = validate_dictionary(dict);
  CHECK_FALSE(report.ok());
  REQUIRE(report.symmetry.size() == 3);
  for (const auto& v : report.symmetry) {
    CHECK(v.id == 7);
    CHECK(v.distance == 0);
  }
}

TEST_CASE("validate_dictionary flags a rotated duplicate once per pair") {
  auto dict = sample_dictionary();
  auto copy = dict.patterns[0];
  copy.id = 9;
  copy.grid = copy.grid.rotated_cw(1);
  dict.patterns.push_back(copy);
  const auto report = validate_dictionary(dict);
  REQUIRE(report.uniqueness.size() == 1);
  CHECK(report.uniqueness[0] == UniquenessViolation{1, 9, 0});
  CHECK(report.symmetry.empty());
}

TEST_CASE("validate_dictionary uses an inclusive hamming bound") {
  auto dict = sample_dictionary();
  auto near = dict.patterns[1];
  near.id = 4;
  for (int i = 0; i < 4; ++i) near.grid.set(i, i, !near.grid.dark(i, i));
  dict.patterns.push_back(near);
  dict.min_hamming = 4;
  const auto report = validate_dictionary(dict);
  bool found = false;
  for (const auto& v : report.uniqueness) found |= (v.id_a == 2 && v.id_b == 4 && v.distance == 4);
  CHECK(found);
  dict.min_hamming = 3;
  const auto relaxed = validate_dictionary(dict);
  for (const auto& v : relaxed.uniqueness) CHECK_FALSE((v.id_a == 2 && v.id_b == 4));
}

TEST_CASE("validate_dictionary reports structural problems") {
  auto dict = sample_dictionary();
  dict.patterns.push_back(dict.patterns[0]);
  CHECK_FALSE(validate_dictionary(dict).structural.empty());
  auto bad = sample_dictionary();
  bad.patterns[0].grid = PatternGrid(5);
  CHECK_FALSE(validate_dictionary(bad).structural.empty());
}

TEST_CASE("validation report is symmetric in pair order") {
  auto dict = sample_dictionary();
  auto copy = dict.patterns[2];
  copy.id = 0;
  dict.patterns.push_back(copy);
  auto reversed = dict;
  std::reverse(reversed.patterns.begin(), reversed.patterns.end());
  const auto a = validate_dictionary(dict);
  const auto b = validate_dictionary(reversed);
  CHECK(a.uniqueness == b.uniqueness);
  CHECK(a.symmetry == b.symmetry);
}

TEST_CASE("decode reads a front-parallel printed marker") {
  const auto dict = sample_dictionary();
  const auto* pattern = dict.find(3);
  REQUIRE(pattern != nullptr);
  const GrayImage img = render_marker_image(*pattern, 32, 1);
  CHECK(img.width() == 320);
  const auto det = decode(img, printed_quad(32, 6), dict);
  REQUIRE(det.has_value());
  CHECK(det->pattern_id == 3);
  CHECK(det->rotation_index == 0);
  CHECK(det->confidence == doctest::Approx(1.0));
  CHECK(det->corners[0].isApprox(Point2(31.5, 31.5)));
}

TEST_CASE("decode recovers the rotation of a turned marker") {
  const auto dict = sample_dictionary();
  for (const auto& pattern : dict.patterns) {
    GrayImage img = render_marker_image(pattern, 20, 1);
    const QuadCandidate quad = printed_quad(20, 6);
    for (int turns = 0; turns < 4; ++turns) {
      const auto det = decode(img, quad, dict);
      REQUIRE(det.has_value());
      CHECK(det->pattern_id == pattern.id);
      CHECK(det->rotation_index == turns);
      // The pattern's top-left corner follows the rotation around the quad.
      const Point2 expected = quad.corners[turns % 4 == 0 ? 0 : 4 - turns];
      CHECK((det->corners[0] - expected).norm() < 1e-9);
      img = rotate_image_cw(img);
    }
  }
}

TEST_CASE("decode returns nothing for a uniform region") {
  const auto dict = sample_dictionary();
  const GrayImage flat(320, 320, 128);
  CHECK_FALSE(decode(flat, printed_quad(32, 6), dict).has_value());
  const GrayImage dark(320, 320, 0);
  CHECK_FALSE(decode(dark, printed_quad(32, 6), dict).has_value());
}

TEST_CASE("decode rejects an unknown pattern and a broken border") {
  const auto dict = sample_dictionary();
  MarkerPattern other{42, PatternGrid::from_rows({"111111", "111111", "111111", "000000", "000000", "000000"})};
  CHECK_FALSE(decode(render_marker_image(other, 32, 1), printed_quad(32, 6), dict).has_value());

  GrayImage img = render_marker_image(*dict.find(1), 32, 1);
  for (int y = 32; y < 64; ++y)
    for (int x = 96; x < 128; ++x) img.at(x, y) = 255;
  CHECK_FALSE(decode(img, printed_quad(32, 6), dict).has_value());
}

TEST_CASE("decode tolerates a single flipped cell") {
  const auto dict = sample_dictionary();
  auto flipped = *dict.find(2);
  flipped.grid.set(2, 3, !flipped.grid.dark(2, 3));
  const auto det = decode(render_marker_image(flipped, 32, 1), printed_quad(32, 6), dict);
  REQUIRE(det.has_value());
  CHECK(det->pattern_id == 2);
  CHECK(det->confidence == doctest::Approx(1.0 - 1.0 / 36.0));
}

TEST_CASE("decode throws on a degenerate quad") {
  const auto dict = sample_dictionary();
  const GrayImage img(64, 64, 128);
  QuadCandidate q;
  q.corners = {Point2(10, 10), Point2(20, 20), Point2(30, 30), Point2(40, 40)};
  try {
    (void)decode(img, q, dict);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidCandidate);
  }
}

TEST_CASE("dictionary JSON round trips") {
  const auto dict = sample_dictionary();
  const auto back = dictionary_from_json(to_json(dict));
  REQUIRE(back.patterns.size() == dict.patterns.size());
  for (std::size_t i = 0; i < dict.patterns.size(); ++i) {
    CHECK(back.patterns[i].id == dict.patterns[i].id);
    CHECK(back.patterns[i].grid == dict.patterns[i].grid);
    CHECK(back.patterns[i].physical_width == dict.patterns[i].physical_width);
  }
  CHECK(back.min_hamming == dict.min_hamming);
}
