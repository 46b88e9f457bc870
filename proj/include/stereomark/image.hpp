#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stereomark/error.hpp"

namespace stereomark {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major raster with value semantics. The Tag parameter keeps rasters of
// the same element type but different meaning (gray vs. binary) distinct.
template <typename T, typename Tag = void>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::kInvalidInput, "raster dimensions must be >= 1");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  template <typename U, typename OtherTag>
  bool same_size(const Raster<U, OtherTag>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct GrayTag;
struct BinaryTag;

using Frame = Raster<Rgb>;
using GrayImage = Raster<std::uint8_t, GrayTag>;
// 1 = dark/foreground, 0 = light/background.
using BinaryImage = Raster<std::uint8_t, BinaryTag>;

}  // namespace stereomark
