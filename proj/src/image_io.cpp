#include "stereomark/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace stereomark {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::vector<std::uint8_t> write_png_image(png_image& image, const void* buffer) {
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer, 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

// Netpbm header tokenizer: whitespace separated, '#' comments to end of line.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) throw Error(ErrorCode::kParse, "truncated PNM header");
    return out;
  }

  int number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw Error(ErrorCode::kParse, "bad PNM header field: " + t);
    }
    return std::stoi(t);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> pnm_bytes(const std::string& header, std::span<const std::uint8_t> raster) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

}  // namespace

Frame decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kParse, std::string("png decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width < 1 || image.height < 1) {
    png_image_free(&image);
    throw Error(ErrorCode::kParse, "png has zero dimensions");
  }
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height));
  static_assert(sizeof(Rgb) == 3);
  if (!png_image_finish_read(&image, nullptr, frame.pixels().data(), 0, nullptr)) {
    throw Error(ErrorCode::kParse, std::string("png decode failed: ") + image.message);
  }
  return frame;
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  return write_png_image(image, frame.pixels().data());
}

std::vector<std::uint8_t> encode_png(const GrayImage& gray) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(gray.width());
  image.height = static_cast<png_uint_32>(gray.height());
  image.format = PNG_FORMAT_GRAY;
  return write_png_image(image, gray.pixels().data());
}

Frame decode_ppm(std::span<const std::uint8_t> bytes) {
  PnmHeader header(bytes);
  if (header.token() != "P6") throw Error(ErrorCode::kParse, "not a binary PPM (P6)");
  const int width = header.number();
  const int height = header.number();
  const int maxval = header.number();
  if (maxval != 255) throw Error(ErrorCode::kParse, "only maxval 255 PPM is supported");
  if (width < 1 || height < 1) throw Error(ErrorCode::kParse, "PPM has zero dimensions");
  const std::size_t offset = header.raster_offset();
  const std::size_t needed = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() < offset + needed) throw Error(ErrorCode::kParse, "truncated PPM raster");
  Frame frame(width, height);
  std::memcpy(frame.pixels().data(), bytes.data() + offset, needed);
  return frame;
}

std::vector<std::uint8_t> encode_ppm(const Frame& frame) {
  const auto* raw = reinterpret_cast<const std::uint8_t*>(frame.pixels().data());
  return pnm_bytes("P6\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n",
                   {raw, frame.size() * 3});
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& gray) {
  return pnm_bytes("P5\n" + std::to_string(gray.width()) + " " + std::to_string(gray.height()) + "\n255\n",
                   gray.pixels());
}

std::vector<std::uint8_t> encode_pgm(const BinaryImage& bits) {
  std::vector<std::uint8_t> raster(bits.size());
  std::transform(bits.pixels().begin(), bits.pixels().end(), raster.begin(),
                 [](std::uint8_t b) -> std::uint8_t { return b ? 0 : 255; });
  return pnm_bytes("P5\n" + std::to_string(bits.width()) + " " + std::to_string(bits.height()) + "\n255\n",
                   raster);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

Frame load_frame(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  throw Error(ErrorCode::kParse, "unrecognized image format: " + path.string());
}

void save_frame(const std::filesystem::path& path, const Frame& frame) {
  if (path.extension() == ".ppm") {
    write_file(path, encode_ppm(frame));
  } else {
    write_file(path, encode_png(frame));
  }
}

}  // namespace stereomark
