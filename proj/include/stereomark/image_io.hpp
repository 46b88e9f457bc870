#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stereomark/image.hpp"

namespace stereomark {

// PNG codec. Gray and gray+alpha inputs are expanded to RGB, alpha dropped.
Frame decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Frame& frame);
std::vector<std::uint8_t> encode_png(const GrayImage& gray);

// Binary PPM (P6, maxval 255) and PGM (P5).
Frame decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Frame& frame);
std::vector<std::uint8_t> encode_pgm(const GrayImage& gray);
// Debug dump of a bitmap, dark = 0, light = 255.
std::vector<std::uint8_t> encode_pgm(const BinaryImage& bits);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Dispatches on magic bytes (PNG signature or "P6").
Frame load_frame(const std::filesystem::path& path);
// Dispatches on extension: .ppm writes P6, anything else PNG.
void save_frame(const std::filesystem::path& path, const Frame& frame);

}  // namespace stereomark
