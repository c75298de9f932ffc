#pragma once

#include "bcomp/common.hpp"

#include <filesystem>

namespace bcomp::png {

// Thin libpng wrappers. Readers throw IoError on unreadable files or when the
// stored bit depth / channel layout does not match the requested image type.

[[nodiscard]] Image<std::uint16_t> read_gray16(const std::filesystem::path& file);
[[nodiscard]] Image<std::uint8_t> read_gray8(const std::filesystem::path& file);
[[nodiscard]] Image<Rgb> read_rgb8(const std::filesystem::path& file);

void write_gray16(const std::filesystem::path& file, const Image<std::uint16_t>& image);
void write_gray8(const std::filesystem::path& file, const Image<std::uint8_t>& image);
void write_rgb8(const std::filesystem::path& file, const Image<Rgb>& image);

}  // namespace bcomp::png
