#include "bcomp/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

namespace bcomp::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Decoded image state lives outside the setjmp frame so it stays valid when
// libpng longjmps back on error.
struct Decoded {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  std::string error;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* out = static_cast<Decoded*>(png_get_error_ptr(png));
  if (out != nullptr) out->error = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

bool decode(std::FILE* fp, Decoded* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, out, on_png_error, on_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->color_type = png_get_color_type(png, info);
  if (out->color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    out->color_type = PNG_COLOR_TYPE_RGB;
    out->bit_depth = 8;
  }
  if (out->color_type == PNG_COLOR_TYPE_GRAY && out->bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    out->bit_depth = 8;
  }
  if (out->bit_depth == 16) png_set_swap(png);  // host order is little-endian
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out->pixels.resize(row_bytes * out->height);
  out->rows.resize(out->height);
  for (png_uint_32 y = 0; y < out->height; ++y) out->rows[y] = out->pixels.data() + y * row_bytes;
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Decoded read_file(const std::filesystem::path& file) {
  FilePtr fp(std::fopen(file.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + file.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError("not a PNG file: " + file.string());
  std::rewind(fp.get());
  Decoded out;
  if (!decode(fp.get(), &out)) throw IoError("failed to decode " + file.string() + ": " + out.error);
  return out;
}

struct EncodeJob {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  int color_type = PNG_COLOR_TYPE_GRAY;
  std::vector<png_bytep> rows;
  std::string error;
};

void on_png_write_error(png_structp png, png_const_charp msg) {
  auto* job = static_cast<EncodeJob*>(png_get_error_ptr(png));
  if (job != nullptr) job->error = msg;
  png_longjmp(png, 1);
}

bool encode(std::FILE* fp, EncodeJob* job) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, job, on_png_write_error, on_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 1);
  png_set_IHDR(png, info, static_cast<png_uint_32>(job->width), static_cast<png_uint_32>(job->height),
               job->bit_depth, job->color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (job->bit_depth == 16) png_set_swap(png);
  png_write_image(png, job->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

template <typename T>
void write_file(const std::filesystem::path& file, const Image<T>& image, int bit_depth, int color_type) {
  if (image.width() == 0 || image.height() == 0) throw IoError("refusing to write empty image " + file.string());
  FilePtr fp(std::fopen(file.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + file.string());
  EncodeJob job;
  job.width = image.width();
  job.height = image.height();
  job.bit_depth = bit_depth;
  job.color_type = color_type;
  // libpng only reads through these pointers.
  auto* base = reinterpret_cast<unsigned char*>(const_cast<T*>(image.data().data()));
  const std::size_t row_bytes = sizeof(T) * static_cast<std::size_t>(image.width());
  job.rows.resize(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) job.rows[static_cast<std::size_t>(y)] = base + y * row_bytes;
  if (!encode(fp.get(), &job)) throw IoError("failed to encode " + file.string() + ": " + job.error);
  if (std::fflush(fp.get()) != 0) throw IoError("failed to flush " + file.string());
}

void require(const Decoded& d, int bit_depth, int color_type, const std::filesystem::path& file) {
  if (d.bit_depth != bit_depth || d.color_type != color_type)
    throw IoError("unexpected PNG layout in " + file.string() + " (bit depth " + std::to_string(d.bit_depth) +
                  ", color type " + std::to_string(d.color_type) + ")");
}

}  // namespace

Image<std::uint16_t> read_gray16(const std::filesystem::path& file) {
  const Decoded d = read_file(file);
  require(d, 16, PNG_COLOR_TYPE_GRAY, file);
  Image<std::uint16_t> img(static_cast<int>(d.width), static_cast<int>(d.height));
  std::memcpy(img.data().data(), d.pixels.data(), img.size() * sizeof(std::uint16_t));
  return img;
}

Image<std::uint8_t> read_gray8(const std::filesystem::path& file) {
  const Decoded d = read_file(file);
  require(d, 8, PNG_COLOR_TYPE_GRAY, file);
  Image<std::uint8_t> img(static_cast<int>(d.width), static_cast<int>(d.height));
  std::memcpy(img.data().data(), d.pixels.data(), img.size());
  return img;
}

Image<Rgb> read_rgb8(const std::filesystem::path& file) {
  const Decoded d = read_file(file);
  if (d.bit_depth != 8 || (d.color_type != PNG_COLOR_TYPE_RGB && d.color_type != PNG_COLOR_TYPE_RGB_ALPHA))
    require(d, 8, PNG_COLOR_TYPE_RGB, file);
  const int channels = d.color_type == PNG_COLOR_TYPE_RGB ? 3 : 4;
  Image<Rgb> img(static_cast<int>(d.width), static_cast<int>(d.height));
  for (std::size_t i = 0; i < img.size(); ++i) {
    const unsigned char* px = d.pixels.data() + i * static_cast<std::size_t>(channels);
    img.data()[i] = Rgb{px[0], px[1], px[2]};
  }
  return img;
}

void write_gray16(const std::filesystem::path& file, const Image<std::uint16_t>& image) {
  write_file(file, image, 16, PNG_COLOR_TYPE_GRAY);
}

void write_gray8(const std::filesystem::path& file, const Image<std::uint8_t>& image) {
  write_file(file, image, 8, PNG_COLOR_TYPE_GRAY);
}

void write_rgb8(const std::filesystem::path& file, const Image<Rgb>& image) {
  static_assert(sizeof(Rgb) == 3);
  write_file(file, image, 8, PNG_COLOR_TYPE_RGB);
}

}  // namespace bcomp::png
