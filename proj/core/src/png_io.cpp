#include "openpixel/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace openpixel {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

}  // namespace

ImageU8 read_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw std::runtime_error("cannot open PNG '" + path + "'");

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw std::runtime_error("'" + path + "' is not a PNG file");

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw std::runtime_error("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw std::runtime_error("libpng info init failed");
    if (setjmp(png_jmpbuf(r.png)))
        throw std::runtime_error("libpng failed to decode '" + path + "'");

    png_init_io(r.png, file.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const png_uint_32 width = png_get_image_width(r.png, r.info);
    const png_uint_32 height = png_get_image_height(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);

    if (bit_depth == 16)
        throw std::runtime_error("'" + path + "' is 16-bit; only 8-bit PNGs are supported");
    if ((color_type & PNG_COLOR_MASK_ALPHA) != 0 ||
        png_get_valid(r.png, r.info, PNG_INFO_tRNS))
        throw std::runtime_error("'" + path + "' has an alpha channel; expected plain RGB or gray");

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    png_set_packing(r.png);
    png_read_update_info(r.png, r.info);

    const int channels = png_get_channels(r.png, r.info);
    if (channels != 1 && channels != 3)
        throw std::runtime_error("'" + path + "' decodes to " + std::to_string(channels) +
                                 " channels; expected 1 or 3");

    ImageU8 image(static_cast<int64_t>(height), static_cast<int64_t>(width), channels);
    const size_t row_bytes = png_get_rowbytes(r.png, r.info);
    if (row_bytes != static_cast<size_t>(image.w * image.c))
        throw std::runtime_error("'" + path + "' has unexpected row stride");
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = image.data.data() + static_cast<size_t>(y) * row_bytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return image;
}

namespace {

void write_png(const ImageU8& image, const std::string& path, int color_type) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw std::runtime_error("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw std::runtime_error("libpng info init failed");
    if (setjmp(png_jmpbuf(w.png)))
        throw std::runtime_error("libpng failed to encode '" + path + "'");

    png_init_io(w.png, file.get());
    png_set_compression_level(w.png, 6);
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(image.w),
                 static_cast<png_uint_32>(image.h), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_const_bytep> rows(static_cast<size_t>(image.h));
    for (int64_t y = 0; y < image.h; ++y)
        rows[static_cast<size_t>(y)] = image.data.data() + y * image.w * image.c;
    png_write_rows(w.png, const_cast<png_bytepp>(rows.data()),
                   static_cast<png_uint_32>(image.h));
    png_write_end(w.png, w.info);
}

}  // namespace

void write_png_rgb8(const ImageU8& image, const std::string& path) {
    if (image.c != 3)
        throw std::invalid_argument("write_png_rgb8: image has " + std::to_string(image.c) +
                                    " channels");
    write_png(image, path, PNG_COLOR_TYPE_RGB);
}

void write_png_gray8(const ImageU8& image, const std::string& path) {
    if (image.c != 1)
        throw std::invalid_argument("write_png_gray8: image has " + std::to_string(image.c) +
                                    " channels");
    write_png(image, path, PNG_COLOR_TYPE_GRAY);
}

}  // namespace openpixel
