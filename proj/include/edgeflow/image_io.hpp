#pragma once

#include <cctype>
#include <cstdio>
#include <csetjmp>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "edgeflow/error.hpp"
#include "edgeflow/image.hpp"

namespace edgeflow {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DecodeError("cannot open file: " + path);
    return f;
}

inline void jpeg_error_throw(j_common_ptr cinfo) {
    char msg[JMSG_LENGTH_MAX];
    (*cinfo->err->format_message)(cinfo, msg);
    throw DecodeError(std::string("jpeg: ") + msg);
}

inline RasterImage load_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DecodeError("png: failed to allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("png: failed to allocate info struct");
    }
    RasterImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("png: decode failed for " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);

    // Normalize every variant onto Gray8 / RGB8 / RGBA8.
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
    if (has_trns) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA ||
        (color_type == PNG_COLOR_TYPE_GRAY && has_trns))
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    color_type = png_get_color_type(png, info);
    switch (color_type) {
        case PNG_COLOR_TYPE_GRAY: img.channels = Channels::Gray8; break;
        case PNG_COLOR_TYPE_RGB: img.channels = Channels::RGB8; break;
        case PNG_COLOR_TYPE_RGB_ALPHA: img.channels = Channels::RGBA8; break;
        default:
            png_destroy_read_struct(&png, &info, nullptr);
            throw DecodeError("png: unsupported color type in " + path);
    }
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.data.resize(img.pixel_count() * channel_count(img.channels));
    rows.resize(h);
    const std::size_t stride = static_cast<std::size_t>(img.width) * channel_count(img.channels);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.data.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    img.check_valid();
    return img;
}

inline RasterImage load_jpeg(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    jpeg_decompress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jerr.error_exit = jpeg_error_throw;
    jpeg_create_decompress(&cinfo);
    try {
        jpeg_stdio_src(&cinfo, f.get());
        jpeg_read_header(&cinfo, TRUE);
        cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
        jpeg_start_decompress(&cinfo);

        RasterImage img;
        img.width = static_cast<int>(cinfo.output_width);
        img.height = static_cast<int>(cinfo.output_height);
        img.channels = cinfo.output_components == 1 ? Channels::Gray8 : Channels::RGB8;
        img.data.resize(img.pixel_count() * channel_count(img.channels));
        const std::size_t stride =
            static_cast<std::size_t>(img.width) * channel_count(img.channels);
        while (cinfo.output_scanline < cinfo.output_height) {
            JSAMPROW row = img.data.data() + cinfo.output_scanline * stride;
            jpeg_read_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_decompress(&cinfo);
        jpeg_destroy_decompress(&cinfo);
        img.check_valid();
        return img;
    } catch (...) {
        jpeg_destroy_decompress(&cinfo);
        throw;
    }
}

inline bool has_suffix_ci(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    for (std::size_t i = 0; i < suffix.size(); ++i) {
        char a = s[s.size() - suffix.size() + i];
        char b = suffix[i];
        if (std::tolower(static_cast<unsigned char>(a)) != b) return false;
    }
    return true;
}

}  // namespace detail

/// Loads a PNG or JPEG file, dispatching on the magic bytes (extension as fallback).
inline RasterImage load_image(const std::string& path) {
    {
        detail::FilePtr f = detail::open_file(path, "rb");
        unsigned char magic[4] = {0, 0, 0, 0};
        std::size_t n = std::fread(magic, 1, sizeof(magic), f.get());
        if (n >= 4 && magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
            return detail::load_png(path);
        if (n >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) return detail::load_jpeg(path);
    }
    if (detail::has_suffix_ci(path, ".png")) return detail::load_png(path);
    if (detail::has_suffix_ci(path, ".jpg") || detail::has_suffix_ci(path, ".jpeg"))
        return detail::load_jpeg(path);
    throw DecodeError("unrecognized image format: " + path);
}

/// Writes 8-bit PNG. Gray, RGB, and RGBA buffers are written as-is, so a
/// round-trip through save/load reproduces the exact byte content.
inline void save_png(const std::string& path, int width, int height, Channels channels,
                     const std::uint8_t* data) {
    detail::FilePtr f = detail::open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DecodeError("png: failed to allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DecodeError("png: failed to allocate info struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DecodeError("png: encode failed for " + path);
    }
    int color_type = PNG_COLOR_TYPE_GRAY;
    if (channels == Channels::RGB8) color_type = PNG_COLOR_TYPE_RGB;
    if (channels == Channels::RGBA8) color_type = PNG_COLOR_TYPE_RGB_ALPHA;
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channel_count(channels);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(data + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

/// PNG-encodes into memory; same byte layout rules as save_png.
inline std::vector<std::uint8_t> encode_png(int width, int height, Channels channels,
                                            const std::uint8_t* data) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DecodeError("png: failed to allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DecodeError("png: failed to allocate info struct");
    }
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DecodeError("png: in-memory encode failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep bytes, png_size_t n) {
            auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            buf->insert(buf->end(), bytes, bytes + n);
        },
        [](png_structp) {});
    int color_type = PNG_COLOR_TYPE_GRAY;
    if (channels == Channels::RGB8) color_type = PNG_COLOR_TYPE_RGB;
    if (channels == Channels::RGBA8) color_type = PNG_COLOR_TYPE_RGB_ALPHA;
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channel_count(channels);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(data + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

inline std::vector<std::uint8_t> encode_png(const RasterImage& img) {
    img.check_valid();
    return encode_png(img.width, img.height, img.channels, img.data.data());
}

inline std::vector<std::uint8_t> encode_png(const EdgeMap& edges) {
    return encode_png(edges.width, edges.height, Channels::Gray8, edges.data.data());
}

inline void save_png(const std::string& path, const RasterImage& img) {
    img.check_valid();
    save_png(path, img.width, img.height, img.channels, img.data.data());
}

inline void save_png(const std::string& path, const EdgeMap& edges) {
    save_png(path, edges.width, edges.height, Channels::Gray8, edges.data.data());
}

inline EdgeMap load_edge_map(const std::string& path) {
    RasterImage img = detail::load_png(path);
    if (img.channels != Channels::Gray8)
        throw DecodeError("edge map must be single-channel: " + path);
    EdgeMap e;
    e.width = img.width;
    e.height = img.height;
    e.data = std::move(img.data);
    return e;
}

}  // namespace edgeflow
