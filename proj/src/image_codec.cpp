// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/image_codec.hpp"

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace gt360::io {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

std::string lower_ext(const std::string& path) {
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

// ------------------------------------------------------------------- PPM (P6)

FrameImage load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodecError("ppm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw CodecError("ppm: not a P6 file: " + path);
  auto next_int = [&in, &path]() {
    int v;
    // skip whitespace and '#' comments
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    if (!(in >> v)) throw CodecError("ppm: truncated header in " + path);
    return v;
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (maxval != 255) throw CodecError("ppm: only maxval 255 supported");
  in.get();  // single whitespace after maxval
  FrameImage img(w, h);
  in.read(reinterpret_cast<char*>(img.data()),
          static_cast<std::streamsize>(img.byte_size()));
  if (in.gcount() != static_cast<std::streamsize>(img.byte_size()))
    throw CodecError("ppm: truncated pixel data in " + path);
  return img;
}

// --------------------------------------------------------------------- PNG

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

FrameImage load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw CodecError("png: cannot open " + path);
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw CodecError("png: init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw CodecError("png: info init failed");
  if (setjmp(png_jmpbuf(g.png)))
    throw CodecError("png: decode failed for " + path);
  png_init_io(g.png, fp.get());
  png_read_info(g.png, g.info);

  png_uint_32 w, h;
  int bit_depth, color_type;
  png_get_IHDR(g.png, g.info, &w, &h, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);
  // Normalize everything to 8-bit RGB.
  if (bit_depth == 16) png_set_strip_16(g.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(g.png);
  if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(g.png);
  png_set_strip_alpha(g.png);
  png_read_update_info(g.png, g.info);

  FrameImage img(static_cast<int>(w), static_cast<int>(h));
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = img.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(g.png, rows.data());
  png_read_end(g.png, nullptr);
  return img;
}

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// --------------------------------------------------------------------- JPEG

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

FrameImage load_jpeg(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw CodecError("jpeg: cannot open " + path);
  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw CodecError("jpeg: decode failed for " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  FrameImage img(static_cast<int>(cinfo.output_width),
                 static_cast<int>(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.data() +
                   static_cast<size_t>(cinfo.output_scanline) * img.width() * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

}  // namespace

void save_png(const FrameImage& img, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw CodecError("png: cannot open for writing: " + path);
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw CodecError("png: init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw CodecError("png: info init failed");
  if (setjmp(png_jmpbuf(g.png)))
    throw CodecError("png: encode failed for " + path);
  png_init_io(g.png, fp.get());
  png_set_IHDR(g.png, g.info, img.width(), img.height(), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  for (int y = 0; y < img.height(); ++y)
    png_write_row(g.png, const_cast<png_bytep>(
                             img.data() + static_cast<size_t>(y) * img.width() * 3));
  png_write_end(g.png, nullptr);
}

void save_ppm(const FrameImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CodecError("ppm: cannot open for writing: " + path);
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()),
            static_cast<std::streamsize>(img.byte_size()));
}

FrameImage load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw CodecError("cannot open image: " + path);
  unsigned char magic[8] = {0};
  probe.read(reinterpret_cast<char*>(magic), 8);
  probe.close();
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (std::memcmp(magic, png_sig, 8) == 0) return load_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8) return load_jpeg(path);
  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
  throw CodecError("unsupported image format: " + path);
}

void save_image(const FrameImage& img, const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return save_png(img, path);
  if (ext == "ppm") return save_ppm(img, path);
  throw CodecError("unsupported output image format '." + ext + "': " + path);
}

bool codec_supported(const std::string& path) {
  const std::string ext = lower_ext(path);
  return ext == "png" || ext == "jpg" || ext == "jpeg" || ext == "ppm";
}

}  // namespace gt360::io
