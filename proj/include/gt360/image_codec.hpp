// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_IMAGE_CODEC_HPP
#define GT360_IMAGE_CODEC_HPP

#include <string>

#include "gt360/types.hpp"

namespace gt360::io {

// Codec selection is by file content for decoding (magic bytes) and by
// extension for encoding. Supported: PNG, JPEG (decode only), PPM (P6).
FrameImage load_image(const std::string& path);
void save_image(const FrameImage& img, const std::string& path);

bool codec_supported(const std::string& path);

void save_png(const FrameImage& img, const std::string& path);
void save_ppm(const FrameImage& img, const std::string& path);

}  // namespace gt360::io

#endif  // GT360_IMAGE_CODEC_HPP
