// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_IMAGE_OPS_HPP
#define GT360_IMAGE_OPS_HPP

#include "gt360/tensor.hpp"
#include "gt360/types.hpp"

namespace gt360 {

FrameImage resize_bilinear(const FrameImage& img, int out_width, int out_height);

// [H,W,3] tensor with values mapped from [0,255] to [-1,1].
nn::Tensor image_to_tensor(const FrameImage& img);

}  // namespace gt360

#endif  // GT360_IMAGE_OPS_HPP
