#pragma once

#include <filesystem>

#include "dep/tensor.hpp"

namespace dep {

// Images are [C,H,W] tensors with values in [0,1] until standardization.

Tensor resize_bilinear(const Tensor& img, Index out_h, Index out_w);
// Resize so the short edge equals `target`, preserving aspect ratio.
Tensor resize_short_edge(const Tensor& img, Index target);
// Center crop to size x size; zero-pads symmetrically when the image is smaller.
Tensor center_crop_pad(const Tensor& img, Index size);
Tensor crop(const Tensor& img, Index top, Index left, Index h, Index w);
Tensor hflip(const Tensor& img);

void write_ppm(const std::filesystem::path& path, const Tensor& img);
Tensor read_ppm(const std::filesystem::path& path);

}  // namespace dep
