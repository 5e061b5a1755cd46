#include "dep/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dep {

namespace {

void require_image(const Tensor& img, const char* op) {
  if (img.rank() != 3)
    throw DimensionError(std::string(op) + ": expected [C,H,W] image, got " + shape_str(img.shape()));
}

}  // namespace

Tensor resize_bilinear(const Tensor& img, Index out_h, Index out_w) {
  require_image(img, "resize_bilinear");
  if (out_h < 1 || out_w < 1) throw ParameterError("resize_bilinear: output dims must be positive");
  const Index C = img.dim(0), H = img.dim(1), W = img.dim(2);
  if (out_h == H && out_w == W) return img;
  Tensor out({C, out_h, out_w});
  const double sy = static_cast<double>(H) / static_cast<double>(out_h);
  const double sx = static_cast<double>(W) / static_cast<double>(out_w);
  for (Index y = 0; y < out_h; ++y) {
    double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(H - 1));
    const Index y0 = static_cast<Index>(fy);
    const Index y1 = std::min(y0 + 1, H - 1);
    const double wy = fy - static_cast<double>(y0);
    for (Index x = 0; x < out_w; ++x) {
      double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(W - 1));
      const Index x0 = static_cast<Index>(fx);
      const Index x1 = std::min(x0 + 1, W - 1);
      const double wx = fx - static_cast<double>(x0);
      for (Index c = 0; c < C; ++c) {
        const double* p = img.data() + c * H * W;
        const double v = (1 - wy) * ((1 - wx) * p[y0 * W + x0] + wx * p[y0 * W + x1]) +
                         wy * ((1 - wx) * p[y1 * W + x0] + wx * p[y1 * W + x1]);
        out.data()[(c * out_h + y) * out_w + x] = v;
      }
    }
  }
  return out;
}

Tensor resize_short_edge(const Tensor& img, Index target) {
  require_image(img, "resize_short_edge");
  const Index H = img.dim(1), W = img.dim(2);
  if (H <= W) {
    const Index w = std::max<Index>(1, (W * target + H / 2) / H);
    return resize_bilinear(img, target, w);
  }
  const Index h = std::max<Index>(1, (H * target + W / 2) / W);
  return resize_bilinear(img, h, target);
}

Tensor crop(const Tensor& img, Index top, Index left, Index h, Index w) {
  require_image(img, "crop");
  const Index C = img.dim(0), H = img.dim(1), W = img.dim(2);
  if (top < 0 || left < 0 || top + h > H || left + w > W)
    throw DimensionError("crop: window out of bounds for " + shape_str(img.shape()));
  Tensor out({C, h, w});
  for (Index c = 0; c < C; ++c)
    for (Index y = 0; y < h; ++y) {
      const double* src = img.data() + (c * H + top + y) * W + left;
      double* dst = out.data() + (c * h + y) * w;
      std::copy(src, src + w, dst);
    }
  return out;
}

Tensor center_crop_pad(const Tensor& img, Index size) {
  require_image(img, "center_crop_pad");
  const Index C = img.dim(0), H = img.dim(1), W = img.dim(2);
  if (H >= size && W >= size) return crop(img, (H - size) / 2, (W - size) / 2, size, size);
  Tensor padded({C, std::max(H, size), std::max(W, size)});
  const Index pt = H < size ? (size - H) / 2 : 0;
  const Index pl = W < size ? (size - W) / 2 : 0;
  for (Index c = 0; c < C; ++c)
    for (Index y = 0; y < H; ++y) {
      const double* src = img.data() + (c * H + y) * W;
      double* dst = padded.data() + (c * padded.dim(1) + pt + y) * padded.dim(2) + pl;
      std::copy(src, src + W, dst);
    }
  return crop(padded, (padded.dim(1) - size) / 2, (padded.dim(2) - size) / 2, size, size);
}

Tensor hflip(const Tensor& img) {
  require_image(img, "hflip");
  const Index C = img.dim(0), H = img.dim(1), W = img.dim(2);
  Tensor out({C, H, W});
  for (Index c = 0; c < C; ++c)
    for (Index y = 0; y < H; ++y) {
      const double* src = img.data() + (c * H + y) * W;
      double* dst = out.data() + (c * H + y) * W;
      for (Index x = 0; x < W; ++x) dst[x] = src[W - 1 - x];
    }
  return out;
}

void write_ppm(const std::filesystem::path& path, const Tensor& img) {
  require_image(img, "write_ppm");
  if (img.dim(0) != 3) throw DimensionError("write_ppm: expected 3 channels, got " + shape_str(img.shape()));
  const Index H = img.dim(1), W = img.dim(2);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("write_ppm: cannot open " + path.string());
  f << "P6\n" << W << " " << H << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(W) * 3);
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x)
      for (Index c = 0; c < 3; ++c) {
        const double v = std::clamp(img.data()[(c * H + y) * W + x], 0.0, 1.0);
        row[static_cast<std::size_t>(x * 3 + c)] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw FormatError("write_ppm: write failed for " + path.string());
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("read_ppm: cannot open " + path.string());
  std::string magic;
  f >> magic;
  if (magic != "P6") throw FormatError("read_ppm: bad magic '" + magic + "' in " + path.string());
  auto next_int = [&]() {
    // skip whitespace and # comments
    int c = f.peek();
    while (c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '#') {
      if (c == '#') f.ignore(1 << 20, '\n');
      else f.get();
      c = f.peek();
    }
    long v = -1;
    f >> v;
    if (!f || v < 0) throw FormatError("read_ppm: malformed header in " + path.string());
    return static_cast<Index>(v);
  };
  const Index W = next_int();
  const Index H = next_int();
  const Index maxval = next_int();
  if (maxval != 255) throw FormatError("read_ppm: unsupported maxval " + std::to_string(maxval));
  f.get();  // single whitespace after header
  std::vector<unsigned char> buf(static_cast<std::size_t>(W * H * 3));
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (f.gcount() != static_cast<std::streamsize>(buf.size()))
    throw FormatError("read_ppm: truncated pixel data in " + path.string());
  Tensor img({3, H, W});
  for (Index y = 0; y < H; ++y)
    for (Index x = 0; x < W; ++x)
      for (Index c = 0; c < 3; ++c)
        img.data()[(c * H + y) * W + x] =
            static_cast<double>(buf[static_cast<std::size_t>((y * W + x) * 3 + c)]) / 255.0;
  return img;
}

}  // namespace dep
