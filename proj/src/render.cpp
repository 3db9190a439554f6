#include "wildannot/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <png.h>

#include "wildannot/error.hpp"

namespace wildannot {
namespace {

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint16_t> samples;  // row-major, interleaved
};

void png_error_handler(png_structp, png_const_charp msg) { throw ParseError(std::string("PNG: ") + msg); }
void png_warning_handler(png_structp, png_const_charp) {}

std::vector<std::uint8_t> write_png16(const PngImage& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                            png_warning_handler);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * img.channels * 2);
  try {
    if (!info) throw IoError("png_create_info_struct failed");
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t len) {
          auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
          buf->insert(buf->end(), data, data + len);
        },
        nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 16,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 3);
    png_write_info(png, info);
    const std::size_t per_row = static_cast<std::size_t>(img.width) * img.channels;
    for (int r = 0; r < img.height; ++r) {
      const std::uint16_t* src = img.samples.data() + static_cast<std::size_t>(r) * per_row;
      for (std::size_t k = 0; k < per_row; ++k) {
        row[2 * k] = static_cast<std::uint8_t>(src[k] >> 8);
        row[2 * k + 1] = static_cast<std::uint8_t>(src[k] & 0xff);
      }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

PngImage read_png16(std::span<const std::uint8_t> bytes, int expected_channels) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw ParseError("not a PNG image");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                           png_warning_handler);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Cursor {
    std::span<const std::uint8_t> data;
    std::size_t at = 0;
  } cursor{bytes, 0};
  PngImage img;
  try {
    if (!info) throw IoError("png_create_info_struct failed");
    png_set_read_fn(png, &cursor, [](png_structp p, png_bytep out, png_size_t len) {
      auto* c = static_cast<Cursor*>(png_get_io_ptr(p));
      if (c->at + len > c->data.size()) png_error(p, "truncated data");
      std::memcpy(out, c->data.data() + c->at, len);
      c->at += len;
    });
    png_read_info(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    const int channels = color == PNG_COLOR_TYPE_GRAY ? 1 : color == PNG_COLOR_TYPE_RGB ? 3 : 0;
    if (depth != 16 || channels != expected_channels) {
      throw ParseError("expected a 16-bit " + std::string(expected_channels == 1 ? "gray" : "RGB") +
                       " PNG");
    }
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.channels = channels;
    const std::size_t per_row = static_cast<std::size_t>(img.width) * channels;
    img.samples.resize(per_row * img.height);
    std::vector<std::uint8_t> row(per_row * 2);
    for (int r = 0; r < img.height; ++r) {
      png_read_row(png, row.data(), nullptr);
      std::uint16_t* dst = img.samples.data() + static_cast<std::size_t>(r) * per_row;
      for (std::size_t k = 0; k < per_row; ++k) {
        dst[k] = static_cast<std::uint16_t>((row[2 * k] << 8) | row[2 * k + 1]);
      }
    }
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

DepthFrame::DepthFrame(int w, int h)
    : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0f),
      valid(static_cast<std::size_t>(w) * h, 0) {}

std::size_t DepthFrame::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v ? 1 : 0;
  return n;
}

NormalFrame::NormalFrame(int w, int h)
    : width(w), height(h), normal(static_cast<std::size_t>(w) * h, Eigen::Vector3f::Zero()),
      valid(static_cast<std::size_t>(w) * h, 0) {}

RenderedFrame render_frame(const PointCloudMap& map, const NormalEstimate& normals,
                           const Pose& camera_pose, const CameraRig& rig, const VisibleSet& vis) {
  RenderedFrame out{DepthFrame(rig.width, rig.height), NormalFrame(rig.width, rig.height)};
  out.depth.timestamp = camera_pose.timestamp();
  out.depth.pose = camera_pose;
  std::vector<double> zbuf(out.depth.depth.size(), std::numeric_limits<double>::infinity());
  const Eigen::Matrix3d world_to_cam = camera_pose.rotation_matrix().transpose();
  const Eigen::Vector3d cam = camera_pose.translation();

  for (PointIndex i : vis.indices) {
    const Eigen::Vector3d p_cam = camera_pose.apply_inverse(map.point(i));
    const Projection pr = project_point(p_cam, rig);
    if (!pr.in_image()) continue;
    const int col = static_cast<int>(std::floor(pr.u));
    const int row = static_cast<int>(std::floor(pr.v));
    const std::size_t k = out.depth.index(row, col);
    // Ascending indices: strict < keeps the lower index on ties.
    if (!(pr.depth < zbuf[k])) continue;
    zbuf[k] = pr.depth;

    Eigen::Vector3d n;
    const Eigen::Vector3d to_cam = cam - map.point(i);
    if (i < normals.size() && normals.is_valid(i)) {
      n = normals.normals[i];
      if (!normals.oriented && n.dot(to_cam) < 0.0) n = -n;
    } else {
      n = to_cam.normalized();
    }
    out.depth.depth[k] = static_cast<float>(pr.depth);
    out.depth.valid[k] = 1;
    out.normal.normal[k] = (world_to_cam * n).normalized().cast<float>();
    out.normal.valid[k] = 1;
  }
  return out;
}

std::vector<std::uint8_t> encode_depth(const DepthFrame& frame) {
  PngImage img{frame.width, frame.height, 1, {}};
  img.samples.assign(frame.depth.size(), 0);
  for (std::size_t k = 0; k < frame.depth.size(); ++k) {
    if (!frame.valid[k]) continue;
    const double q = std::round(static_cast<double>(frame.depth[k]) * 256.0);
    if (!(q >= 1.0 && q <= 65535.0)) {
      throw RangeError("depth " + std::to_string(frame.depth[k]) +
                       " m is outside the encodable range (0, 256)");
    }
    img.samples[k] = static_cast<std::uint16_t>(q);
  }
  return write_png16(img);
}

DepthFrame decode_depth(std::span<const std::uint8_t> png) {
  const PngImage img = read_png16(png, 1);
  DepthFrame frame(img.width, img.height);
  for (std::size_t k = 0; k < img.samples.size(); ++k) {
    if (img.samples[k] == 0) continue;
    frame.depth[k] = static_cast<float>(img.samples[k] / 256.0);
    frame.valid[k] = 1;
  }
  return frame;
}

std::vector<std::uint8_t> encode_normals(const NormalFrame& frame) {
  PngImage img{frame.width, frame.height, 3, {}};
  img.samples.assign(frame.normal.size() * 3, 0);
  for (std::size_t k = 0; k < frame.normal.size(); ++k) {
    if (!frame.valid[k]) continue;
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp((static_cast<double>(frame.normal[k][c]) + 1.0) / 2.0, 0.0, 1.0);
      img.samples[3 * k + c] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
  }
  return write_png16(img);
}

NormalFrame decode_normals(std::span<const std::uint8_t> png) {
  const PngImage img = read_png16(png, 3);
  NormalFrame frame(img.width, img.height);
  for (std::size_t k = 0; k < frame.normal.size(); ++k) {
    const std::uint16_t* s = &img.samples[3 * k];
    if (s[0] == 0 && s[1] == 0 && s[2] == 0) continue;
    for (int c = 0; c < 3; ++c) frame.normal[k][c] = static_cast<float>(s[c] / 65535.0 * 2.0 - 1.0);
    frame.valid[k] = 1;
  }
  return frame;
}

}  // namespace wildannot
