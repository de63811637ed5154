#include "smikm/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "smikm/error.hpp"

namespace smikm {

namespace {

bool looks_like_png(std::span<const std::uint8_t> b) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool looks_like_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
}

ImageBuf decode_png(std::span<const std::uint8_t> bytes) {
  png_image pim;
  std::memset(&pim, 0, sizeof(pim));
  pim.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&pim, bytes.data(), bytes.size()))
    throw DecodeError(std::string("png: ") + pim.message);

  const int channels = PNG_IMAGE_SAMPLE_CHANNELS(pim.format) >= 3 ? 3 : 1;
  pim.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  ImageBuf img(static_cast<int>(pim.width), static_cast<int>(pim.height), channels);
  if (!png_image_finish_read(&pim, nullptr, img.data.data(), 0, nullptr)) {
    std::string msg = pim.message;
    png_image_free(&pim);
    throw DecodeError("png: " + msg);
  }
  return img;
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

ImageBuf decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;

  ImageBuf img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("jpeg: ") + err.message);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), bytes.size());
  jpeg_read_header(&cinfo, TRUE);

  cinfo.out_color_space = cinfo.jpeg_color_space == JCS_GRAYSCALE ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int channels = cinfo.output_components;
  if (channels != 1 && channels != 3) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError("jpeg: unsupported component count");
  }
  img = ImageBuf(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height), channels);
  const size_t stride = static_cast<size_t>(img.width) * channels;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.data.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

}  // namespace

ImageBuf decode_image(std::span<const std::uint8_t> bytes) {
  if (looks_like_png(bytes)) return decode_png(bytes);
  if (looks_like_jpeg(bytes)) return decode_jpeg(bytes);
  throw DecodeError("not a PNG or JPEG file");
}

ImageBuf load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const ImageBuf& img) {
  if (img.channels != 1 && img.channels != 3)
    throw ChannelError("encode_png expects 1 or 3 channels");
  png_image pim;
  std::memset(&pim, 0, sizeof(pim));
  pim.version = PNG_IMAGE_VERSION;
  pim.width = static_cast<png_uint_32>(img.width);
  pim.height = static_cast<png_uint_32>(img.height);
  pim.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&pim, nullptr, &size, 0, img.data.data(), 0, nullptr))
    throw IoError(std::string("png encode: ") + pim.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&pim, out.data(), &size, 0, img.data.data(), 0, nullptr))
    throw IoError(std::string("png encode: ") + pim.message);
  out.resize(size);
  return out;
}

void save_png(const ImageBuf& img, const std::string& path) {
  auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

HsvImage rgb_to_hsv(const ImageBuf& img) {
  if (img.channels != 3) throw ChannelError("rgb_to_hsv expects 3 channels");
  HsvImage out;
  out.width = img.width;
  out.height = img.height;
  const size_t n = static_cast<size_t>(img.width) * img.height;
  out.h.resize(n);
  out.s.resize(n);
  out.v.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const float r = img.data[i * 3 + 0] / 255.0f;
    const float g = img.data[i * 3 + 1] / 255.0f;
    const float b = img.data[i * 3 + 2] / 255.0f;
    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    const float d = mx - mn;
    float h = 0.0f;
    if (d > 0.0f) {
      if (mx == r)
        h = (g - b) / d;
      else if (mx == g)
        h = 2.0f + (b - r) / d;
      else
        h = 4.0f + (r - g) / d;
      h /= 6.0f;
      if (h < 0.0f) h += 1.0f;
    }
    out.h[i] = h;
    out.s[i] = mx > 0.0f ? d / mx : 0.0f;
    out.v[i] = mx;
  }
  return out;
}

ImageBuf to_grayscale(const ImageBuf& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw ChannelError("to_grayscale expects 1 or 3 channels");
  ImageBuf out(img.width, img.height, 1);
  const size_t n = static_cast<size_t>(img.width) * img.height;
  for (size_t i = 0; i < n; ++i) {
    const double luma = 0.299 * img.data[i * 3 + 0] + 0.587 * img.data[i * 3 + 1] +
                        0.114 * img.data[i * 3 + 2];
    out.data[i] = static_cast<std::uint8_t>(std::lround(luma));
  }
  return out;
}

ImageBuf crop_patch(const ImageBuf& img, PixelCoord center, int side) {
  if (side < 1) throw ParameterError("crop_patch: side must be >= 1");
  ImageBuf out(side, side, img.channels);
  // For even sides the center lands on the top-left pixel of the middle 2x2.
  const int x0 = center.x - (side - 1) / 2;
  const int y0 = center.y - (side - 1) / 2;
  for (int y = 0; y < side; ++y) {
    const int sy = std::clamp(y0 + y, 0, img.height - 1);
    for (int x = 0; x < side; ++x) {
      const int sx = std::clamp(x0 + x, 0, img.width - 1);
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

ImageBuf replicate_to_rgb(const ImageBuf& gray) {
  if (gray.channels == 3) return gray;
  if (gray.channels != 1) throw ChannelError("replicate_to_rgb expects 1 channel");
  ImageBuf out(gray.width, gray.height, 3);
  const size_t n = static_cast<size_t>(gray.width) * gray.height;
  for (size_t i = 0; i < n; ++i) {
    out.data[i * 3 + 0] = gray.data[i];
    out.data[i * 3 + 1] = gray.data[i];
    out.data[i * 3 + 2] = gray.data[i];
  }
  return out;
}

FloatPlane to_unit_plane(const ImageBuf& gray) {
  if (gray.channels != 1) throw ChannelError("to_unit_plane expects 1 channel");
  FloatPlane p(gray.width, gray.height);
  for (size_t i = 0; i < p.v.size(); ++i) p.v[i] = gray.data[i] / 255.0f;
  return p;
}

}  // namespace smikm
