#include "hlsynth/io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace hlsynth::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor and PFM writers assume a little-endian host");

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) {
  throw Error(std::string("libpng: ") + msg);
}
void png_warning_fn(png_structp, png_const_charp) {}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void write_png_rows(const std::filesystem::path& path, int width, int height,
                    int bit_depth, int color_type, int channels,
                    const std::vector<std::uint16_t>& samples) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_fn, png_warning_fn);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t row_samples = static_cast<std::size_t>(width) * channels;
  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> row(row_samples * bytes_per_sample);
  for (int y = 0; y < height; ++y) {
    const std::uint16_t* src = samples.data() + y * row_samples;
    for (std::size_t i = 0; i < row_samples; ++i) {
      if (bytes_per_sample == 2) {
        row[2 * i] = static_cast<png_byte>(src[i] >> 8);  // PNG is big-endian
        row[2 * i + 1] = static_cast<png_byte>(src[i] & 0xff);
      } else {
        row[i] = static_cast<png_byte>(src[i]);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = dims.empty() ? 0 : 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.empty() || t.dims.size() > 255) {
    throw Error("tensor rank must be in [1,255]");
  }
  if (t.element_count() != t.data.size()) {
    throw Error("tensor payload size does not match dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderBytes + 4 * t.dims.size() + 4 * t.data.size());
  out.insert(out.end(), {'U', 'R', 'T', 'D'});
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  out.push_back(0);  // f32
  out.resize(kTensorHeaderBytes, 0);
  for (auto d : t.dims) put_u32(out, d);
  const auto* raw = reinterpret_cast<const std::uint8_t*>(t.data.data());
  out.insert(out.end(), raw, raw + 4 * t.data.size());
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTensorHeaderBytes ||
      std::memcmp(bytes.data(), "URTD", 4) != 0) {
    throw Error("not a URTD tensor");
  }
  const std::size_t rank = bytes[4];
  if (bytes[5] != 0) throw Error("unsupported tensor dtype code " +
                                 std::to_string(bytes[5]));
  if (rank == 0) throw Error("tensor rank 0");
  const std::size_t dims_end = kTensorHeaderBytes + 4 * rank;
  if (bytes.size() < dims_end) throw Error("truncated tensor header");
  Tensor t;
  for (std::size_t i = 0; i < rank; ++i) {
    t.dims.push_back(get_u32(bytes, kTensorHeaderBytes + 4 * i));
  }
  const std::size_t n = t.element_count();
  if (bytes.size() != dims_end + 4 * n) {
    throw Error("tensor payload size does not match dims");
  }
  t.data.resize(n);
  std::memcpy(t.data.data(), bytes.data() + dims_end, 4 * n);
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_bytes(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_bytes(path));
}

Tensor to_tensor(const ScalarMap& map) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(map.height()),
            static_cast<std::uint32_t>(map.width())};
  t.data.assign(map.values().begin(), map.values().end());
  return t;
}

Tensor to_tensor(const LinearImage& img) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(img.height()),
            static_cast<std::uint32_t>(img.width()), 3};
  t.data.assign(img.values().begin(), img.values().end());
  return t;
}

ScalarMap scalar_map_from_tensor(const Tensor& t) {
  const bool ok = t.dims.size() == 2 ||
                  (t.dims.size() == 3 && t.dims[2] == 1);
  if (!ok) throw Error("expected an HxW tensor");
  ScalarMap map(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
  std::copy(t.data.begin(), t.data.end(), map.values().begin());
  return map;
}

LinearImage linear_image_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[2] != 3) {
    throw Error("expected an HxWx3 tensor");
  }
  LinearImage img(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
  std::copy(t.data.begin(), t.data.end(), img.values().begin());
  return img;
}

EncodedImage read_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_fn, png_warning_fn);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY ||
      color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  EncodedImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  bit_depth = png_get_bit_depth(png, info);
  img.bit_depth = bit_depth == 16 ? 16 : 8;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  const std::size_t row_samples = static_cast<std::size_t>(img.width) * 3;
  if (rowbytes != row_samples * (bit_depth == 16 ? 2 : 1)) {
    throw Error("unexpected PNG row layout in " + path.string());
  }
  std::vector<png_byte> row(rowbytes);
  img.codes.resize(row_samples * img.height);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    std::uint16_t* dst = img.codes.data() + y * row_samples;
    for (std::size_t i = 0; i < row_samples; ++i) {
      dst[i] = bit_depth == 16
                   ? static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1])
                   : row[i];
    }
  }
  png_read_end(png, nullptr);
  return img;
}

void write_png(const std::filesystem::path& path, const EncodedImage& img) {
  if (img.codes.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw Error("write_png: code buffer does not match dimensions");
  }
  write_png_rows(path, img.width, img.height, img.bit_depth,
                 PNG_COLOR_TYPE_RGB, 3, img.codes);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint16_t> samples(mask.pixel_count());
  auto src = mask.values();
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = src[i] ? 255 : 0;
  write_png_rows(path, mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, 1,
                 samples);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  const EncodedImage img = read_png(path);
  BinaryMask mask(img.width, img.height);
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
    mask.values()[i] = img.codes[3 * i] != 0 ? 1 : 0;
  }
  return mask;
}

ScalarMap read_pfm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  // Header: three whitespace-separated tokens, then one whitespace byte.
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok += static_cast<char>(bytes[pos++]);
    return tok;
  };
  const std::string magic = next_token();
  if (magic != "Pf") {
    throw Error(path.string() + ": expected a single-channel PFM (Pf)");
  }
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    scale = std::stod(next_token());
  } catch (const std::exception&) {
    throw Error(path.string() + ": malformed PFM header");
  }
  ++pos;  // single whitespace terminator
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width < 1 || height < 1 || bytes.size() < pos + 4 * n) {
    throw Error(path.string() + ": truncated PFM");
  }
  const bool big_endian = scale > 0.0;
  ScalarMap map(width, height);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      std::uint8_t b[4];
      std::memcpy(b, bytes.data() + pos + 4 * (static_cast<std::size_t>(row) * width + x), 4);
      if (big_endian) {
        std::swap(b[0], b[3]);
        std::swap(b[1], b[2]);
      }
      float v;
      std::memcpy(&v, b, 4);
      map(x, y) = v;
    }
  }
  return map;
}

void write_pfm(const std::filesystem::path& path, const ScalarMap& map) {
  std::ostringstream header;
  header << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(out.size() + 4 * map.pixel_count());
  for (int y = map.height() - 1; y >= 0; --y) {
    const auto* row = reinterpret_cast<const std::uint8_t*>(&map(0, y));
    out.insert(out.end(), row, row + 4 * static_cast<std::size_t>(map.width()));
  }
  write_bytes(path, out);
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace hlsynth::io
