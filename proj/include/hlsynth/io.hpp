#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hlsynth/image.hpp"

namespace hlsynth::io {

/// Dense f32 tensor in C order, the payload of a raw tensor file.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
};

// Raw tensor layout (all little-endian):
//   bytes 0..3   magic "URTD"
//   byte  4      rank
//   byte  5      dtype code (0 = f32)
//   bytes 6..7   reserved u16, zero
//   bytes 8..15  reserved, zero
//   rank x u32   dims
//   payload      packed f32, C order
inline constexpr std::size_t kTensorHeaderBytes = 16;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const ScalarMap& map);
Tensor to_tensor(const LinearImage& img);
ScalarMap scalar_map_from_tensor(const Tensor& t);
LinearImage linear_image_from_tensor(const Tensor& t);

/// RGB or RGBA/gray PNG at 8 or 16 bits; alpha is dropped and gray expanded.
EncodedImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const EncodedImage& img);
/// 8-bit grayscale, 0 or 255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
/// Nonzero pixels of the first channel are set.
BinaryMask read_mask_png(const std::filesystem::path& path);

/// Single-channel PFM ("Pf"). Rows are stored bottom-to-top per the format.
ScalarMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const ScalarMap& map);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes);

}  // namespace hlsynth::io
