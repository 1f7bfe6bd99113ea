#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlsynth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Interleaved row-major raster: index = (y * width + x) * Channels + c.
// y grows downwards, x grows to the right.
template <typename T, int Channels>
class Image {
 public:
  static constexpr int kChannels = Channels;
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error("image dimensions must be positive, got " +
                  std::to_string(width) + "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const {
    return data_[index(x, y, c)];
  }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  template <typename U, int C>
  bool same_shape(const Image<U, C>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Linear-light RGB in [0,1].
using LinearImage = Image<float, 3>;
/// One finite scalar per pixel (depth, highlight intensity, brightness, ...).
using ScalarMap = Image<float, 1>;
/// Boolean per pixel, stored as 0/1 bytes.
using BinaryMask = Image<std::uint8_t, 1>;

/// Integer-coded RGB as read from an 8- or 16-bit PNG.
struct EncodedImage {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> codes;  // interleaved RGB

  std::uint16_t max_code() const {
    return static_cast<std::uint16_t>((1u << bit_depth) - 1u);
  }
};

template <typename A, int CA, typename B, int CB>
void require_same_shape(const Image<A, CA>& a, const Image<B, CB>& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw Error(std::string(what) + ": shape mismatch (" +
                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                " vs " + std::to_string(b.width()) + "x" +
                std::to_string(b.height()) + ")");
  }
}

std::size_t count_set(const BinaryMask& mask);

/// Throws unless every channel value is finite and inside [0,1].
void require_unit_range(const LinearImage& img, const char* what);

}  // namespace hlsynth
