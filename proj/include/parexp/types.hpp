#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parexp {

using UserId = std::uint64_t;
using CampaignIndex = std::uint32_t;

/// Sentinel for the "no ads" outside option. Real campaign indices start at 1.
inline constexpr CampaignIndex kNoAd = 0;

/// Upper bound on campaigns in one experiment (assignments are packed in 64 bits).
inline constexpr std::size_t kMaxCampaigns = 64;

/// Malformed or inconsistent configuration. Carries the offending line when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// An estimand could not be recovered from the data (one-armed cell, singular moments).
class IdentificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system or parse failure on an input/output artifact.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-width binary vector used for states of the world, partial treatment
/// assignments and arm combinations.
///
/// Coordinate c is stored in bit c. Ordering is lexicographic over coordinates
/// (coordinate 0 most significant), which is the canonical order used for
/// states and cells everywhere in the library.
class BitVector {
 public:
  BitVector() = default;
  BitVector(std::uint64_t bits, std::size_t width) : bits_(bits), width_(static_cast<std::uint8_t>(width)) {
    if (width > 64) throw std::invalid_argument("BitVector: width above 64");
    if (width < 64) bits_ &= (std::uint64_t{1} << width) - 1;
  }

  static BitVector from_coordinates(const std::vector<std::uint8_t>& coords) {
    std::uint64_t bits = 0;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      if (coords[c] > 1) throw std::invalid_argument("BitVector: coordinate not binary");
      if (coords[c]) bits |= std::uint64_t{1} << c;
    }
    return BitVector(bits, coords.size());
  }

  /// Parses the CSV form: one '0'/'1' character per coordinate, or "-" for width 0.
  static BitVector parse(std::string_view text) {
    if (text == "-") return BitVector(0, 0);
    std::uint64_t bits = 0;
    for (std::size_t c = 0; c < text.size(); ++c) {
      if (text[c] == '1') {
        bits |= std::uint64_t{1} << c;
      } else if (text[c] != '0') {
        throw std::invalid_argument("BitVector: bad character in '" + std::string(text) + "'");
      }
    }
    return BitVector(bits, text.size());
  }

  std::size_t size() const { return width_; }
  std::uint64_t bits() const { return bits_; }
  bool operator[](std::size_t c) const { return (bits_ >> c) & 1U; }
  int count() const { return std::popcount(bits_); }

  BitVector with(std::size_t c, bool value) const {
    std::uint64_t b = value ? (bits_ | (std::uint64_t{1} << c)) : (bits_ & ~(std::uint64_t{1} << c));
    return BitVector(b, width_);
  }

  std::vector<std::uint8_t> coordinates() const {
    std::vector<std::uint8_t> out(width_);
    for (std::size_t c = 0; c < width_; ++c) out[c] = (*this)[c];
    return out;
  }

  std::string to_string() const {
    if (width_ == 0) return "-";
    std::string out(width_, '0');
    for (std::size_t c = 0; c < width_; ++c)
      if ((*this)[c]) out[c] = '1';
    return out;
  }

  bool operator==(const BitVector&) const = default;

  std::strong_ordering operator<=>(const BitVector& other) const {
    if (auto w = width_ <=> other.width_; w != 0) return w;
    for (std::size_t c = 0; c < width_; ++c) {
      if (auto o = (*this)[c] <=> other[c]; o != 0) return o;
    }
    return std::strong_ordering::equal;
  }

 private:
  std::uint64_t bits_ = 0;
  std::uint8_t width_ = 0;
};

}  // namespace parexp
