// Four-state (0/1/X/Z) bit vectors.
//
// Storage is two bit planes per 64-bit word using the VPI aval/bval
// encoding:
//
//   bit   aval  bval
//   0      0     0
//   1      1     0
//   z      0     1
//   x      1     1
//
// Bits above `width` are always zero in both planes, so word-wise
// comparison is value identity. Vectors up to 64 bits live inline.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace rtlfsim {

enum class LogicBit : uint8_t { Zero, One, X, Z };

char to_char(LogicBit b);

class LogicVector {
public:
  /// 1-bit X.
  LogicVector() : LogicVector(1) {}
  explicit LogicVector(uint32_t width, LogicBit fill = LogicBit::X);

  LogicVector(const LogicVector& other);
  LogicVector(LogicVector&& other) noexcept;
  LogicVector& operator=(const LogicVector& other);
  LogicVector& operator=(LogicVector&& other) noexcept;
  ~LogicVector() = default;

  /// Known binary value, truncated to `width` bits.
  static LogicVector from_uint(uint32_t width, uint64_t value);
  static LogicVector from_bit(LogicBit b) { return LogicVector(1, b); }

  /// Parses `<width>'<base><digits>` with base b/o/h/d (case-insensitive,
  /// `_` separators allowed). Throws std::invalid_argument on malformed text.
  static LogicVector parse(std::string_view text);
  /// Builds a `width`-bit value from based digits. Excess digits truncate,
  /// missing high bits are 0, or x/z when the leading digit is x/z.
  static LogicVector from_based(uint32_t width, char base, std::string_view digits);

  uint32_t width() const { return width_; }
  uint32_t word_count() const { return (width_ + 63) / 64; }

  LogicBit bit(uint32_t i) const;
  void set_bit(uint32_t i, LogicBit b);

  /// True when any bit is X or Z.
  bool has_unknown() const;
  bool is_known() const { return !has_unknown(); }

  /// Value when fully known and at most 64 bits wide.
  std::optional<uint64_t> to_uint() const;

  LogicVector slice(uint32_t lsb, uint32_t width) const;
  /// Overwrites bits [lsb, lsb + v.width()).
  void assign_slice(uint32_t lsb, const LogicVector& v);
  /// Zero-extends (or truncates) to `width`.
  LogicVector resized(uint32_t width) const;

  /// Lowercase `<width>'b<bits>`, most significant bit first.
  std::string to_string() const;
  /// Bits only, most significant first.
  std::string bits_string() const;

  uint64_t aval(uint32_t word) const { return words()[2 * word]; }
  uint64_t bval(uint32_t word) const { return words()[2 * word + 1]; }
  void set_word(uint32_t word, uint64_t a, uint64_t b);
  /// Mask of valid bits in word `word`.
  uint64_t word_mask(uint32_t word) const;

  friend bool operator==(const LogicVector& x, const LogicVector& y);
  friend bool operator!=(const LogicVector& x, const LogicVector& y) { return !(x == y); }

private:
  bool is_inline() const { return width_ <= 64; }
  const uint64_t* words() const { return is_inline() ? inline_ : heap_.get(); }
  uint64_t* words() { return is_inline() ? inline_ : heap_.get(); }

  uint32_t width_;
  uint64_t inline_[2] = {0, 0};
  std::unique_ptr<uint64_t[]> heap_;
};

}  // namespace rtlfsim
