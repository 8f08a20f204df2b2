#include "rtlfsim/logic/logic_vector.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace rtlfsim {

char to_char(LogicBit b) {
  switch (b) {
    case LogicBit::Zero: return '0';
    case LogicBit::One: return '1';
    case LogicBit::X: return 'x';
    case LogicBit::Z: return 'z';
  }
  return '?';
}

LogicVector::LogicVector(uint32_t width, LogicBit fill) : width_(width) {
  if (width == 0) throw std::invalid_argument("LogicVector width must be >= 1");
  if (!is_inline()) heap_ = std::make_unique<uint64_t[]>(2 * word_count());
  uint64_t a = (fill == LogicBit::One || fill == LogicBit::X) ? ~0ULL : 0;
  uint64_t b = (fill == LogicBit::Z || fill == LogicBit::X) ? ~0ULL : 0;
  for (uint32_t w = 0; w < word_count(); ++w) set_word(w, a, b);
}

LogicVector::LogicVector(const LogicVector& other) : width_(other.width_) {
  if (is_inline()) {
    inline_[0] = other.inline_[0];
    inline_[1] = other.inline_[1];
  } else {
    heap_ = std::make_unique<uint64_t[]>(2 * word_count());
    std::memcpy(heap_.get(), other.heap_.get(), 16 * word_count());
  }
}

LogicVector::LogicVector(LogicVector&& other) noexcept
    : width_(other.width_), heap_(std::move(other.heap_)) {
  inline_[0] = other.inline_[0];
  inline_[1] = other.inline_[1];
}

LogicVector& LogicVector::operator=(const LogicVector& other) {
  if (this == &other) return *this;
  if (other.is_inline()) {
    heap_.reset();
    inline_[0] = other.inline_[0];
    inline_[1] = other.inline_[1];
  } else {
    if (width_ != other.width_ || !heap_) heap_ = std::make_unique<uint64_t[]>(2 * other.word_count());
    std::memcpy(heap_.get(), other.heap_.get(), 16 * other.word_count());
  }
  width_ = other.width_;
  return *this;
}

LogicVector& LogicVector::operator=(LogicVector&& other) noexcept {
  width_ = other.width_;
  inline_[0] = other.inline_[0];
  inline_[1] = other.inline_[1];
  heap_ = std::move(other.heap_);
  return *this;
}

LogicVector LogicVector::from_uint(uint32_t width, uint64_t value) {
  LogicVector v(width, LogicBit::Zero);
  v.set_word(0, value, 0);
  return v;
}

LogicVector LogicVector::parse(std::string_view text) {
  auto quote = text.find('\'');
  if (quote == std::string_view::npos || quote == 0 || quote + 2 > text.size())
    throw std::invalid_argument("malformed logic literal '" + std::string(text) + "'");
  uint64_t width = 0;
  for (char c : text.substr(0, quote)) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("malformed width in '" + std::string(text) + "'");
    width = width * 10 + static_cast<uint64_t>(c - '0');
    if (width > (1u << 24)) throw std::invalid_argument("literal width too large");
  }
  if (width == 0) throw std::invalid_argument("zero-width literal '" + std::string(text) + "'");
  return from_based(static_cast<uint32_t>(width), text[quote + 1], text.substr(quote + 2));
}

LogicVector LogicVector::from_based(uint32_t width, char base, std::string_view digits) {
  base = static_cast<char>(std::tolower(static_cast<unsigned char>(base)));
  std::string ds;
  for (char c : digits) {
    if (c == '_') continue;
    ds.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (ds.empty()) throw std::invalid_argument("literal has no digits");
  LogicVector v(width, LogicBit::Zero);
  auto fill_from = [&](uint32_t pos, LogicBit b) {
    for (uint32_t i = pos; i < width; ++i) v.set_bit(i, b);
  };
  if (base == 'd') {
    if (ds == "x" || ds == "z") {
      fill_from(0, ds == "x" ? LogicBit::X : LogicBit::Z);
      return v;
    }
    // Decimal digits accumulate into limbs so wide literals stay exact.
    std::vector<uint64_t> limbs(v.word_count(), 0);
    for (char c : ds) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw std::invalid_argument(std::string("bad decimal digit '") + c + "'");
      unsigned __int128 carry = static_cast<unsigned>(c - '0');
      for (auto& l : limbs) {
        unsigned __int128 t = static_cast<unsigned __int128>(l) * 10 + carry;
        l = static_cast<uint64_t>(t);
        carry = t >> 64;
      }
    }
    for (uint32_t w = 0; w < v.word_count(); ++w) v.set_word(w, limbs[w], 0);
    return v;
  }
  uint32_t bits_per = base == 'b' ? 1 : base == 'o' ? 3 : base == 'h' ? 4 : 0;
  if (bits_per == 0) throw std::invalid_argument(std::string("bad literal base '") + base + "'");
  uint32_t pos = 0;
  LogicBit last = LogicBit::Zero;
  for (size_t i = ds.size(); i-- > 0;) {
    char c = ds[i];
    for (uint32_t k = 0; k < bits_per; ++k) {
      LogicBit b;
      if (c == 'x' || c == '?') {
        b = LogicBit::X;
      } else if (c == 'z') {
        b = LogicBit::Z;
      } else {
        int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                : (c >= 'a' && c <= 'f')                        ? c - 'a' + 10
                                                                : 99;
        if (d >= (1 << bits_per)) throw std::invalid_argument(std::string("bad digit '") + c + "'");
        b = ((d >> k) & 1) ? LogicBit::One : LogicBit::Zero;
      }
      if (pos < width) v.set_bit(pos, b);
      ++pos;
      last = b;
    }
  }
  // A leading x/z digit extends through the remaining high bits.
  if (pos < width && (last == LogicBit::X || last == LogicBit::Z)) fill_from(pos, last);
  return v;
}

LogicBit LogicVector::bit(uint32_t i) const {
  uint64_t a = (aval(i / 64) >> (i % 64)) & 1;
  uint64_t b = (bval(i / 64) >> (i % 64)) & 1;
  if (b == 0) return a ? LogicBit::One : LogicBit::Zero;
  return a ? LogicBit::X : LogicBit::Z;
}

void LogicVector::set_bit(uint32_t i, LogicBit b) {
  uint64_t* w = words() + 2 * (i / 64);
  uint64_t m = 1ULL << (i % 64);
  bool a = b == LogicBit::One || b == LogicBit::X;
  bool u = b == LogicBit::X || b == LogicBit::Z;
  w[0] = a ? (w[0] | m) : (w[0] & ~m);
  w[1] = u ? (w[1] | m) : (w[1] & ~m);
}

bool LogicVector::has_unknown() const {
  for (uint32_t w = 0; w < word_count(); ++w)
    if (bval(w)) return true;
  return false;
}

std::optional<uint64_t> LogicVector::to_uint() const {
  if (has_unknown()) return std::nullopt;
  for (uint32_t w = 1; w < word_count(); ++w)
    if (aval(w)) return std::nullopt;
  return aval(0);
}

uint64_t LogicVector::word_mask(uint32_t word) const {
  uint32_t top = width_ - 64 * word;
  return top >= 64 ? ~0ULL : ((1ULL << top) - 1);
}

void LogicVector::set_word(uint32_t word, uint64_t a, uint64_t b) {
  uint64_t m = word_mask(word);
  uint64_t* w = words() + 2 * word;
  w[0] = a & m;
  w[1] = b & m;
}

LogicVector LogicVector::slice(uint32_t lsb, uint32_t width) const {
  if (lsb + width > width_) throw std::out_of_range("slice out of range");
  LogicVector r(width, LogicBit::Zero);
  if (lsb % 64 == 0) {
    for (uint32_t w = 0; w < r.word_count(); ++w) r.set_word(w, aval(lsb / 64 + w), bval(lsb / 64 + w));
    return r;
  }
  for (uint32_t w = 0; w < r.word_count(); ++w) {
    uint32_t src = lsb + 64 * w;
    uint32_t sw = src / 64, sh = src % 64;
    uint64_t a = aval(sw) >> sh, b = bval(sw) >> sh;
    if (sw + 1 < word_count()) {
      a |= aval(sw + 1) << (64 - sh);
      b |= bval(sw + 1) << (64 - sh);
    }
    r.set_word(w, a, b);
  }
  return r;
}

void LogicVector::assign_slice(uint32_t lsb, const LogicVector& v) {
  if (lsb + v.width() > width_) throw std::out_of_range("assign_slice out of range");
  if (width_ <= 64) {
    uint64_t m = (v.width() >= 64 ? ~0ULL : ((1ULL << v.width()) - 1)) << lsb;
    inline_[0] = (inline_[0] & ~m) | (v.aval(0) << lsb);
    inline_[1] = (inline_[1] & ~m) | (v.bval(0) << lsb);
    return;
  }
  for (uint32_t i = 0; i < v.width(); ++i) set_bit(lsb + i, v.bit(i));
}

LogicVector LogicVector::resized(uint32_t width) const {
  if (width == width_) return *this;
  if (width < width_) return slice(0, width);
  LogicVector r(width, LogicBit::Zero);
  r.assign_slice(0, *this);
  return r;
}

std::string LogicVector::bits_string() const {
  std::string s;
  s.reserve(width_);
  for (uint32_t i = width_; i-- > 0;) s.push_back(to_char(bit(i)));
  return s;
}

std::string LogicVector::to_string() const {
  return std::to_string(width_) + "'b" + bits_string();
}

bool operator==(const LogicVector& x, const LogicVector& y) {
  if (x.width_ != y.width_) return false;
  if (x.is_inline()) return x.inline_[0] == y.inline_[0] && x.inline_[1] == y.inline_[1];
  return std::memcmp(x.heap_.get(), y.heap_.get(), 16 * x.word_count()) == 0;
}

}  // namespace rtlfsim
