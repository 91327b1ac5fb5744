#ifndef STSDEP_BITSEQ_HPP_
#define STSDEP_BITSEQ_HPP_

// Immutable packed bit sequences.
//
// Bits are stored MSB-first in 64-bit words: bit i of the sequence lives in
// word i / 64 at bit position 63 - (i % 64). One extra zero word is kept past
// the end so that windows can always be read with two word loads. Padding
// bits are zero and are never observable through the public interface.

#include <bit>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stsdep/errors.hpp"

namespace stsdep {

class BitSequence {
 public:
  // Whitespace is skipped; any other character than '0'/'1' is rejected.
  static BitSequence from_ascii01(std::string_view text) {
    std::vector<std::uint64_t> words;
    std::size_t length = 0;
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
      char c = text[pos];
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (c != '0' && c != '1') {
        throw Error(ErrorCode::InvalidCharacter,
                    "unexpected character at position " + std::to_string(pos));
      }
      if (length % 64 == 0) words.push_back(0);
      if (c == '1') words.back() |= std::uint64_t{1} << (63 - length % 64);
      ++length;
    }
    if (length == 0) throw Error(ErrorCode::EmptyInput, "no bits in text input");
    return BitSequence(std::move(words), length);
  }

  // Bit i is bit (7 - i % 8) of byte i / 8.
  static BitSequence from_bytes(std::span<const std::uint8_t> data, std::size_t nbits) {
    if (nbits > 8 * data.size()) {
      throw Error(ErrorCode::LengthMismatch, std::to_string(nbits) + " bits requested from " +
                                                 std::to_string(data.size()) + " bytes");
    }
    if (nbits == 0) throw Error(ErrorCode::EmptyInput, "zero-length sequence");
    std::vector<std::uint64_t> words((nbits + 63) / 64, 0);
    const std::size_t nbytes = (nbits + 7) / 8;
    for (std::size_t b = 0; b < nbytes; ++b) {
      words[b / 8] |= std::uint64_t{data[b]} << (56 - 8 * (b % 8));
    }
    return BitSequence(std::move(words), nbits);
  }

  // Takes ownership of MSB-first words; bits past nbits are cleared.
  static BitSequence from_words(std::vector<std::uint64_t> words, std::size_t nbits) {
    if (nbits == 0) throw Error(ErrorCode::EmptyInput, "zero-length sequence");
    if (nbits > 64 * words.size()) {
      throw Error(ErrorCode::LengthMismatch, "not enough words for requested length");
    }
    words.resize((nbits + 63) / 64);
    return BitSequence(std::move(words), nbits);
  }

  std::size_t size() const noexcept { return length_; }

  bool operator[](std::size_t i) const noexcept {
    return (words_[i >> 6] >> (63 - (i & 63))) & 1u;
  }

  bool at(std::size_t i) const {
    if (i >= length_) throw Error(ErrorCode::OutOfRange, "bit index " + std::to_string(i));
    return (*this)[i];
  }

  std::size_t ones() const noexcept {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }
  std::size_t zeros() const noexcept { return length_ - ones(); }

  // The 64 bits starting at `start`, first bit most significant. Bits past the
  // end read as zero. Requires start < size() + 64.
  std::uint64_t window64(std::size_t start) const noexcept {
    const std::size_t w = start >> 6;
    const unsigned off = start & 63;
    const std::uint64_t hi = words_[w];
    if (off == 0) return hi;
    return (hi << off) | (words_[w + 1] >> (64 - off));
  }

  // Unchecked: `width` bits starting at `start` as an unsigned integer, first
  // bit most significant. Requires 1 <= width <= 32.
  std::uint32_t window(std::size_t start, unsigned width) const noexcept {
    return static_cast<std::uint32_t>(window64(start) >> (64 - width));
  }

  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((length_ + 7) / 8);
    for (std::size_t b = 0; b < out.size(); ++b) {
      out[b] = static_cast<std::uint8_t>(words_[b / 8] >> (56 - 8 * (b % 8)));
    }
    return out;
  }

  std::string to_ascii01() const {
    std::string out(length_, '0');
    for (std::size_t i = 0; i < length_; ++i) {
      if ((*this)[i]) out[i] = '1';
    }
    return out;
  }

  // Packed words without the trailing guard word.
  std::span<const std::uint64_t> words() const noexcept {
    return {words_.data(), words_.size() - 1};
  }

  friend bool operator==(const BitSequence& a, const BitSequence& b) noexcept {
    return a.length_ == b.length_ && a.words_ == b.words_;
  }

 private:
  BitSequence(std::vector<std::uint64_t> words, std::size_t length)
      : length_(length), words_(std::move(words)) {
    if (length_ % 64 != 0) words_.back() &= ~std::uint64_t{0} << (64 - length_ % 64);
    words_.push_back(0);
  }

  std::size_t length_;
  std::vector<std::uint64_t> words_;
};

// Checked variant of BitSequence::window.
inline std::uint32_t slice_window(const BitSequence& s, std::size_t start, unsigned width) {
  if (width == 0 || width > 32 || start > s.size() || width > s.size() - start) {
    throw Error(ErrorCode::OutOfRange, "window [" + std::to_string(start) + ", +" +
                                           std::to_string(width) + ") outside sequence of " +
                                           std::to_string(s.size()) + " bits");
  }
  return s.window(start, width);
}

// ---------------------------------------------------------------------------
// Files. Raw `.bin` files are MSB-first and carry their bit count in a sidecar
// `<file>.len` (decimal text); without a sidecar the whole file is used.
// Anything else is read as ASCII '0'/'1'.

inline std::filesystem::path length_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".len";
  return p;
}

namespace detail {

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return data;
}

inline void spit(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace detail

inline BitSequence read_bin(const std::filesystem::path& path) {
  const std::string raw = detail::slurp(path);
  std::size_t nbits = 8 * raw.size();
  const auto side = length_sidecar(path);
  if (std::filesystem::exists(side)) {
    const std::string text = detail::slurp(side);
    try {
      std::size_t used = 0;
      nbits = std::stoull(text, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::FormatError, "bad length sidecar " + side.string());
    }
  }
  auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
  return BitSequence::from_bytes(bytes, nbits);
}

inline void write_bin(const std::filesystem::path& path, const BitSequence& s) {
  const auto bytes = s.to_bytes();
  detail::spit(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  detail::spit(length_sidecar(path), std::to_string(s.size()) + "\n");
}

inline BitSequence read_txt(const std::filesystem::path& path) {
  return BitSequence::from_ascii01(detail::slurp(path));
}

inline void write_txt(const std::filesystem::path& path, const BitSequence& s) {
  detail::spit(path, s.to_ascii01() + "\n");
}

inline BitSequence read_sequence(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? read_bin(path) : read_txt(path);
}

}  // namespace stsdep

#endif  // STSDEP_BITSEQ_HPP_
