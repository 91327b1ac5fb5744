#ifndef STSDEP_GENRAND_HPP_
#define STSDEP_GENRAND_HPP_

// Deterministic bit sources: MT19937 (32-bit words, MSB-first) and AES-128 in
// counter mode (big-endian 128-bit counter, cipher bytes MSB-first). A set of
// m sequences of n bits is the first m*n bits of one stream cut into
// consecutive blocks.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <openssl/evp.h>

#include "stsdep/bitseq.hpp"
#include "stsdep/errors.hpp"

namespace stsdep {

using Block128 = std::array<std::uint8_t, 16>;

enum class GeneratorKind { Mt19937, Aes128Ctr };

inline std::string_view to_string(GeneratorKind kind) {
  return kind == GeneratorKind::Mt19937 ? "mt19937" : "aes128-ctr";
}

inline GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "mt19937") return GeneratorKind::Mt19937;
  if (name == "aes128-ctr") return GeneratorKind::Aes128Ctr;
  throw Error(ErrorCode::InvalidSpec, "unknown generator kind '" + std::string(name) + "'");
}

// 32 hex digits, optional "0x" prefix.
inline Block128 parse_hex128(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.size() != 32) {
    throw Error(ErrorCode::InvalidSpec, "expected 32 hex digits, got '" + std::string(hex) + "'");
  }
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw Error(ErrorCode::InvalidSpec, "bad hex digit in '" + std::string(hex) + "'");
  };
  Block128 out{};
  for (std::size_t i = 0; i < 16; ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

inline std::string to_hex(const Block128& block) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (auto b : block) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Mt19937;
  std::uint32_t seed = 5489;  // mt19937
  Block128 key{};             // aes128-ctr
  Block128 counter0{};        // aes128-ctr
  std::size_t sequence_index = 0;  // 0-based position of the sequence in its set
};

namespace detail {

inline Block128 add_to_counter(Block128 counter, std::uint64_t delta) {
  for (int i = 15; i >= 0 && delta != 0; --i) {
    const std::uint64_t sum = counter[i] + (delta & 0xFF);
    counter[i] = static_cast<std::uint8_t>(sum);
    delta = (delta >> 8) + (sum >> 8);
  }
  return counter;
}

class Mt19937Words {
 public:
  Mt19937Words(std::uint32_t seed, std::uint64_t skip) : engine_(seed) { engine_.discard(skip); }
  std::uint32_t next() { return static_cast<std::uint32_t>(engine_()); }

 private:
  std::mt19937 engine_;
};

// AES-128 keystream in 32-bit words (each cipher block yields 4 big-endian words).
class AesCtrWords {
 public:
  AesCtrWords(const Block128& key, const Block128& counter0, std::uint64_t skip_blocks)
      : ctx_(EVP_CIPHER_CTX_new()), counter_(add_to_counter(counter0, skip_blocks)) {
    if (!ctx_ || EVP_EncryptInit_ex(ctx_.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) {
      throw Error(ErrorCode::InvalidSpec, "AES-128 initialisation failed");
    }
    EVP_CIPHER_CTX_set_padding(ctx_.get(), 0);
  }

  std::uint32_t next() {
    if (pos_ == buffer_.size()) refill();
    const std::uint8_t* p = &buffer_[pos_];
    pos_ += 4;
    return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | p[3];
  }

 private:
  static constexpr std::size_t kBlocksPerRefill = 256;

  void refill() {
    std::vector<std::uint8_t> plain(16 * kBlocksPerRefill);
    for (std::size_t b = 0; b < kBlocksPerRefill; ++b) {
      std::copy(counter_.begin(), counter_.end(), plain.begin() + static_cast<std::ptrdiff_t>(16 * b));
      counter_ = add_to_counter(counter_, 1);
    }
    buffer_.resize(plain.size());
    int written = 0;
    if (EVP_EncryptUpdate(ctx_.get(), buffer_.data(), &written, plain.data(),
                          static_cast<int>(plain.size())) != 1 ||
        written != static_cast<int>(plain.size())) {
      throw Error(ErrorCode::InvalidSpec, "AES-128 encryption failed");
    }
    pos_ = 0;
  }

  struct CtxFree {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
  };
  std::unique_ptr<EVP_CIPHER_CTX, CtxFree> ctx_;
  Block128 counter_;
  std::vector<std::uint8_t> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Sequential reader over a generator's bit stream. Consecutive calls to
// next_sequence return consecutive, disjoint blocks of the stream.
class BitStream {
 public:
  // Positions the stream at absolute bit offset `start_bit`.
  BitStream(const GeneratorSpec& spec, std::uint64_t start_bit) {
    if (spec.kind == GeneratorKind::Mt19937) {
      source_.emplace<detail::Mt19937Words>(spec.seed, start_bit / 32);
      drop_bits(static_cast<unsigned>(start_bit % 32));
    } else {
      source_.emplace<detail::AesCtrWords>(spec.key, spec.counter0, start_bit / 128);
      drop_bits(static_cast<unsigned>(start_bit % 128));
    }
  }

  BitSequence next_sequence(std::size_t nbits) {
    if (nbits == 0) throw Error(ErrorCode::EmptyInput, "zero-length sequence requested");
    std::vector<std::uint64_t> words((nbits + 63) / 64);
    std::size_t remaining = nbits;
    for (auto& w : words) {
      const unsigned take = remaining >= 64 ? 64u : static_cast<unsigned>(remaining);
      const unsigned hi = take > 32 ? 32u : take;
      w = read_bits(hi) << (64 - hi);
      if (take > hi) w |= read_bits(take - hi) << (64 - take);
      remaining -= take;
    }
    return BitSequence::from_words(std::move(words), nbits);
  }

 private:
  std::uint32_t next_word() {
    return std::visit([](auto& s) -> std::uint32_t {
      if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) {
        return 0;
      } else {
        return s.next();
      }
    }, source_);
  }

  // Next `count` (1..32) stream bits, right-aligned.
  std::uint64_t read_bits(unsigned count) {
    while (buffered_ < count) {
      buffer_ |= std::uint64_t{next_word()} << (32 - buffered_);
      buffered_ += 32;
    }
    const std::uint64_t out = buffer_ >> (64 - count);
    buffer_ <<= count;
    buffered_ -= count;
    return out;
  }

  void drop_bits(unsigned count) {
    while (count > 0) {
      const unsigned step = count > 32 ? 32u : count;
      read_bits(step);
      count -= step;
    }
  }

  std::variant<std::monostate, detail::Mt19937Words, detail::AesCtrWords> source_;
  std::uint64_t buffer_ = 0;  // left-aligned pending bits
  unsigned buffered_ = 0;
};

// Standard MT19937 from `seed`, first `skip` outputs discarded.
inline BitSequence mt19937_bits(std::uint32_t seed, std::uint64_t skip, std::size_t nbits) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::Mt19937;
  spec.seed = seed;
  return BitStream(spec, 32 * skip).next_sequence(nbits);
}

inline BitSequence aes128_ctr_bits(const Block128& key, const Block128& counter0, std::size_t nbits) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::Aes128Ctr;
  spec.key = key;
  spec.counter0 = counter0;
  return BitStream(spec, 0).next_sequence(nbits);
}

// Sequence spec.sequence_index of a set of n-bit sequences, produced by
// seeking directly to its offset in the stream.
inline BitSequence make_sequence(const GeneratorSpec& spec, std::size_t n) {
  return BitStream(spec, static_cast<std::uint64_t>(spec.sequence_index) * n).next_sequence(n);
}

inline std::vector<BitSequence> make_sequence_set(const GeneratorSpec& base, std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw Error(ErrorCode::InvalidSpec, "m and n must be positive");
  BitStream stream(base, static_cast<std::uint64_t>(base.sequence_index) * n);
  std::vector<BitSequence> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) out.push_back(stream.next_sequence(n));
  return out;
}

}  // namespace stsdep

#endif  // STSDEP_GENRAND_HPP_
