#pragma once

// Single-row hashed count sketch: a Carter-Wegman hash over the Mersenne
// prime 2^61 - 1 maps every symbol to one of J buckets, and the sketch keeps
// the bucket counts C_1..C_J together with the stream length n.

#include <array>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/crc.hpp>
#include <sodium.h>

#include "bnpsketch/errors.hpp"
#include "bnpsketch/random.hpp"

namespace bnps {

inline constexpr std::uint64_t mersenne61 = (std::uint64_t{1} << 61) - 1;
inline constexpr std::uint32_t max_sketch_width = std::uint32_t{1} << 24;

/// One draw from the strongly-universal family h(x) = ((a x + b) mod p) mod J.
struct HashSpec {
  std::uint64_t a = 1;
  std::uint64_t b = 0;
  std::uint32_t width = 1;
  std::uint64_t symbol_seed = 0;

  static constexpr std::uint64_t prime = mersenne61;

  /// Draws (a, b, symbol_seed) from a seed.
  static HashSpec from_seed(std::uint64_t seed, std::uint32_t width) {
    HashSpec h;
    h.width = width;
    std::uint64_t state = splitmix64(seed ^ 0xA0761D6478BD642FULL);
    auto next_mod_p = [&state] {
      for (;;) {
        state = splitmix64(state);
        const std::uint64_t x = state & mersenne61;
        if (x < mersenne61) return x;
      }
    };
    do {
      h.a = next_mod_p();
    } while (h.a == 0);
    h.b = next_mod_p();
    state = splitmix64(state);
    h.symbol_seed = state;
    h.validate();
    return h;
  }

  void validate() const {
    if (a == 0 || a >= prime) throw DomainError("hash parameter a must lie in [1, 2^61-1)");
    if (b >= prime) throw DomainError("hash parameter b must lie in [0, 2^61-1)");
    if (width == 0 || width > max_sketch_width) throw DomainError("sketch width must lie in [1, 2^24]");
  }

  friend bool operator==(const HashSpec&, const HashSpec&) = default;
};

namespace detail {

inline std::uint64_t mulmod61(std::uint64_t x, std::uint64_t y) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(x) * y;
  std::uint64_t r = (static_cast<std::uint64_t>(prod) & mersenne61) + static_cast<std::uint64_t>(prod >> 61);
  r = (r & mersenne61) + (r >> 61);
  return r >= mersenne61 ? r - mersenne61 : r;
}

inline void store_le(std::uint8_t* out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint64_t load_le(const std::uint8_t* in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

} // namespace detail

/// Seeded 64-bit pre-hash of a raw token (SipHash-2-4 keyed by the seed).
inline std::uint64_t symbol_prehash(std::uint64_t symbol_seed, std::string_view token) {
  std::array<std::uint8_t, crypto_shorthash_KEYBYTES> key{};
  static_assert(crypto_shorthash_KEYBYTES == 16);
  detail::store_le(key.data(), symbol_seed, 8);
  detail::store_le(key.data() + 8, splitmix64(symbol_seed), 8);
  std::array<std::uint8_t, crypto_shorthash_BYTES> out{};
  crypto_shorthash(out.data(), reinterpret_cast<const unsigned char*>(token.data()), token.size(), key.data());
  return detail::load_le(out.data(), 8);
}

/// Bucket of an already pre-hashed key.
inline std::uint32_t hash_eval_prehashed(const HashSpec& spec, std::uint64_t x) {
  const std::uint64_t xr = x % mersenne61;
  std::uint64_t y = detail::mulmod61(spec.a, xr) + spec.b;
  if (y >= mersenne61) y -= mersenne61;
  return static_cast<std::uint32_t>(y % spec.width);
}

inline std::uint32_t hash_eval(const HashSpec& spec, std::string_view token) {
  return hash_eval_prehashed(spec, symbol_prehash(spec.symbol_seed, token));
}

/// Pre-hash of an integer symbol id, used by the simulators so that
/// generated symbols go through the same hash as real tokens.
inline std::uint64_t symbol_id_prehash(std::uint64_t symbol_seed, std::uint64_t id) {
  std::array<char, 8> bytes{};
  detail::store_le(reinterpret_cast<std::uint8_t*>(bytes.data()), id, 8);
  return symbol_prehash(symbol_seed, std::string_view(bytes.data(), bytes.size()));
}

inline constexpr std::array<char, 4> sketch_magic{'B', 'N', 'P', 'S'};
inline constexpr std::uint8_t sketch_format_version = 1;

/// CRC-32C (Castagnoli), reflected, init and xor-out 0xFFFFFFFF.
inline std::uint32_t crc32c(std::span<const std::uint8_t> bytes) {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

/// Bucket counts C_1..C_J of a token stream. Single writer during ingestion.
class Sketch {
public:
  explicit Sketch(const HashSpec& spec) : spec_(spec), counts_(spec.width, 0) { spec_.validate(); }

  /// Sketch with given counts; n is their sum.
  static Sketch from_counts(const HashSpec& spec, std::vector<std::uint64_t> counts) {
    Sketch s(spec);
    if (counts.size() != spec.width) throw DomainError("from_counts: counts length differs from width");
    std::uint64_t n = 0;
    for (std::uint64_t c : counts) {
      if (c > std::numeric_limits<std::uint64_t>::max() - n) throw DomainError("from_counts: total overflows");
      n += c;
    }
    s.counts_ = std::move(counts);
    s.n_ = n;
    return s;
  }

  void insert(std::string_view token) { add_to_bucket(hash_eval(spec_, token)); }

  void insert_prehashed(std::uint64_t x) { add_to_bucket(hash_eval_prehashed(spec_, x)); }

  void add_to_bucket(std::uint32_t bucket, std::uint64_t times = 1) {
    if (times > std::numeric_limits<std::uint64_t>::max() - n_) throw DomainError("sketch counter overflow");
    counts_.at(bucket) += times;
    n_ += times;
  }

  void merge(const Sketch& other) {
    if (!(spec_ == other.spec_)) throw IncompatibleSketch("cannot merge sketches built with different hash specs");
    if (other.n_ > std::numeric_limits<std::uint64_t>::max() - n_) throw DomainError("sketch counter overflow");
    for (std::size_t j = 0; j < counts_.size(); ++j) counts_[j] += other.counts_[j];
    n_ += other.n_;
  }

  [[nodiscard]] const HashSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::uint32_t width() const noexcept { return spec_.width; }
  [[nodiscard]] std::uint64_t n() const noexcept { return n_; }
  [[nodiscard]] std::span<const std::uint64_t> counts() const noexcept { return counts_; }

  [[nodiscard]] std::uint64_t max_count() const noexcept {
    std::uint64_t m = 0;
    for (std::uint64_t c : counts_) m = std::max(m, c);
    return m;
  }

  // Little-endian layout:
  //   "BNPS" | u8 version | u32 J | u64 a | u64 b | u64 symbol_seed | u64 n
  //   | J x u64 counts | u32 CRC-32C of everything before it
  [[nodiscard]] std::vector<std::uint8_t> serialize() const {
    const std::size_t size = header_size + 8 * counts_.size() + 4;
    std::vector<std::uint8_t> out(size);
    std::uint8_t* p = out.data();
    std::memcpy(p, sketch_magic.data(), 4);
    p[4] = sketch_format_version;
    detail::store_le(p + 5, spec_.width, 4);
    detail::store_le(p + 9, spec_.a, 8);
    detail::store_le(p + 17, spec_.b, 8);
    detail::store_le(p + 25, spec_.symbol_seed, 8);
    detail::store_le(p + 33, n_, 8);
    std::uint8_t* q = p + header_size;
    for (std::uint64_t c : counts_) {
      detail::store_le(q, c, 8);
      q += 8;
    }
    detail::store_le(q, crc32c(std::span(out.data(), size - 4)), 4);
    return out;
  }

  static Sketch deserialize(std::span<const std::uint8_t> bytes) {
    using Kind = SketchFormatError::Kind;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), sketch_magic.data(), 4) != 0) {
      throw SketchFormatError(Kind::bad_magic, "not a sketch file (bad magic)");
    }
    if (bytes.size() < 5) throw SketchFormatError(Kind::truncated, "sketch file truncated");
    if (bytes[4] != sketch_format_version) {
      throw SketchFormatError(Kind::bad_version, "unsupported sketch format version " + std::to_string(bytes[4]));
    }
    if (bytes.size() < header_size) throw SketchFormatError(Kind::truncated, "sketch file truncated");
    const auto width = static_cast<std::uint32_t>(detail::load_le(bytes.data() + 5, 4));
    if (width == 0 || width > max_sketch_width) {
      throw SketchFormatError(Kind::bad_width, "sketch width out of range: " + std::to_string(width));
    }
    const std::size_t expected = header_size + 8 * std::size_t{width} + 4;
    if (bytes.size() < expected) throw SketchFormatError(Kind::truncated, "sketch file truncated");
    if (bytes.size() > expected) throw SketchFormatError(Kind::truncated, "trailing bytes after sketch");
    const auto stored = static_cast<std::uint32_t>(detail::load_le(bytes.data() + expected - 4, 4));
    if (stored != crc32c(bytes.first(expected - 4))) {
      throw SketchFormatError(Kind::checksum_mismatch, "sketch checksum mismatch");
    }
    HashSpec spec;
    spec.width = width;
    spec.a = detail::load_le(bytes.data() + 9, 8);
    spec.b = detail::load_le(bytes.data() + 17, 8);
    spec.symbol_seed = detail::load_le(bytes.data() + 25, 8);
    const std::uint64_t n = detail::load_le(bytes.data() + 33, 8);
    try {
      spec.validate();
    } catch (const DomainError& e) {
      throw SketchFormatError(Kind::bad_width, e.what());
    }
    std::vector<std::uint64_t> counts(width);
    for (std::uint32_t j = 0; j < width; ++j) counts[j] = detail::load_le(bytes.data() + header_size + 8 * j, 8);
    Sketch s = from_counts(spec, std::move(counts));
    if (s.n_ != n) throw SketchFormatError(Kind::inconsistent_total, "stored n differs from sum of counts");
    return s;
  }

  friend bool operator==(const Sketch&, const Sketch&) = default;

private:
  static constexpr std::size_t header_size = 41;

  HashSpec spec_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

} // namespace bnps
