#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace sbp::detail {

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Streaming 64-bit hash. Stable across runs and platforms of equal
/// endianness; not cryptographic.
class Hasher {
 public:
  void add(std::uint64_t word) noexcept { state_ = mix64(state_ ^ mix64(word + length_++)); }

  void add(std::string_view bytes) noexcept {
    add(static_cast<std::uint64_t>(bytes.size()));
    std::size_t i = 0;
    for (; i + 8 <= bytes.size(); i += 8) {
      std::uint64_t w;
      std::memcpy(&w, bytes.data() + i, 8);
      add(w);
    }
    if (i < bytes.size()) {
      std::uint64_t w = 0;
      std::memcpy(&w, bytes.data() + i, bytes.size() - i);
      add(w);
    }
  }

  std::uint64_t digest() const noexcept { return mix64(state_ ^ length_); }

 private:
  std::uint64_t state_ = 0x243f6a8885a308d3ULL;
  std::uint64_t length_ = 0;
};

inline std::uint64_t hash_bytes(std::string_view bytes) noexcept {
  Hasher h;
  h.add(bytes);
  return h.digest();
}

}  // namespace sbp::detail
