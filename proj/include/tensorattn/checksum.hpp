#pragma once

#include <cstdint>
#include <cstring>
#include <span>

#include "tensorattn/dense.hpp"

namespace tensorattn {

/// Incremental 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(const void* bytes, std::size_t len) noexcept {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }

  template <class T>
  void update(std::span<const T> values) noexcept {
    update(values.data(), values.size_bytes());
  }

  template <Scalar T>
  void update(const Matrix<T>& m) noexcept {
    update(m.data());
  }

  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

template <Scalar T>
std::uint64_t checksum(const Matrix<T>& m) noexcept {
  Fnv1a h;
  h.update(m);
  return h.value();
}

}  // namespace tensorattn
