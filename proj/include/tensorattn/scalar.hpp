#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <type_traits>

namespace tensorattn {

using complex128 = std::complex<double>;

/// The two scalar fields the library works over: real64 and complex128.
template <typename T>
concept Scalar = std::same_as<T, double> || std::same_as<T, complex128>;

template <Scalar T>
inline constexpr bool is_complex_v = std::same_as<T, complex128>;

template <Scalar T>
constexpr T conj(T x) noexcept {
  if constexpr (is_complex_v<T>) {
    return std::conj(x);
  } else {
    return x;
  }
}

/// |x|^2, computed without a square root.
template <Scalar T>
constexpr double abs2(T x) noexcept {
  if constexpr (is_complex_v<T>) {
    return x.real() * x.real() + x.imag() * x.imag();
  } else {
    return x * x;
  }
}

template <Scalar T>
constexpr double real_part(T x) noexcept {
  if constexpr (is_complex_v<T>) {
    return x.real();
  } else {
    return x;
  }
}

template <Scalar T>
inline bool is_finite(T x) noexcept {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  } else {
    return std::isfinite(x);
  }
}

}  // namespace tensorattn
