// Compares the materialized and factorized paths on one random instance and
// times both.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "tensorattn/tensorattn.hpp"

using namespace tensorattn;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1024;
  const std::size_t d = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 32;
  const auto in = bench_inputs(42, n, d, d);

  auto time = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto out = fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::pair{std::move(out), std::chrono::duration<double, std::milli>(t1 - t0).count()};
  };
  const auto [naive, naive_ms] = time([&] { return tensor_attention_naive(in); });
  const auto [linear, linear_ms] = time([&] { return tensor_attention_linear(in); });

  std::cout << "n=" << n << " d=" << d << '\n'
            << "naive   " << naive_ms << " ms\n"
            << "linear  " << linear_ms << " ms\n"
            << "max |naive - linear| = " << max_abs_diff(naive, linear) << '\n';
}
