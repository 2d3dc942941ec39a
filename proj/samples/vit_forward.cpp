// Runs the ViT encoder once per mechanism with the same seed.

#include <cmath>
#include <iostream>

#include "tensorattn/tensorattn.hpp"

using namespace tensorattn;

int main() {
  for (const auto& m : mechanisms()) {
    ViTConfig cfg;
    cfg.mechanism = m.id;
    const auto params = vit_init(cfg, 7);
    try {
      const auto y = vit_forward(params, random_patches(cfg, 7));
      double norm = 0.0;
      for (double v : y) norm += v * v;
      std::cout << m.id << ": |y| = " << std::sqrt(norm) << '\n';
    } catch (const Error& e) {
      std::cout << m.id << ": " << e.what() << '\n';
    }
  }
}
