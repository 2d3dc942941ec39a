// The 2x2 example: Q = [[1,0],[1,1]], K = [[1,1],[0,1]], V = [[1,2],[3,4]].

#include <iostream>

#include "tensorattn/tensorattn.hpp"

using namespace tensorattn;

static void print(const char* label, const RealMatrix& m) {
  std::cout << label << ":\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double x : m.row(i)) std::cout << "  " << x;
    std::cout << '\n';
  }
}

int main() {
  const RealAttnInputs in(RealMatrix{{1, 0}, {1, 1}}, RealMatrix{{1, 1}, {0, 1}}, RealMatrix{{1, 2}, {3, 4}});
  const auto mid = attention_intermediates(in.q(), in.k(), TensorOpConfig{});
  print("A = Q K^T", mid.a);
  print("T / tr(T)", mid.t_hat);
  print("trace-normalized output", tensor_attention_linear(in));

  TensorOpConfig row;
  row.normalization = Normalization::Row;
  print("row-normalized output", tensor_attention_naive(in, row));
  print("tensor interaction", tensor_interaction(in));
}
