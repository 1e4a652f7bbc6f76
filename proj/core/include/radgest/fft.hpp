#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "radgest/tensor.hpp"

namespace radgest {

// Complex array stored as separate real and imaginary planes.
struct ComplexTensor {
  Shape shape;
  std::vector<double> re;
  std::vector<double> im;

  ComplexTensor() = default;
  explicit ComplexTensor(Shape s);
  ComplexTensor(Shape s, std::vector<double> real, std::vector<double> imag);

  std::size_t numel() const { return re.size(); }
};

// Unnormalized forward DFT X[k] = sum_m x[m] exp(-2 pi i k m / L) along `axis`.
// Radix-2 for power-of-two lengths, Bluestein otherwise.
ComplexTensor fft_1d(const ComplexTensor& x, std::size_t axis);

// In-place transform of one contiguous sequence. `inverse` flips the exponent
// sign; no 1/L scaling is applied in either direction.
void fft_inplace(std::span<double> re, std::span<double> im, bool inverse = false);

// Explicit conversions to/from a real tensor with a leading axis of size 2.
Tensor complex_to_tensor(const ComplexTensor& x);
ComplexTensor tensor_to_complex(const Tensor& t);

}  // namespace radgest
