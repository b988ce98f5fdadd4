#pragma once

#include <array>
#include <cstddef>

namespace bel {

template <class Fn>
double gauss_integral(Fn&& fn, double a, double b, std::size_t panels) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                           0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                           0.2369268850561891, 0.2369268850561891};
  const double h = (b - a) / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = a + (static_cast<double>(k) + 0.5) * h;
    double panel = 0.0;
    for (std::size_t j = 0; j < 5; ++j) panel += w[j] * fn(mid + 0.5 * h * x[j]);
    acc += 0.5 * h * panel;
  }
  return acc;
}

}  // namespace bel
