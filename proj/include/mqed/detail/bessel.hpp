#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace mqed::detail {

using cplx = std::complex<double>;

/// J_0, J_1, J_2 at a complex argument with small imaginary part (the
/// deformed Sommerfeld path never strays far from the real axis).
/// Power series below |z| = 17, Hankel asymptotics above.
inline std::array<cplx, 3> bessel_j012(cplx z) {
  if (z.imag() == 0.0) {
    const double x = z.real();
    const double sign1 = x < 0 ? -1.0 : 1.0;
    const double ax = std::abs(x);
    return {cplx(std::cyl_bessel_j(0.0, ax)), cplx(sign1 * std::cyl_bessel_j(1.0, ax)),
            cplx(std::cyl_bessel_j(2.0, ax))};
  }
  std::array<cplx, 3> out{};
  if (std::abs(z) < 17.0) {
    const cplx half = 0.5 * z;
    const cplx q = -half * half;
    for (int n = 0; n < 3; ++n) {
      // (z/2)^n / n!
      cplx term = 1.0;
      for (int k = 1; k <= n; ++k) term *= half / static_cast<double>(k);
      cplx sum = term;
      for (int m = 1; m < 200; ++m) {
        term *= q / (static_cast<double>(m) * static_cast<double>(m + n));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
      }
      out[n] = sum;
    }
    return out;
  }
  const double pi = 3.14159265358979323846;
  for (int n = 0; n < 3; ++n) {
    const double mu = 4.0 * n * n;
    const cplx inv8z = 1.0 / (8.0 * z);
    cplx p = 1.0, q = 0.0;
    cplx term = 1.0;
    double prev = 1e300;
    for (int k = 1; k < 60; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= (mu - odd * odd) * inv8z / static_cast<double>(k);
      if (std::abs(term) > prev) break;
      prev = std::abs(term);
      if (k % 2 == 1) {
        q += (k % 4 == 1 ? 1.0 : -1.0) * term;
      } else {
        p += (k % 4 == 2 ? -1.0 : 1.0) * term;
      }
      if (prev < 1e-17) break;
    }
    const cplx chi = z - (0.5 * n + 0.25) * pi;
    out[n] = std::sqrt(2.0 / (pi * z)) * (p * std::cos(chi) - q * std::sin(chi));
  }
  return out;
}

}  // namespace mqed::detail
