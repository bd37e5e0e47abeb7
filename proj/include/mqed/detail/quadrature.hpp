#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace mqed::detail {

// 15-point Kronrod / 7-point Gauss nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class Value>
struct QuadratureResult {
  Value value;
  double error = 0.0;
  int panels = 0;
  bool converged = false;
};

/// Adaptive Gauss-Kronrod (7/15) for vector-valued integrands. `Value` is any
/// Eigen column vector; `norm` maps a Value to a non-negative scalar used for
/// error control. Panels are bisected worst-first until the summed error
/// estimate drops below max(abs_tol, rel_tol * norm(total)), or max_panels is
/// reached. `min_panels` forces an initial uniform split.
template <class Value, class F, class Norm>
QuadratureResult<Value> gauss_kronrod(F&& f, double a, double b, double rel_tol, double abs_tol,
                                      int max_panels, int min_panels, Norm&& norm) {
  struct Panel {
    double a, b;
    Value value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    Value center = f(mid);
    Value kronrod = center * kKronrodWeights[7];
    Value gauss = center * kGaussWeights[3];
    for (int i = 0; i < 7; ++i) {
      const double dx = half * kKronrodNodes[i];
      Value sum = f(mid - dx) + f(mid + dx);
      kronrod += sum * kKronrodWeights[i];
      if (i % 2 == 1) gauss += sum * kGaussWeights[i / 2];
    }
    kronrod *= half;
    gauss *= half;
    return Panel{lo, hi, kronrod, norm(Value(kronrod - gauss))};
  };

  std::priority_queue<Panel> heap;
  const int n0 = std::max(1, min_panels);
  Value total;
  double total_err = 0.0;
  for (int i = 0; i < n0; ++i) {
    Panel p = eval(a + (b - a) * i / n0, a + (b - a) * (i + 1) / n0);
    total = (i == 0) ? p.value : Value(total + p.value);
    total_err += p.error;
    heap.push(std::move(p));
  }
  int panels = n0;
  auto tolerance = [&] { return std::max(abs_tol, rel_tol * norm(total)); };
  while (total_err > tolerance() && panels < max_panels) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = eval(worst.a, mid);
    Panel right = eval(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++panels;
  }
  // Recompute sums from scratch to shed accumulated round-off.
  Value sum = total * 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, panels, err <= std::max(abs_tol, rel_tol * norm(sum))};
}

}  // namespace mqed::detail
