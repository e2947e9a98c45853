#pragma once

#include <cmath>

// Adaptive Gauss-Kronrod (G7/K15) quadrature for smooth integrands.

namespace nvpd {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

// {node, Gauss-7 weight, Kronrod-15 weight} on [-1, 1], positive half.
inline constexpr double kG7K15[8][3] = {
    {0.000000000000000000000000000000000, 0.417959183673469387755102040816327,
     0.209482141084727828012999174891714},
    {0.405845151377397166906606412076961, 0.381830050505118944950369775488975,
     0.190350578064785409913256402421014},
    {0.741531185599394439863864773280788, 0.279705391489276667901467771423780,
     0.140653259715525918745189590510238},
    {0.949107912342758524526189684047851, 0.129484966168869693270611432679082,
     0.063092092629978553290700663189204},
    {0.207784955007898467600689403773245, 0.0,
     0.204432940075298892414161999234649},
    {0.586087235467691130294144838258730, 0.0,
     0.169004726639267902826583426598550},
    {0.864864423359769072789712788640926, 0.0,
     0.104790010322250183839876322541518},
    {0.991455371120812639206854697526329, 0.0,
     0.022935322010529224963732008058970}};

template <class F>
double g7k15(const F& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double gauss = kG7K15[0][1] * f0;
  double kronrod = kG7K15[0][2] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kG7K15[i][0];
    const double fi = f(mid + dx) + f(mid - dx);
    gauss += kG7K15[i][1] * fi;
    kronrod += kG7K15[i][2] * fi;
  }
  gauss *= half;
  kronrod *= half;
  err = std::fabs(kronrod - gauss);
  return kronrod;
}

template <class F>
void integrate_segment(const F& f, double a, double b, double tol, int depth,
                       QuadratureResult& out) {
  double err = 0.0;
  const double value = g7k15(f, a, b, err);
  if (err <= tol || depth >= 60) {
    if (err > tol) out.converged = false;
    out.value += value;
    out.error_estimate += err;
    return;
  }
  const double mid = 0.5 * (a + b);
  integrate_segment(f, a, mid, 0.5 * tol, depth + 1, out);
  integrate_segment(f, mid, b, 0.5 * tol, depth + 1, out);
}

}  // namespace detail

// Integrates f over [a, b] to max(abs_tol, rel_tol * |first estimate|).
// |K15 - G7| is used directly as the per-segment error bound, which
// overestimates and therefore subdivides conservatively.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    double rel_tol = 1e-12,
                                    double abs_tol = 1e-300) {
  QuadratureResult out;
  if (!(b > a)) return out;
  double rough_err = 0.0;
  const double rough = detail::g7k15(f, a, b, rough_err);
  const double tol = std::max(abs_tol, rel_tol * std::fabs(rough));
  detail::integrate_segment(f, a, b, tol, 0, out);
  return out;
}

}  // namespace nvpd
