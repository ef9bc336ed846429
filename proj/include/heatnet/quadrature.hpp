#pragma once

#include <functional>

namespace heatnet {

/// Adaptive Gauss-Kronrod (G7,K15) quadrature over [a, b].
///
/// Globally adaptive: keeps a worst-first queue of subintervals and bisects
/// until the summed error estimate drops below max(abs_tol, 1e-15*|result|)
/// or the interval budget is exhausted (which throws). Deterministic.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_intervals = 4000);

}  // namespace heatnet
