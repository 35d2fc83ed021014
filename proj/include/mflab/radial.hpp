#pragma once

#include <functional>

namespace mflab::radial {

/// Surface area of the unit sphere in R^d (d = 1, 2, 3).
double sphere_area(int d);

/// Integral over R^d of f(|x|), by composite Simpson on [0, rmax].
double integral(int d, const std::function<double(double)>& f, double rmax, int intervals = 20000);

/// Fourier transform of the radial function f(|x|) in R^d at wave number k.
double fourier(int d, const std::function<double(double)>& f, double k, double rmax,
               int min_intervals = 4000);

/// Simpson weights for n+1 equispaced nodes (n even) of spacing h.
double simpson_weight(int i, int n, double h);

}  // namespace mflab::radial
