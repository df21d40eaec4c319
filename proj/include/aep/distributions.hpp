#pragma once

namespace aep::dist {

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

// Upper tail probabilities.
double chi_square_sf(double x, double df);
double f_sf(double x, double df1, double df2);

}  // namespace aep::dist
