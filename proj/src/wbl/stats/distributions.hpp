#pragma once

namespace wbl::stats {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
// Absolute error below 1e-12 for the parameter ranges used here.
double incomplete_beta(double a, double b, double x);

// Student t with `df` degrees of freedom.
double student_t_cdf(double t, double df);
double student_t_two_sided_p(double t, double df);

// Upper tail of F(d1, d2).
double f_survival(double f, double d1, double d2);

double normal_cdf(double z);
double normal_two_sided_p(double z);

}  // namespace wbl::stats
