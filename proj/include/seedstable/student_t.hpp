#ifndef SEEDSTABLE_STUDENT_T_HPP
#define SEEDSTABLE_STUDENT_T_HPP

namespace seedstable {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (Lentz's method).
double incomplete_beta(double a, double b, double x);

// CDF of Student's t with df degrees of freedom.
double student_t_cdf(double t, int df);

// Quantile of Student's t: inverse CDF via the incomplete beta plus monotone
// root refinement. Absolute error <= 1e-8.
double t_quantile(int df, double prob);

}  // namespace seedstable

#endif
