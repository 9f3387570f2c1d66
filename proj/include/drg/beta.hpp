#pragma once

namespace drg {

/** Regularized incomplete beta function I_x(a,b).
 *
 * Continued-fraction evaluation (modified Lentz) with the symmetry switch
 * I_x(a,b) = 1 - I_{1-x}(b,a) applied for x > (a+1)/(a+b+2), where the
 * fraction converges fastest.
 *
 * \param a shape, > 0
 * \param b shape, > 0
 * \param x evaluation point in [0,1]
 * \throws std::domain_error on parameters outside the ranges above
 * \throws std::runtime_error if the continued fraction fails to converge
 */
double reg_inc_beta(double a, double b, double x);

/** Quantile of Beta(a,b): the x with I_x(a,b) = q.
 *
 * Bisection on reg_inc_beta. The bracket is halved until it can no longer
 * be split in double precision, so the result is accurate to the precision
 * of the CDF evaluation itself. Quantiles that underflow the double range
 * come back as the correctly rounded boundary.
 *
 * \param q target CDF value in [0,1]
 * \throws std::domain_error on invalid parameters
 */
double beta_quantile(double a, double b, double q);

}  // namespace drg
