#ifndef GATELAB_THEORY_HPP
#define GATELAB_THEORY_HPP

#include "gatelab/linalg.hpp"

namespace gatelab {
namespace theory {

// E[K_0] = d sigma^(2(d-1)) (x^T x o lambda)
Matrix expected_gram(const Matrix& data_x, const Matrix& lambda, int d, double sigma);

// E[K^a_0] = sigma^(2d) (x^T x o delta)
Matrix expected_ka(const Matrix& data_x, const Matrix& delta, int d, double sigma);

// (lambda_self, lambda_cross) = ((mu w)^(d-1), (mu^2 w)^(d-1))
std::pair<double, double> frg_lambda_bar(double mu, int w, int d);

// diagonal 1, off-diagonal mu^(d-1): E[K_0]/d under rank-1 all-ones data
Matrix ideal_frg_gram(int n, double mu, int d);

// { 1 + (n-1) mu^(d-1) } u { 1 - mu^(d-1) } x (n-1), ascending
Vec ideal_frg_spectrum(int n, double mu, int d);

// d_in^2 sigma^(4(d-1)) max{ d^2 w^(2(d-2)+1), d^3 w^(2(d-2)) }.
// Order-of-magnitude diagnostic only; the hidden constant is taken as 1.
double variance_bound(int d_in, double sigma, int d, int w);

// sqrt(1/(mu w)) so that (sigma^2 mu w)^(d-1) = 1
double choice_of_sigma(double mu, int w);

}  // namespace theory
}  // namespace gatelab

#endif
