#include "gatelab/theory.hpp"

#include <cmath>

namespace gatelab {
namespace theory {

namespace {

Matrix data_gram_local(const Matrix& x) {
    Matrix g(x.cols, x.cols);
    for (std::size_t s = 0; s < x.cols; ++s)
        for (std::size_t sp = s; sp < x.cols; ++sp) {
            double v = 0.0;
            for (std::size_t i = 0; i < x.rows; ++i) v += x(i, s) * x(i, sp);
            g(s, sp) = g(sp, s) = v;
        }
    return g;
}

}  // namespace

Matrix expected_gram(const Matrix& data_x, const Matrix& lambda, int d, double sigma) {
    if (lambda.rows != data_x.cols || lambda.cols != data_x.cols)
        throw DimensionError("expected_gram: lambda must be n x n");
    const double c = d * std::pow(sigma, 2.0 * (d - 1));
    return scale(hadamard(data_gram_local(data_x), lambda), c);
}

Matrix expected_ka(const Matrix& data_x, const Matrix& delta, int d, double sigma) {
    if (delta.rows != data_x.cols || delta.cols != data_x.cols)
        throw DimensionError("expected_ka: delta must be n x n");
    const double c = std::pow(sigma, 2.0 * d);
    return scale(hadamard(data_gram_local(data_x), delta), c);
}

std::pair<double, double> frg_lambda_bar(double mu, int w, int d) {
    if (mu <= 0.0 || mu >= 1.0) throw NumericError("frg_lambda_bar: mu must be in (0,1)");
    const double self = std::pow(mu * w, d - 1);
    const double cross = std::pow(mu * mu * w, d - 1);
    return {self, cross};
}

Matrix ideal_frg_gram(int n, double mu, int d) {
    if (n < 1) throw DimensionError("ideal_frg_gram: n must be >= 1");
    const double off = std::pow(mu, d - 1);
    Matrix m(n, n, off);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec ideal_frg_spectrum(int n, double mu, int d) {
    if (n < 1) throw DimensionError("ideal_frg_spectrum: n must be >= 1");
    const double off = std::pow(mu, d - 1);
    Vec evals(n, 1.0 - off);
    evals[n - 1] = 1.0 + (n - 1) * off;
    return evals;
}

double variance_bound(int d_in, double sigma, int d, int w) {
    const double s4 = std::pow(sigma, 4.0 * (d - 1));
    const double a = static_cast<double>(d) * d * std::pow(w, 2.0 * (d - 2) + 1.0);
    const double b = static_cast<double>(d) * d * d * std::pow(w, 2.0 * (d - 2));
    return static_cast<double>(d_in) * d_in * s4 * std::max(a, b);
}

double choice_of_sigma(double mu, int w) {
    if (mu <= 0.0 || mu > 1.0) throw NumericError("choice_of_sigma: mu must be in (0,1]");
    if (w < 1) throw DimensionError("choice_of_sigma: w must be >= 1");
    return std::sqrt(1.0 / (mu * w));
}

}  // namespace theory
}  // namespace gatelab
