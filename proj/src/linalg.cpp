#include "gatelab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gatelab {

Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw DimensionError("matmul: inner dimensions differ (" + std::to_string(a.cols) +
                             " vs " + std::to_string(b.rows) + ")");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            double* crow = &c.data[i * c.cols];
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionError("hadamard: shape mismatch");
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] * b.data[i];
    return c;
}

Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    for (double& v : out.data) v *= c;
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw DimensionError("add: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

double trace(const Matrix& a) {
    double s = 0.0;
    const std::size_t n = std::min(a.rows, a.cols);
    for (std::size_t i = 0; i < n; ++i) s += a(i, i);
    return s;
}

bool all_finite(const Matrix& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows != a.cols) return false;
    const double scale = std::max(1.0, frobenius_norm(a));
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j)
            if (std::fabs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    return true;
}

namespace {

double off_diagonal_max(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            if (i != j) m = std::max(m, std::fabs(a(i, j)));
    return m;
}

}  // namespace

SymEigen sym_eigen(const Matrix& a) {
    if (a.rows != a.cols) throw DimensionError("sym_eigen: matrix is not square");
    if (!all_finite(a)) throw NumericError("sym_eigen: non-finite entries");
    if (!is_symmetric(a)) throw NumericError("sym_eigen: matrix is not symmetric");

    const std::size_t n = a.rows;
    Matrix m = a;
    Matrix q = identity(n);
    const double stop = 1e-12 * std::max(frobenius_norm(a), 1e-300);

    const int max_sweeps = 100;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_diagonal_max(m) < stop) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double apq = m(p, r);
                if (std::fabs(apq) < stop * 1e-3) continue;
                const double app = m(p, p);
                const double aqq = m(r, r);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // rotate rows/columns p and r of m
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, r);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, r) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(r, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(r, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q(k, p);
                    const double qkq = q(k, r);
                    q(k, p) = c * qkp - s * qkq;
                    q(k, r) = s * qkp + c * qkq;
                }
            }
        }
    }
    if (sweep == max_sweeps && off_diagonal_max(m) >= stop)
        throw NumericError("sym_eigen: Jacobi iteration did not converge in 100 sweeps");

    // sort ascending, permuting eigenvector columns along
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });

    SymEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = m(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = q(i, order[j]);
    }
    return out;
}

Vec regularized_solve(const Matrix& a, const Vec& y, double jitter) {
    if (a.rows != a.cols) throw DimensionError("regularized_solve: matrix is not square");
    if (a.rows != y.size()) throw DimensionError("regularized_solve: rhs length mismatch");
    if (jitter < 0.0) throw NumericError("regularized_solve: negative jitter");

    const std::size_t n = a.rows;
    // Cholesky of a + jitter*I
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = j; i < n; ++i) {
            double sum = a(i, j) + (i == j ? jitter : 0.0);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0)
                    throw NumericError(
                        "regularized_solve: matrix not positive definite at the given jitter");
                l(j, j) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    // forward then backward substitution
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = y[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * v[k];
        v[i] = sum / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double sum = v[ii];
        for (std::size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * v[k];
        v[ii] = sum / l(ii, ii);
    }
    return v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Prng::Prng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (int i = 0; i < 4; ++i) s_[i] = splitmix64(sm);
}

std::uint64_t Prng::next_u64() {
    // xoshiro256**
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Prng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

double Prng::bernoulli_sym(double sigma) {
    if (sigma <= 0.0) throw NumericError("bernoulli_sym: sigma must be positive");
    return (next_u64() >> 63) ? sigma : -sigma;
}

double Prng::bernoulli(double mu) { return next_unit() < mu ? 1.0 : 0.0; }

double Prng::next_gaussian() {
    // Box-Muller; u clamped away from 0 so log stays finite
    double u = next_unit();
    if (u < 1e-300) u = 1e-300;
    const double v = next_unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
}

}  // namespace gatelab
