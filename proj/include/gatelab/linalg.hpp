#ifndef GATELAB_LINALG_HPP
#define GATELAB_LINALG_HPP

#include <cstdint>
#include <cstddef>

#include "gatelab/common.hpp"

namespace gatelab {

// Dense row-major matrix of 64-bit reals. Immutable by convention once
// built; concurrent reads are safe.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
};

Matrix identity(std::size_t n);
Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
Matrix add(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);
bool all_finite(const Matrix& a);
// max |a(i,j) - a(j,i)| <= tol * max(1, ||a||_F)
bool is_symmetric(const Matrix& a, double rel_tol = 1e-10);

// Symmetric eigendecomposition, eigenvalues ascending, eigenvectors as
// columns of an orthonormal matrix.
struct SymEigen {
    Vec eigenvalues;
    Matrix eigenvectors;
};

// Cyclic Jacobi sweeps until max off-diagonal < 1e-12 * ||a||_F or
// 100 sweeps. Throws NumericError on non-symmetric input or
// non-convergence.
SymEigen sym_eigen(const Matrix& a);

// Solves (a + jitter*I) v = y through a Cholesky factorization.
// Throws NumericError if the shifted matrix is not positive definite.
Vec regularized_solve(const Matrix& a, const Vec& y, double jitter);

// Deterministic 64-bit generator: splitmix64 expands the seed into the
// state of xoshiro256**. Same seed gives the same stream on every
// platform. Single-owner: concurrent runs each hold their own Prng.
class Prng {
  public:
    explicit Prng(std::uint64_t seed);

    std::uint64_t next_u64();
    // uniform in [0, 1) with 53 random bits
    double next_unit();
    // uniform in [lo, hi)
    double next_uniform(double lo, double hi);
    // -sigma or +sigma, each with probability 1/2
    double bernoulli_sym(double sigma);
    // Bernoulli(mu) in {0, 1}
    double bernoulli(double mu);
    // standard normal via Box-Muller (deterministic, no cached spare)
    double next_gaussian();

  private:
    std::uint64_t s_[4];
};

inline double prng_bernoulli_sym(Prng& rng, double sigma) { return rng.bernoulli_sym(sigma); }

}  // namespace gatelab

#endif
