#include <cmath>

#include "doctest.h"
#include "gatelab/linalg.hpp"

using namespace gatelab;

TEST_SUITE_BEGIN("linalg");

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Prng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.next_uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
    Prng rng(1);
    const Matrix a = random_matrix(2, 2, rng);
    const Matrix prod = matmul(identity(2), a);
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(prod.data[i] == a.data[i]);

    Matrix b(2, 2);
    b(0, 0) = 1; b(0, 1) = 2; b(1, 0) = 3; b(1, 1) = 4;
    Matrix ones(2, 1, 1.0);
    const Matrix v = matmul(b, ones);
    CHECK(v(0, 0) == 3.0);
    CHECK(v(1, 0) == 7.0);
}

TEST_CASE("matmul transpose identity on random 5x5") {
    Prng rng(7);
    const Matrix a = random_matrix(5, 5, rng);
    const Matrix b = random_matrix(5, 5, rng);
    const Matrix lhs = transpose(matmul(a, b));
    const Matrix rhs = matmul(transpose(b), transpose(a));
    double err = 0;
    for (std::size_t i = 0; i < lhs.data.size(); ++i)
        err = std::max(err, std::fabs(lhs.data[i] - rhs.data[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("matmul dimension mismatch") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
}

TEST_CASE("hadamard") {
    Prng rng(3);
    const Matrix a = random_matrix(3, 3, rng);
    const Matrix ones(3, 3, 1.0);
    const Matrix zeros(3, 3, 0.0);
    CHECK(hadamard(a, ones).data == a.data);
    for (double v : hadamard(a, zeros).data) CHECK(v == 0.0);

    Matrix x(2, 2), y(2, 2);
    x(0, 0) = 1; x(0, 1) = 2; x(1, 0) = 3; x(1, 1) = 4;
    y(0, 0) = 2; y(1, 1) = 2;
    const Matrix h = hadamard(x, y);
    CHECK(h(0, 0) == 2.0);
    CHECK(h(0, 1) == 0.0);
    CHECK(h(1, 1) == 8.0);
    CHECK_THROWS_AS(hadamard(Matrix(1, 2), Matrix(2, 1)), DimensionError);
}

TEST_CASE("sym_eigen identity") {
    const SymEigen eig = sym_eigen(identity(3));
    for (double v : eig.eigenvalues) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sym_eigen ideal FRG matrix n=3 mu=0.5 d=2") {
    // diag 1, off-diag 0.5: spectrum {1 - mu, 1 - mu, 1 + 2 mu}
    Matrix a(3, 3, 0.5);
    for (int i = 0; i < 3; ++i) a(i, i) = 1.0;
    const SymEigen eig = sym_eigen(a);
    CHECK(eig.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(eig.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(eig.eigenvalues[2] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("sym_eigen recovers a constructed spectrum") {
    // random orthonormal Q from Jacobi of a random symmetric matrix
    Prng rng(11);
    Matrix s(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i; j < 4; ++j) s(i, j) = s(j, i) = rng.next_uniform(-1, 1);
    const Matrix q = sym_eigen(s).eigenvectors;

    Matrix lam(4, 4);
    for (int i = 0; i < 4; ++i) lam(i, i) = i + 1.0;
    const Matrix a = matmul(matmul(q, lam), transpose(q));
    const SymEigen eig = sym_eigen(a);
    for (int i = 0; i < 4; ++i)
        CHECK(std::fabs(eig.eigenvalues[i] - (i + 1.0)) < 1e-9);

    // orthonormality and reconstruction
    const Matrix qtq = matmul(transpose(eig.eigenvectors), eig.eigenvectors);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(std::fabs(qtq(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);

    Matrix recon(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double v = 0;
            for (int k = 0; k < 4; ++k)
                v += eig.eigenvectors(i, k) * eig.eigenvalues[k] * eig.eigenvectors(j, k);
            recon(i, j) = v;
        }
    double err = 0;
    for (std::size_t i = 0; i < recon.data.size(); ++i)
        err = std::max(err, std::fabs(recon.data[i] - a.data[i]));
    CHECK(err <= 1e-9 * frobenius_norm(a));
}

TEST_CASE("sym_eigen trace preservation on random symmetric matrices") {
    Prng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 2 + trial;
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.next_uniform(-2, 2);
        const SymEigen eig = sym_eigen(a);
        double sum = 0;
        for (double v : eig.eigenvalues) sum += v;
        CHECK(std::fabs(sum - trace(a)) <= 1e-9 * std::max(1.0, frobenius_norm(a)));
    }
}

TEST_CASE("sym_eigen rejects non-symmetric input") {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(sym_eigen(a), NumericError);
}

TEST_CASE("regularized_solve basics") {
    Vec v = regularized_solve(identity(2), {1, 1}, 0.0);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(1.0));

    v = regularized_solve(scale(identity(2), 2.0), {2, 4}, 0.0);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(2.0));
}

TEST_CASE("regularized_solve on singular matrix with jitter") {
    const Matrix a(2, 2, 1.0);  // ones, singular
    CHECK_THROWS_AS(regularized_solve(a, {1, 1}, 0.0), NumericError);
    const Vec v = regularized_solve(a, {1, 1}, 1e-8);
    // residual of (a + jI) v = y
    for (int i = 0; i < 2; ++i) {
        const double r = (v[0] + v[1]) + 1e-8 * v[i] - 1.0;
        CHECK(std::fabs(r) < 1e-6);
    }
}

TEST_CASE("regularized_solve agrees with eigen-based inverse") {
    Prng rng(5);
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i; j < 3; ++j) a(i, j) = a(j, i) = rng.next_uniform(-1, 1);
    // make well conditioned PSD: a <- a a^T + I
    a = add(matmul(a, transpose(a)), identity(3));
    const Vec y = {1.0, -2.0, 0.5};
    const Vec v = regularized_solve(a, y, 0.0);

    const SymEigen eig = sym_eigen(a);
    Vec v2(3, 0.0);
    for (int k = 0; k < 3; ++k) {
        double uy = 0;
        for (int i = 0; i < 3; ++i) uy += eig.eigenvectors(i, k) * y[i];
        for (int i = 0; i < 3; ++i) v2[i] += eig.eigenvectors(i, k) * uy / eig.eigenvalues[k];
    }
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(v[i] - v2[i]) < 1e-8);
}

TEST_CASE("prng determinism per seed") {
    Prng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Prng c(43);
    bool all_same = true;
    Prng a2(42);
    for (int i = 0; i < 10; ++i) all_same = all_same && (a2.next_u64() == c.next_u64());
    CHECK_FALSE(all_same);
}

TEST_CASE("bernoulli_sym value set and mean") {
    Prng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.bernoulli_sym(0.1);
        CHECK((v == 0.1 || v == -0.1));
    }
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += rng.bernoulli_sym(1.0);
    CHECK(std::fabs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK_THROWS_AS(rng.bernoulli_sym(0.0), NumericError);
}

TEST_CASE("fixed seed reproduces bernoulli_sym stream") {
    Prng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.bernoulli_sym(1.0) == b.bernoulli_sym(1.0));
    // free-function form
    Prng c(42), d(42);
    for (int i = 0; i < 10; ++i) CHECK(prng_bernoulli_sym(c, 0.5) == d.bernoulli_sym(0.5));
}

TEST_SUITE_END();
