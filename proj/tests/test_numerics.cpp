#include <doctest.h>

#include <cmath>
#include <vector>

#include "embkit/matrix.hpp"
#include "embkit/rng.hpp"

using namespace embkit;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.next_gaussian();
    return m;
}

// Entrywise covariance definition, independent of the implementation.
Matrix covariance_oracle(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double ma = 0.0, mb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                ma += x(i, a);
                mb += x(i, b);
            }
            ma /= n;
            mb /= n;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += (x(i, a) - ma) * (x(i, b) - mb);
            }
            cov(a, b) = s / (n - 1);
        }
    }
    return cov;
}

// Full pairwise-distance sort oracle for k-NN.
NeighborTable knn_oracle(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    NeighborTable t;
    t.k = k;
    t.indices.resize(n * k);
    t.distances.resize(n * k);
    t.has_duplicate.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            all.emplace_back(squared_distance(x.row_ptr(i), x.row_ptr(j), x.cols()), j);
        }
        std::sort(all.begin(), all.end());
        for (std::size_t j = 0; j < k; ++j) {
            t.indices[i * k + j] = all[j].second;
            t.distances[i * k + j] = std::sqrt(all[j].first);
        }
        t.has_duplicate[i] = (t.distances[i * k] == 0.0);
    }
    return t;
}

}  // namespace

TEST_CASE("covariance of a one-axis spread") {
    Matrix x(2, 2, {0, 0, 2, 0});
    const Matrix cov = covariance(x);
    CHECK(cov(0, 0) == doctest::Approx(2.0));
    CHECK(cov(0, 1) == doctest::Approx(0.0));
    CHECK(cov(1, 0) == doctest::Approx(0.0));
    CHECK(cov(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("covariance of identical rows is zero") {
    Matrix x(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        x(i, 0) = 1.5;
        x(i, 1) = -2.0;
        x(i, 2) = 7.0;
    }
    const Matrix cov = covariance(x);
    for (double v : cov.data()) CHECK(v == 0.0);
}

TEST_CASE("covariance matches the entrywise definition") {
    const Matrix x = random_matrix(20, 5, 11);
    const Matrix cov = covariance(x);
    const Matrix oracle = covariance_oracle(x);
    for (std::size_t i = 0; i < cov.data().size(); ++i) {
        CHECK(cov.data()[i] == doctest::Approx(oracle.data()[i]).epsilon(1e-12));
    }
    // Symmetric within 1e-12.
    for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t b = 0; b < 5; ++b) {
            CHECK(std::abs(cov(a, b) - cov(b, a)) <= 1e-12);
        }
    }
}

TEST_CASE("covariance rejects fewer than 2 rows") {
    Matrix x(1, 3, {1, 2, 3});
    CHECK_THROWS_AS(covariance(x), DegenerateInputError);
}

TEST_CASE("covariance is positive semi-definite") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix x = random_matrix(15, 6, 100 + seed);
        const EigenResult eig = sym_eigen(covariance(x));
        for (double v : eig.values) CHECK(v >= -1e-9);
    }
}

TEST_CASE("sym_eigen on a diagonal matrix sorts the spectrum") {
    Matrix m(3, 3);
    m(0, 0) = 3;
    m(1, 1) = 1;
    m(2, 2) = 2;
    const EigenResult eig = sym_eigen(m);
    CHECK(eig.values[0] == doctest::Approx(3.0));
    CHECK(eig.values[1] == doctest::Approx(2.0));
    CHECK(eig.values[2] == doctest::Approx(1.0));
    // Axis permutation: column 0 is e0, column 1 is e2, column 2 is e1.
    CHECK(eig.vectors(0, 0) == doctest::Approx(1.0));
    CHECK(eig.vectors(2, 1) == doctest::Approx(1.0));
    CHECK(eig.vectors(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen closed-form 2x2") {
    Matrix m(2, 2, {2, 1, 1, 2});
    const EigenResult eig = sym_eigen(m);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.vectors(0, 0) == doctest::Approx(inv_sqrt2));
    CHECK(eig.vectors(1, 0) == doctest::Approx(inv_sqrt2));
    CHECK(std::abs(eig.vectors(0, 1)) == doctest::Approx(inv_sqrt2));
    CHECK(std::abs(eig.vectors(1, 1)) == doctest::Approx(inv_sqrt2));
    CHECK(eig.vectors(0, 1) * eig.vectors(1, 1) < 0.0);
}

TEST_CASE("sym_eigen reconstruction and orthonormality on random 8x8") {
    Matrix g = random_matrix(8, 8, 3);
    Matrix m(8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) m(i, j) = 0.5 * (g(i, j) + g(j, i));
    }
    const EigenResult eig = sym_eigen(m);

    // V^T V = I within 1e-8.
    const Matrix vtv = matmul(transpose(eig.vectors), eig.vectors);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(std::abs(vtv(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
    }

    // ||V L V^T - M||_inf < 1e-8.
    Matrix vl = eig.vectors;
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) vl(i, j) *= eig.values[j];
    }
    const Matrix rec = matmul(vl, transpose(eig.vectors));
    for (std::size_t i = 0; i < rec.data().size(); ++i) {
        CHECK(std::abs(rec.data()[i] - m.data()[i]) < 1e-8);
    }

    // Eigenvalue sum equals trace within 1e-8 * |trace|.
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < 8; ++i) trace += m(i, i);
    for (double v : eig.values) sum += v;
    CHECK(std::abs(sum - trace) <= 1e-8 * std::abs(trace) + 1e-12);
}

TEST_CASE("sym_eigen rejects non-symmetric input") {
    Matrix m(2, 2, {1, 2, 0, 1});
    CHECK_THROWS_AS(sym_eigen(m), ContractViolationError);
}

TEST_CASE("knn on collinear points") {
    Matrix x(3, 1, {0, 1, 3});
    const NeighborTable t = knn(x, 2);
    CHECK(t.neighbor(1, 0) == 0);
    CHECK(t.distance(1, 0) == doctest::Approx(1.0));
    CHECK(t.neighbor(1, 1) == 2);
    CHECK(t.distance(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("knn flags duplicate rows") {
    Matrix x(4, 2, {0, 0, 0, 0, 5, 5, 9, 9});
    const NeighborTable t = knn(x, 2);
    CHECK(t.has_duplicate[0]);
    CHECK(t.has_duplicate[1]);
    CHECK(t.distance(0, 0) == 0.0);
    CHECK(t.neighbor(0, 0) == 1);
    CHECK(t.neighbor(1, 0) == 0);  // lowest index wins
    CHECK_FALSE(t.has_duplicate[2]);
}

TEST_CASE("knn matches the brute-force oracle") {
    for (std::size_t n : {20u, 77u, 200u, 500u}) {
        const Matrix x = random_matrix(n, 6, 1000 + n);
        const std::size_t k = 5;
        const NeighborTable got = knn(x, k);
        const NeighborTable want = knn_oracle(x, k);
        CHECK(got.indices == want.indices);
        for (std::size_t i = 0; i < got.distances.size(); ++i) {
            CHECK(got.distances[i] == doctest::Approx(want.distances[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("knn rejects k >= N") {
    Matrix x(3, 1, {0, 1, 2});
    CHECK_THROWS_AS(knn(x, 3), InvalidParameterError);
    CHECK_THROWS_AS(knn(x, 0), InvalidParameterError);
}

TEST_CASE("cosine similarity basics") {
    std::vector<double> a{1, 1}, b{1, 0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    std::vector<double> e0{1, 0}, e1{0, 1};
    CHECK(cosine_similarity(e0, e1) == doctest::Approx(0.0));
    CHECK(cosine_similarity(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)));
    std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(cosine_similarity(a, zero), DegenerateInputError);
}

TEST_CASE("cosine similarity is scale invariant") {
    CounterRng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(5), b(5), sa(5), sb(5);
        const double alpha = 0.1 + 5.0 * rng.next_double();
        const double beta = 0.1 + 5.0 * rng.next_double();
        for (std::size_t j = 0; j < 5; ++j) {
            a[j] = rng.next_gaussian();
            b[j] = rng.next_gaussian();
            sa[j] = alpha * a[j];
            sb[j] = beta * b[j];
        }
        CHECK(std::abs(cosine_similarity(sa, sb) - cosine_similarity(a, b)) <= 1e-12);
    }
}
