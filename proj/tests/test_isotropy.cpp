#include <doctest.h>

#include <cmath>
#include <vector>

#include "embkit/isotropy.hpp"
#include "embkit/matrix.hpp"
#include "embkit/rng.hpp"
#include "embkit/synthgen.hpp"

using namespace embkit;

namespace {

EmbeddingMatrix wrap(Matrix m) {
    EmbeddingMatrix e;
    e.matrix = std::move(m);
    return e;
}

}  // namespace

TEST_CASE("uniform spectrum has zero defect") {
    CHECK(isotropy_defect({2.5, 2.5, 2.5, 2.5}, 4) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single-axis spectrum has defect exactly 1") {
    for (std::size_t n : {2u, 5u, 64u}) {
        std::vector<double> v(n, 0.0);
        v[0] = 3.0;
        CHECK(isotropy_defect(v, n) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("defect for n=2, sigma=(2,1) matches the closed form") {
    // sigma_hat = sqrt(2)*(2,1)/sqrt(5); |sigma_hat - 1|^2 = 4 - 6*sqrt(2)/sqrt(5).
    const double expected = std::sqrt(4.0 - 6.0 * std::sqrt(2.0) / std::sqrt(5.0)) /
                            std::sqrt(2.0 * (2.0 - std::sqrt(2.0)));
    CHECK(isotropy_defect({2.0, 1.0}, 2) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("defect input validation") {
    CHECK_THROWS_AS(isotropy_defect({0.0, 0.0}, 2), DegenerateInputError);
    CHECK_THROWS_AS(isotropy_defect({1.0}, 1), InvalidParameterError);
    CHECK_THROWS_AS(isotropy_defect({1.0, 2.0, 3.0}, 2), ContractViolationError);
}

TEST_CASE("boundary identities: delta=0 gives 1, delta=1 gives 0") {
    for (std::size_t n : {2u, 16u, 300u}) {
        std::vector<double> uniform(n, 1.0);
        CHECK(std::abs(isoscore_from_spectrum(uniform, 10 * n).raw_isoscore - 1.0) <= 1e-12);
        std::vector<double> axis(n, 0.0);
        axis[0] = 1.0;
        CHECK(std::abs(isoscore_from_spectrum(axis, 10 * n).raw_isoscore) <= 1e-12);
    }
}

TEST_CASE("isotropic Gaussian scores high") {
    const EmbeddingMatrix x = gen_gaussian_spectrum(std::vector<double>(16, 1.0), 4000, 3);
    CHECK(isoscore(x).isoscore >= 0.9);
}

TEST_CASE("rank-1 data scores near zero") {
    std::vector<double> spectrum(16, 0.0);
    spectrum[0] = 1.0;
    const EmbeddingMatrix x = gen_gaussian_spectrum(spectrum, 2000, 5);
    CHECK(isoscore(x).isoscore <= 0.02);
}

TEST_CASE("rows <= cols is a stability error") {
    CounterRng rng(1);
    Matrix m(8, 8);
    for (double& v : m.data()) v = rng.next_gaussian();
    CHECK_THROWS_AS(isoscore(wrap(std::move(m))), DegenerateInputError);
}

TEST_CASE("invariance under rotation, translation, and positive scaling") {
    const EmbeddingMatrix x = gen_gaussian_spectrum({4.0, 2.0, 1.0, 0.5, 0.25}, 600, 7);
    const double base = isoscore(x).isoscore;

    const Matrix rot = random_orthonormal(5, 5, 11);
    EmbeddingMatrix moved = wrap(matmul(x.matrix, rot));
    for (std::size_t i = 0; i < moved.rows(); ++i) {
        for (std::size_t j = 0; j < 5; ++j) moved.matrix(i, j) += 17.0;
    }
    CHECK(std::abs(isoscore(moved).isoscore - base) < 1e-9);

    EmbeddingMatrix scaled = x;
    for (double& v : scaled.matrix.data()) v *= 0.37;
    CHECK(std::abs(isoscore(scaled).isoscore - base) < 1e-12);
}

TEST_CASE("score degrades monotonically as the tail spectrum collapses") {
    // Spectrum (1,...,1, eps,...,eps) on 8 dims, 4 strong axes.
    double prev = 2.0;
    for (double eps : {1.0, 0.5, 0.1, 0.01}) {
        std::vector<double> spectrum(8, eps);
        for (std::size_t j = 0; j < 4; ++j) spectrum[j] = 1.0;
        const EmbeddingMatrix x = gen_gaussian_spectrum(spectrum, 20000, 13);
        const double score = isoscore(x).isoscore;
        CHECK(score < prev);
        prev = score;
    }
}

TEST_CASE("outputs stay in bounds") {
    CounterRng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix m(50, 4);
        for (double& v : m.data()) v = rng.next_gaussian() * (1.0 + rep);
        const IsotropyReport r = isoscore(wrap(std::move(m)));
        CHECK(r.isoscore >= 0.0);
        CHECK(r.isoscore <= 1.0);
        CHECK(r.defect >= 0.0);
        CHECK(r.defect <= 1.0);
    }
}
