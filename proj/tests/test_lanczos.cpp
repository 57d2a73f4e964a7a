#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "thermofield/errors.hpp"
#include "thermofield/lanczos.hpp"

using namespace tfld;
using namespace tfld::krylov;

namespace {

using cd = std::complex<double>;

// Banded random Hermitian matrix with spectrum roughly in [-width, width].
SparseCd random_hermitian(Eigen::Index dim, int bandwidth, double width, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<Eigen::Triplet<cd>> triplets;
    for (Eigen::Index i = 0; i < dim; ++i) {
        triplets.emplace_back(i, i, cd(width * gauss(rng) / 3.0, 0.0));
        for (Eigen::Index j = i + 1; j <= std::min(dim - 1, i + bandwidth); ++j) {
            const cd z(width * gauss(rng) / 6.0, width * gauss(rng) / 6.0);
            triplets.emplace_back(i, j, z);
            triplets.emplace_back(j, i, std::conj(z));
        }
    }
    SparseCd h(dim, dim);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

SparseCd diagonal_matrix(const std::vector<double>& entries) {
    SparseCd h(static_cast<Eigen::Index>(entries.size()),
               static_cast<Eigen::Index>(entries.size()));
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        h.insert(i, i) = entries[static_cast<std::size_t>(i)];
    h.makeCompressed();
    return h;
}

Eigen::VectorXcd random_vector(Eigen::Index dim, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = cd(gauss(rng), gauss(rng));
    return v;
}

// exp(scale h) v through a full eigendecomposition.
Eigen::VectorXcd dense_expm(const SparseCd& h, cd scale, const Eigen::VectorXcd& v) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver((Eigen::MatrixXcd(h)));
    Eigen::VectorXcd coords = solver.eigenvectors().adjoint() * v;
    for (Eigen::Index k = 0; k < coords.size(); ++k)
        coords[k] *= std::exp(scale * solver.eigenvalues()[k]);
    return solver.eigenvectors() * coords;
}

} // namespace

TEST_CASE("expm_multiply matches a dense eigendecomposition oracle") {
    const auto h = random_hermitian(60, 3, 4.0, 11);
    const auto v = random_vector(60, 12);

    SUBCASE("thermal decay") {
        const auto out = expm_multiply(h, cd(-0.7, 0.0), v);
        const auto oracle = dense_expm(h, cd(-0.7, 0.0), v);
        CHECK((out - oracle).norm() <= 1e-9 * oracle.norm());
    }
    SUBCASE("unitary motion") {
        const auto out = expm_multiply(h, cd(0.0, -0.3), v);
        const auto oracle = dense_expm(h, cd(0.0, -0.3), v);
        CHECK((out - oracle).norm() <= 1e-9 * oracle.norm());
        CHECK(out.norm() == doctest::Approx(v.norm()).epsilon(1e-10));
    }
    SUBCASE("mixed complex scale") {
        const auto out = expm_multiply(h, cd(-0.2, -0.5), v);
        const auto oracle = dense_expm(h, cd(-0.2, -0.5), v);
        CHECK((out - oracle).norm() <= 1e-9 * oracle.norm());
    }
}

TEST_CASE("expm_multiply unitary group property") {
    const auto h = random_hermitian(40, 2, 3.0, 21);
    const auto v = random_vector(40, 22);
    const auto one_shot = expm_multiply(h, cd(0.0, -1.1), v);
    const auto first = expm_multiply(h, cd(0.0, -0.4), v);
    const auto second = expm_multiply(h, cd(0.0, -0.7), first);
    CHECK((second - one_shot).norm() <= 1e-9 * v.norm());
}

TEST_CASE("expm_multiply on an eigenvector breaks down happily") {
    const auto h = diagonal_matrix({-2.0, 0.5, 3.0});
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(3);
    v[1] = cd(2.0, 0.0);
    ExpmReport report;
    const auto out = expm_multiply(h, cd(-1.0, 0.0), v, {}, &report);
    CHECK(report.max_subspace_used == 1);
    CHECK(report.substeps == 1);
    CHECK(std::abs(out[1] - 2.0 * std::exp(-0.5)) <= 1e-14);
    CHECK(std::abs(out[0]) == 0.0);
    CHECK(std::abs(out[2]) == 0.0);
}

TEST_CASE("expm_multiply zero scale and zero vector pass through") {
    const auto h = random_hermitian(10, 2, 1.0, 31);
    const auto v = random_vector(10, 32);
    CHECK((expm_multiply(h, cd(0.0, 0.0), v) - v).norm() == 0.0);
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(10);
    CHECK(expm_multiply(h, cd(-1.0, 0.0), zero).norm() == 0.0);
}

TEST_CASE("expm_multiply substep doubling still matches the oracle") {
    const auto h = random_hermitian(80, 3, 30.0, 41);
    const auto v = random_vector(80, 42);
    ExpmOptions opts;
    opts.max_subspace = 16;
    ExpmReport report;
    const auto out = expm_multiply(h, cd(0.0, -2.0), v, opts, &report);
    CHECK(report.substeps > 1);
    const auto oracle = dense_expm(h, cd(0.0, -2.0), v);
    CHECK((out - oracle).norm() <= 1e-7 * oracle.norm());
}

TEST_CASE("expm_multiply reports non-convergence when starved") {
    const auto h = random_hermitian(80, 3, 30.0, 51);
    const auto v = random_vector(80, 52);
    ExpmOptions opts;
    opts.max_subspace = 3;
    opts.max_substeps = 1;
    CHECK_THROWS_WITH_AS(expm_multiply(h, cd(0.0, -2.0), v, opts),
                         doctest::Contains("tolerance"), numerical_error);
}

TEST_CASE("expm_multiply guards against thermal rounding amplification") {
    // The component along the decaying -50 direction is barely above machine
    // noise, so the growing exponential output carries ~1e-4 relative error.
    const auto h = diagonal_matrix({-50.0, 0.0, 3.0});
    Eigen::VectorXcd v(3);
    v << cd(1e-12, 0.0), cd(1.0, 0.0), cd(0.5, 0.0);

    CHECK_THROWS_WITH_AS(expm_multiply(h, cd(-1.0, 0.0), v),
                         doctest::Contains("stability limit"), numerical_error);

    ExpmOptions loose;
    loose.stability_limit = 1.0;
    ExpmReport report;
    const auto out = expm_multiply(h, cd(-1.0, 0.0), v, loose, &report);
    CHECK(report.rounding_error_estimate > 1e-6);
    const auto oracle = dense_expm(h, cd(-1.0, 0.0), v);
    CHECK((out - oracle).norm() <= 1e-2 * oracle.norm());
}

TEST_CASE("eigs_near dense path matches a full solve") {
    const auto h = random_hermitian(40, 4, 2.0, 61);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> full((Eigen::MatrixXcd(h)));
    std::vector<double> all(full.eigenvalues().data(),
                            full.eigenvalues().data() + full.eigenvalues().size());
    std::sort(all.begin(), all.end(),
              [](double a, double b) { return std::abs(a - 0.3) < std::abs(b - 0.3); });

    const auto pairs = eigs_near(h, 0.3, 5);
    REQUIRE(pairs.values.size() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(pairs.values[k] == doctest::Approx(all[static_cast<std::size_t>(k)])
                                     .epsilon(1e-12));
        CHECK(pairs.residuals[k] <= 1e-9);
        CHECK(pairs.vectors[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
        const Eigen::VectorXcd defect =
            h * pairs.vectors[k] - pairs.values[k] * pairs.vectors[k];
        CHECK(defect.norm() <= 1e-9);
    }
}

TEST_CASE("eigs_near shift-invert path agrees with the dense path") {
    // Two-fold degenerate kernel, spectral gap 0.5, then a ladder of shells.
    std::vector<double> entries = {0.0, 0.0};
    for (int k = 0; entries.size() < 50; ++k) {
        entries.push_back(0.5 + 0.01 * k);
        entries.push_back(-0.5 - 0.01 * k);
    }
    const auto h = diagonal_matrix(entries);

    EigsOptions iterative;
    iterative.dense_threshold = 10;
    const auto pairs = eigs_near(h, 0.0, 4, iterative);
    REQUIRE(pairs.values.size() == 4);
    CHECK(pairs.trace.find("shift-invert") != std::string::npos);

    CHECK(std::abs(pairs.values[0]) <= 1e-9);
    CHECK(std::abs(pairs.values[1]) <= 1e-9);
    CHECK(std::abs(pairs.values[2]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(pairs.values[3]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(pairs.values[2] * pairs.values[3] < 0.0);

    for (int a = 0; a < 4; ++a) {
        CHECK(pairs.residuals[a] <= 1e-9);
        for (int b = a + 1; b < 4; ++b)
            CHECK(std::abs(pairs.vectors[a].dot(pairs.vectors[b])) <= 1e-8);
    }

    // Deflation recovered both kernel copies: together they cover the two
    // kernel coordinates with full weight.
    const double kernel_weight = std::norm(pairs.vectors[0][0]) +
                                 std::norm(pairs.vectors[0][1]) +
                                 std::norm(pairs.vectors[1][0]) +
                                 std::norm(pairs.vectors[1][1]);
    CHECK(kernel_weight == doctest::Approx(2.0).epsilon(1e-9));

    const auto dense = eigs_near(h, 0.0, 4);
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(pairs.values[k]) ==
              doctest::Approx(std::abs(dense.values[k])).epsilon(1e-9));
}

TEST_CASE("eigs_near is deterministic for a fixed seed") {
    std::vector<double> entries = {0.0};
    for (int k = 0; entries.size() < 40; ++k) {
        entries.push_back(1.0 + 0.1 * k);
        entries.push_back(-1.0 - 0.1 * k);
    }
    const auto h = diagonal_matrix(entries);
    EigsOptions iterative;
    iterative.dense_threshold = 10;
    const auto first = eigs_near(h, 0.0, 3, iterative);
    const auto second = eigs_near(h, 0.0, 3, iterative);
    for (int k = 0; k < 3; ++k) {
        CHECK(first.values[k] == second.values[k]);
        CHECK((first.vectors[k] - second.vectors[k]).norm() == 0.0);
    }
}

TEST_CASE("eigs_near reports failure with its iteration trace") {
    std::vector<double> entries;
    for (int k = 0; entries.size() < 30; ++k) entries.push_back(0.3 + 0.1 * k);
    const auto h = diagonal_matrix(entries);
    EigsOptions starved;
    starved.dense_threshold = 10;
    starved.max_subspace = 4;
    starved.max_rounds = 1;
    starved.tol = 1e-30;
    CHECK_THROWS_WITH_AS(eigs_near(h, 0.0, 3, starved),
                         doctest::Contains("found only"), numerical_error);
}

TEST_CASE("eigs_near validates the requested count") {
    const auto h = diagonal_matrix({1.0, 2.0});
    CHECK_THROWS_AS(eigs_near(h, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(eigs_near(h, 0.0, 3), std::invalid_argument);
}
