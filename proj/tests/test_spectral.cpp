#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "thermofield/errors.hpp"
#include "thermofield/kms.hpp"
#include "thermofield/spectral.hpp"

using namespace tfld;
using namespace tfld::spectral;

namespace {

using cd = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXcd sigma_x() {
    Eigen::MatrixXcd g(2, 2);
    g << 0.0, 1.0, 1.0, 0.0;
    return g;
}

Eigen::MatrixXcd sigma_z() {
    Eigen::MatrixXcd g(2, 2);
    g << 1.0, 0.0, 0.0, -1.0;
    return g;
}

// Two-level atom with a sigma_x coupling normalized so g(1) = 1.
model::ModelSpec resonant_spec(double beta, double lambda) {
    model::ModelSpec spec;
    spec.atom.dim = 2;
    spec.atom.energies = {0.0, 1.0};
    model::FormFactor ff;
    ff.p = 0.5;
    ff.amplitude = std::exp(1.0);
    spec.couplings.push_back({sigma_x(), ff});
    spec.beta = beta;
    spec.lambda = lambda;
    return spec;
}

liouvillian::LiouvillianBundle resonant_bundle(double beta, double lambda,
                                               int mode_count = 8, int n_max = 2,
                                               double u_max = 4.0) {
    const auto spec = resonant_spec(beta, lambda);
    const auto basis = fock::enumerate_basis(mode_count, n_max);
    const auto grid = fock::make_uniform_grid(mode_count, u_max);
    return liouvillian::assemble(spec, basis, grid);
}

Eigen::MatrixXcd random_hermitian(int dim, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = cd(normal(rng), normal(rng));
    return (m + m.adjoint()) / 2.0;
}

Eigen::MatrixXcd random_rank_projection(int dim, int rank, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd block(dim, rank);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j) block(i, j) = cd(normal(rng), normal(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(block);
    const Eigen::MatrixXcd q =
        Eigen::MatrixXcd(qr.householderQ()).leftCols(rank);
    return q * q.adjoint();
}

double rel_error(const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& want) {
    return (got - want).norm() / want.norm();
}

} // namespace

TEST_CASE("low_spectrum finds the uncoupled kernel with multiplicity >= 2") {
    const auto bundle = resonant_bundle(2.0, 0.0, 2, 2, 2.0);
    const auto result = low_spectrum(bundle.L0, 6);
    REQUIRE(result.eigenvalues.size() == 6);
    CHECK(std::abs(result.eigenvalues[0]) <= 1e-12);
    CHECK(std::abs(result.eigenvalues[1]) <= 1e-12);
    for (std::size_t k = 0; k < result.residuals.size(); ++k)
        CHECK(result.residuals[k] <= 1e-9);
}

TEST_CASE("low_spectrum dense and shift-invert paths agree") {
    const auto spec = resonant_spec(1.5, 0.2);
    const auto basis = fock::enumerate_basis(6, 1);
    const auto grid = fock::make_uniform_grid(6, 3.0);
    const auto bundle = liouvillian::assemble(spec, basis, grid);

    auto dense = low_spectrum(bundle.L_lambda, 6, 1e-9, 2000);
    auto iterative = low_spectrum(bundle.L_lambda, 6, 1e-9, 10);
    REQUIRE(dense.eigenvalues.size() == 6);
    REQUIRE(iterative.eigenvalues.size() == 6);
    // The spectrum is symmetric, so the magnitude cut keeps full +/- pairs
    // and the sorted lists are comparable elementwise.
    std::sort(dense.eigenvalues.begin(), dense.eigenvalues.end());
    std::sort(iterative.eigenvalues.begin(), iterative.eigenvalues.end());
    for (int k = 0; k < 6; ++k) {
        CHECK(dense.eigenvalues[k] ==
              doctest::Approx(iterative.eigenvalues[k]).epsilon(1e-8).scale(1.0));
        CHECK(iterative.residuals[k] <= 1e-9);
    }
}

TEST_CASE("low_spectrum of the coupled operator is symmetric about zero") {
    const auto bundle = resonant_bundle(1.0, 0.1, 4, 2, 2.0);
    const auto result = low_spectrum(bundle.L_lambda, 12);
    for (double value : result.eigenvalues) {
        double best = 1e300;
        for (double other : result.eigenvalues)
            best = std::min(best, std::abs(value + other));
        CHECK(best <= 1e-9);
    }
}

TEST_CASE("pi_projection is the rank-d kernel projection") {
    const auto bundle = resonant_bundle(2.0, 0.1, 4, 2, 2.0);
    const auto pi = pi_projection(bundle);
    CHECK(pi.hermitian_flag);

    const Eigen::MatrixXcd dense(pi.entries);
    CHECK(std::abs(dense.trace() - cd(2.0, 0.0)) <= 1e-14);
    CHECK((dense * dense - dense).norm() <= 1e-14);

    const auto reference = kms::reference_vector(bundle.spec, bundle.basis);
    CHECK((pi.entries * reference.coeffs - reference.coeffs).norm() <= 1e-14);

    const SparseCd compressed = SparseCd(pi.entries * bundle.I.entries * pi.entries);
    CHECK(max_abs_entry(compressed) <= 1e-14);
}

TEST_CASE("regularized_lso vanishes without coupling and stays positive semidefinite") {
    auto spec = resonant_spec(1.0, 0.0);
    spec.couplings[0].ff.amplitude = 0.0;
    const auto basis = fock::enumerate_basis(4, 1);
    const auto grid = fock::make_uniform_grid(4, 2.0);
    const auto bundle = liouvillian::assemble(spec, basis, grid);
    CHECK(regularized_lso(bundle, 0.3).norm() == 0.0);

    const auto coupled = resonant_bundle(1.0, 0.1, 8, 1, 4.0);
    for (double epsilon : {0.5, 0.1, 0.02}) {
        const Eigen::MatrixXcd lso = regularized_lso(coupled, epsilon);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(lso);
        CHECK(solver.eigenvalues().minCoeff() >= -1e-12 * lso.norm());
    }

    CHECK_THROWS_AS(regularized_lso(coupled, 0.0), config_error);
}

TEST_CASE("regularized_lso converges to gamma0_matrix under joint refinement") {
    const auto spec = resonant_spec(1.0, 0.0);
    const auto gamma = gamma0_matrix(spec);

    std::vector<double> errors;
    const std::vector<std::pair<double, int>> ladder = {
        {0.4, 32}, {0.2, 64}, {0.1, 128}};
    for (const auto& [epsilon, modes] : ladder) {
        const auto basis = fock::enumerate_basis(modes, 1);
        const auto grid = fock::make_uniform_grid(modes, 6.0);
        const auto bundle = liouvillian::assemble(spec, basis, grid);
        errors.push_back(rel_error(regularized_lso(bundle, epsilon), gamma.matrix));
    }
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
    CHECK(errors[2] <= 0.15);
}

TEST_CASE("gamma0_matrix closed forms for the resonant two-level atom") {
    const double beta = 1.0;
    const auto gamma = gamma0_matrix(resonant_spec(beta, 0.0));
    CHECK(gamma.golden_rule_holds);

    // Kernel along the Gibbs direction.
    Eigen::VectorXcd gibbs(2);
    gibbs << 1.0, std::exp(-beta / 2.0);
    gibbs /= gibbs.norm();
    CHECK((gamma.matrix * gibbs).norm() <= 1e-12 * gamma.matrix.norm());

    const double ratio = (1.0 + std::exp(-beta)) / (1.0 - std::exp(-beta));
    CHECK(gamma.explicit_bound == doctest::Approx(4.0 * kPi * ratio).epsilon(1e-12));
    CHECK(gamma.explicit_bound == doctest::Approx(27.19).epsilon(1e-3));
    CHECK(gamma.gap == doctest::Approx(kPi * gamma.explicit_bound).epsilon(1e-12));
}

TEST_CASE("gamma0_matrix gap is positive exactly when the golden rule holds") {
    auto diagonal_spec = resonant_spec(1.0, 0.0);
    diagonal_spec.couplings[0].G = sigma_z();
    const auto blocked = gamma0_matrix(diagonal_spec);
    CHECK_FALSE(blocked.golden_rule_holds);
    CHECK(std::abs(blocked.gap) <= 1e-12);

    model::ModelSpec three_level;
    three_level.atom.dim = 3;
    three_level.atom.energies = {0.0, 0.7, 1.8};
    Eigen::MatrixXcd g(3, 3);
    g << 0.0, 1.0, cd(0.2, 0.4), 1.0, 0.3, 0.8, cd(0.2, -0.4), 0.8, -0.3;
    model::FormFactor ff;
    ff.p = 0.5;
    three_level.couplings.push_back({g, ff});
    three_level.beta = 2.0;
    const auto open = gamma0_matrix(three_level);
    CHECK(open.golden_rule_holds);
    CHECK(open.gap > 0.0);
    const Eigen::VectorXd purif = model::gibbs_vector(three_level.atom, 2.0);
    Eigen::VectorXcd coords(3);
    for (int j = 0; j < 3; ++j) coords[j] = purif[j * 3 + j];
    CHECK((open.matrix * coords).norm() <= 1e-12 * open.matrix.norm());
}

TEST_CASE("build_A0 structure") {
    PCParameters params;
    params.theta = 0.7;
    params.epsilon = 0.3;

    const auto uncoupled = resonant_bundle(1.0, 0.0, 4, 2, 2.0);
    CHECK(max_abs_entry(build_A0(uncoupled, params).entries) == 0.0);

    const auto bundle = resonant_bundle(1.0, 0.1, 4, 2, 2.0);
    const auto a0 = build_A0(bundle, params);
    CHECK(a0.hermitian_flag);
    const auto pi = pi_projection(bundle);
    const SparseCd squeezed = SparseCd(pi.entries * a0.entries * pi.entries);
    CHECK(max_abs_entry(squeezed) <= 1e-14);
}

TEST_CASE("commutator norm scales like theta lambda/eps within one constant") {
    std::vector<double> fitted;
    const std::vector<std::array<double, 3>> settings = {
        {0.05, 0.3, 0.7}, {0.1, 0.15, 0.9}, {0.02, 0.5, 1.0}};
    for (const auto& [lambda, epsilon, theta] : settings) {
        const auto bundle = resonant_bundle(1.0, lambda, 4, 2, 2.0);
        PCParameters params;
        params.theta = theta;
        params.epsilon = epsilon;
        const auto b = build_B(bundle, params);
        const SparseCd commutator =
            SparseCd(b.entries - bundle.N.entries -
                     SparseCd(cd(lambda, 0.0) * bundle.I1.entries));
        const double norm = model::operator_norm(Eigen::MatrixXcd(commutator));
        const double envelope = theta * lambda / epsilon * (1.0 + lambda / epsilon);
        fitted.push_back(norm / envelope);
    }
    for (double c : fitted) {
        CHECK(c <= 3.0 * fitted[0]);
        CHECK(c >= fitted[0] / 3.0);
    }
}

TEST_CASE("build_B reduces to the number operator at lambda 0") {
    PCParameters params;
    params.theta = 0.8;
    params.epsilon = 0.25;
    const auto bundle = resonant_bundle(1.3, 0.0, 4, 2, 2.0);
    const auto b = build_B(bundle, params);
    CHECK(b.hermitian_flag);
    CHECK(max_abs_entry(SparseCd(b.entries - bundle.N.entries)) <= 1e-14);

    const auto reference = kms::reference_vector(bundle.spec, bundle.basis);
    const cd expectation =
        reference.coeffs.dot(Eigen::VectorXcd(b.entries * reference.coeffs));
    CHECK(std::abs(expectation) <= 1e-14);
}

TEST_CASE("virial_check on the uncoupled reference is the guarded zero") {
    PCParameters params;
    params.theta = 0.8;
    params.epsilon = 0.25;
    const auto bundle = resonant_bundle(1.0, 0.0, 4, 2, 2.0);
    const auto reference = kms::reference_vector(bundle.spec, bundle.basis);
    const auto report = virial_check(bundle, params, reference.coeffs);
    CHECK(report.b_expectation == 0.0);
    CHECK(report.n_bound_ratio == 0.0);
}

TEST_CASE("virial b_expectation responds linearly to eigenvector residual") {
    PCParameters params;
    params.theta = 0.8;
    params.epsilon = 0.25;
    const auto bundle = resonant_bundle(1.0, 0.05);
    const Eigen::VectorXcd seed =
        kms::reference_vector(bundle.spec, bundle.basis).coeffs;
    const Eigen::VectorXcd psi =
        kernel_cluster_projection(bundle.L_lambda.entries, seed);

    const double base = virial_check(bundle, params, psi).b_expectation;
    const auto b = build_B(bundle, params);
    Eigen::VectorXcd direction = b.entries * psi;
    direction -= psi * psi.dot(direction);
    direction /= direction.norm();

    std::vector<double> shifts;
    for (double t : {1e-4, 1e-3}) {
        Eigen::VectorXcd perturbed = psi + t * direction;
        perturbed /= perturbed.norm();
        shifts.push_back(virial_check(bundle, params, perturbed).b_expectation - base);
    }
    CHECK(std::abs(shifts[1] / shifts[0]) == doctest::Approx(10.0).epsilon(0.25));
}

TEST_CASE("virial kernel vector passes the commutator and number bounds") {
    PCParameters params;
    params.theta = 0.8;
    params.epsilon = 0.25;

    const auto kernel_b = [&params](const model::ModelSpec& spec, int modes,
                                    int n_max, double* residual_out) {
        const auto basis = fock::enumerate_basis(modes, n_max);
        const auto grid = fock::make_uniform_grid(modes, 6.0);
        const auto bundle = liouvillian::assemble(spec, basis, grid);
        const Eigen::VectorXcd seed =
            kms::reference_vector(bundle.spec, bundle.basis).coeffs;
        const Eigen::VectorXcd psi =
            kernel_cluster_projection(bundle.L_lambda.entries, seed);
        if (residual_out != nullptr)
            *residual_out = (bundle.L_lambda.entries * psi).norm();
        return virial_check(bundle, params, psi);
    };

    for (double lambda : {0.01, 0.05}) {
        const auto spec = resonant_spec(1.0, lambda);
        double residual = 0.0;
        const auto report = kernel_b(spec, 6, 2, &residual);
        const auto refined = kernel_b(spec, 12, 3, nullptr);
        const double truncation =
            std::abs(refined.b_expectation - report.b_expectation);

        CHECK(std::abs(report.b_expectation) <= 10.0 * (residual + truncation));
        CHECK(report.n_bound_ratio > 0.0);
        CHECK(report.n_bound_ratio <= 1.5);
    }
}

TEST_CASE("feshbach_map leaves block-diagonal matrices alone") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m.topLeftCorner(2, 2) = random_hermitian(2, 11);
    m.bottomRightCorner(2, 2) = random_hermitian(2, 12);
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(4, 4);
    proj(0, 0) = proj(1, 1) = 1.0;

    const auto result = feshbach_map(m, proj, 0.37);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected.topLeftCorner(2, 2) = m.topLeftCorner(2, 2);
    CHECK((result.map - expected).norm() <= 1e-12);
}

TEST_CASE("feshbach_map matches the 2x2 Schur complement") {
    const cd a(0.8, 0.0), b(0.3, -0.5), c(-0.4, 0.0);
    Eigen::MatrixXcd m(2, 2);
    m << a, b, std::conj(b), c;
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(2, 2);
    proj(0, 0) = 1.0;

    const double shift = 0.25;
    const auto result = feshbach_map(m, proj, shift);
    const cd expected = a - std::norm(b) / (c - shift);
    CHECK(std::abs(result.map(0, 0) - expected) <= 1e-13);
    CHECK(std::abs(result.map(0, 1)) <= 1e-14);
    CHECK(std::abs(result.map(1, 0)) <= 1e-14);
    CHECK(std::abs(result.map(1, 1)) <= 1e-14);
}

TEST_CASE("feshbach_map isospectrality on a random 8x8 with a rank-3 projection") {
    const Eigen::MatrixXcd m = random_hermitian(8, 211);
    const Eigen::MatrixXcd proj = random_rank_projection(8, 3, 212);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    const double scale = solver.eigenvalues().cwiseAbs().maxCoeff();

    const auto compressed_sigma_min = [&](double value) {
        const auto result = feshbach_map(m, proj, value);
        const Eigen::MatrixXcd block = result.range_basis.adjoint() * result.map *
                                           result.range_basis -
                                       value * Eigen::MatrixXcd::Identity(3, 3);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
        return svd.singularValues().minCoeff();
    };

    for (int k = 0; k < 8; ++k)
        CHECK(compressed_sigma_min(solver.eigenvalues()[k]) <= 1e-7 * scale);
    for (int k = 0; k + 1 < 8; ++k) {
        const double midpoint =
            (solver.eigenvalues()[k] + solver.eigenvalues()[k + 1]) / 2.0;
        CHECK(compressed_sigma_min(midpoint) > 1e-4 * scale);
    }
}

TEST_CASE("feshbach_map with the identity projection returns the matrix") {
    const Eigen::MatrixXcd m = random_hermitian(5, 41);
    const Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(5, 5);
    for (double shift : {-1.0, 0.0, 2.5}) {
        const auto result = feshbach_map(m, proj, shift);
        CHECK((result.map - m).norm() <= 1e-12);
        CHECK(std::isinf(result.complement_sigma_min));
    }
}

TEST_CASE("feshbach_map refuses a singular complement block") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = 0.5;
    m(2, 2) = 0.5;
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(3, 3);
    proj(0, 0) = 1.0;
    CHECK_THROWS_WITH_AS(feshbach_map(m, proj, 0.5), doctest::Contains("singular"),
                         numerical_error);
    CHECK_THROWS_AS(feshbach_map(m, Eigen::MatrixXcd::Zero(3, 3), 0.1), config_error);
}

TEST_CASE("pc_positivity_probe window and filter guards") {
    const auto bundle = resonant_bundle(1.0, 0.05);
    PCParameters params;
    params.theta = 0.8;
    params.epsilon = 0.25;
    params.nu = 2.0;
    CHECK_THROWS_WITH_AS(pc_positivity_probe(bundle, params, 1.5),
                         doctest::Contains("Bohr"), config_error);
    params.nu = 1.0;
    CHECK_THROWS_WITH_AS(pc_positivity_probe(bundle, params, 0.5),
                         doctest::Contains("empty"), config_error);
}

TEST_CASE("pc_positivity_probe at lambda 0 is nonnegative") {
    const auto bundle = resonant_bundle(1.0, 0.0);
    PCParameters params;
    params.theta = 0.8;
    params.epsilon = 0.25;
    params.nu = 2.0;
    params.delta = 0.0;
    const auto report = pc_positivity_probe(bundle, params, 0.5);
    CHECK(report.subspace_dim >= 1);
    CHECK(report.min_quadratic_form >= -1e-10);
    CHECK(report.gap_prediction == 0.0);
}

TEST_CASE("pc_positivity_probe with auto parameters is positive at lambda 0.05") {
    const double lambda = 0.05;
    const auto spec = resonant_spec(1.0, lambda);
    const double gamma0 = gamma0_matrix(spec).gap;
    const auto params = choose_pc_parameters(lambda, 1.5, 0.6, 0.1, gamma0);

    const auto bundle = resonant_bundle(1.0, lambda);
    const auto report = pc_positivity_probe(bundle, params, 0.5);
    CHECK(report.subspace_dim >= 1);
    CHECK(report.min_quadratic_form > 0.0);
    CHECK(report.gap_prediction > 0.0);
    CHECK(report.gap_prediction_pc > 0.0);
    CHECK(report.kernel_n_expectation >= 1.0);
}

TEST_CASE("choose_pc_parameters frozen arithmetic and constraints") {
    const auto params = choose_pc_parameters(0.1, 1.0, 0.6, 0.1, 5.0);
    CHECK(params.epsilon == doctest::Approx(std::pow(0.1, 0.6)).epsilon(1e-12));
    CHECK(params.epsilon == doctest::Approx(0.251189).epsilon(1e-5));
    CHECK(params.theta == doctest::Approx(std::pow(0.1, 0.1)).epsilon(1e-12));
    CHECK(params.theta == doctest::Approx(0.794328).epsilon(1e-5));
    CHECK(params.delta ==
          doctest::Approx(params.theta * 0.01 * 5.0 / params.epsilon).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(choose_pc_parameters(0.1, 1.0, 0.6, 0.7, 5.0),
                         doctest::Contains("0 < t < e < 1"), config_error);
    CHECK_THROWS_WITH_AS(choose_pc_parameters(0.1, 1.0, 0.9, 0.5, 5.0),
                         doctest::Contains("3e - 2"), config_error);
    CHECK_THROWS_WITH_AS(choose_pc_parameters(0.1, 0.5, 0.6, 0.1, 5.0),
                         doctest::Contains("nu"), config_error);
    CHECK_THROWS_AS(choose_pc_parameters(0.0, 1.0, 0.6, 0.1, 5.0), config_error);

    // eta = e - t maximizes toward 2/3 at the admissible corner.
    double best_eta = 0.0;
    for (double e = 0.05; e < 1.0; e += 0.05)
        for (double t = 0.01; t < e; t += 0.02)
            if (t > 3.0 * e - 2.0) best_eta = std::max(best_eta, e - t);
    CHECK(best_eta <= 2.0 / 3.0 + 1e-9);
    CHECK(best_eta > 0.6);
}
