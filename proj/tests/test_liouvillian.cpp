#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "thermofield/errors.hpp"
#include "thermofield/liouvillian.hpp"

using namespace tfld;
using namespace tfld::liouvillian;

namespace {

constexpr double kPi = 3.14159265358979323846;
using cd = std::complex<double>;

Eigen::MatrixXcd sigma_x() {
    Eigen::MatrixXcd g(2, 2);
    g << 0.0, 1.0, 1.0, 0.0;
    return g;
}

model::ModelSpec reference_spec(double beta = 1.0, double lambda = 0.0) {
    model::ModelSpec spec;
    spec.atom.dim = 2;
    spec.atom.energies = {0.0, 1.0};
    model::FormFactor ff;
    ff.p = 0.5;
    spec.couplings.push_back({sigma_x(), ff});
    spec.beta = beta;
    spec.lambda = lambda;
    return spec;
}

Eigen::VectorXcd doubled_gibbs_vacuum(const model::ModelSpec& spec,
                                      const fock::FockBasis& basis) {
    const int d = spec.atom.dim;
    const auto gv = model::gibbs_vector(spec.atom, spec.beta);
    Eigen::VectorXcd omega = Eigen::VectorXcd::Zero(
        static_cast<Eigen::Index>(basis.dim() * static_cast<std::size_t>(d * d)));
    for (int i = 0; i < d * d; ++i)
        omega[flat_index(d, basis.dim(), i / d, i % d, 0)] = gv[i];
    return omega;
}

double fit_r_squared(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double res = 0, tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        res += std::pow(y[i] - intercept - slope * x[i], 2);
        tot += std::pow(y[i] - sy / n, 2);
    }
    return 1.0 - res / tot;
}

} // namespace

TEST_CASE("free Liouvillian is diagonal with atomic differences plus boson energy") {
    const auto spec = reference_spec();
    const auto basis = fock::enumerate_basis(2, 2);
    const auto grid = fock::make_uniform_grid(2, 1.0);
    const auto l0 = build_L0(spec, basis, grid);
    REQUIRE(l0.hermitian_flag);

    const Eigen::MatrixXcd dense(l0.entries);
    CHECK((dense - dense.diagonal().asDiagonal().toDenseMatrix()).norm() == 0.0);

    const auto vac = basis.rank({0, 0});
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(dense(flat_index(2, basis.dim(), j, j, vac),
                             flat_index(2, basis.dim(), j, j, vac))) == 0.0);
    CHECK(dense(flat_index(2, basis.dim(), 1, 0, vac),
                flat_index(2, basis.dim(), 1, 0, vac))
              .real() == doctest::Approx(1.0));
    const auto one_up = basis.rank({0, 1});
    CHECK(dense(flat_index(2, basis.dim(), 0, 0, one_up),
                flat_index(2, basis.dim(), 0, 0, one_up))
              .real() == doctest::Approx(0.5));
    const auto one_down = basis.rank({1, 0});
    CHECK(dense(flat_index(2, basis.dim(), 0, 0, one_down),
                flat_index(2, basis.dim(), 0, 0, one_down))
              .real() == doctest::Approx(-0.5));
}

TEST_CASE("interaction matches an independently assembled dense reference") {
    const auto spec = reference_spec(1.7);
    const auto basis = fock::enumerate_basis(2, 2);
    const auto grid = fock::make_uniform_grid(2, 1.0);
    const auto interaction = build_I(spec, basis, grid);
    REQUIRE(interaction.dim == 24);
    REQUIRE(interaction.hermitian_flag);

    // Reference assembly from scratch: explicit state list, raising matrices,
    // smears, and triple Kronecker loops sharing only the index convention.
    const std::vector<std::vector<int>> states = {{0, 0}, {0, 1}, {0, 2},
                                                  {1, 0}, {1, 1}, {2, 0}};
    auto find_state = [&](const std::vector<int>& s) -> int {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i] == s) return static_cast<int>(i);
        return -1;
    };
    const auto& ff = spec.couplings[0].ff;
    const double phi_angle = spec.glue_phase();
    Eigen::VectorXcd h_plus(2), h_minus(2);
    for (int j = 0; j < 2; ++j) {
        h_plus[j] = std::sqrt(ff.angular_factor * grid.weights[j]) *
                    model::tau_beta(ff, spec.beta, phi_angle, grid.modes[j]);
        h_minus[j] = std::sqrt(ff.angular_factor * grid.weights[j]) *
                     std::exp(-spec.beta * grid.modes[j] / 2.0) *
                     model::tau_beta(ff, spec.beta, phi_angle, grid.modes[j]);
    }
    auto phi_of = [&](const Eigen::VectorXcd& h) {
        Eigen::MatrixXcd a_dag = Eigen::MatrixXcd::Zero(6, 6);
        for (int c = 0; c < 6; ++c) {
            for (int j = 0; j < 2; ++j) {
                auto target = states[c];
                target[j] += 1;
                const int r = find_state(target);
                if (r >= 0) a_dag(r, c) += h[j] * std::sqrt(states[c][j] + 1.0);
            }
        }
        return Eigen::MatrixXcd((a_dag + a_dag.adjoint()) / std::sqrt(2.0));
    };
    const Eigen::MatrixXcd phi_plus = phi_of(h_plus);
    const Eigen::MatrixXcd phi_minus = phi_of(h_minus);
    const Eigen::MatrixXcd g = sigma_x();
    Eigen::MatrixXcd reference = Eigen::MatrixXcd::Zero(24, 24);
    for (int al = 0; al < 2; ++al)
        for (int bl = 0; bl < 2; ++bl)
            for (int ar = 0; ar < 2; ++ar)
                for (int br = 0; br < 2; ++br)
                    for (int m = 0; m < 6; ++m)
                        for (int n = 0; n < 6; ++n) {
                            const auto row = flat_index(2, 6, al, ar, m);
                            const auto col = flat_index(2, 6, bl, br, n);
                            if (ar == br) reference(row, col) += g(al, bl) * phi_plus(m, n);
                            if (al == bl)
                                reference(row, col) -=
                                    std::conj(g(ar, br)) * phi_minus(m, n);
                        }

    CHECK((Eigen::MatrixXcd(interaction.entries) - reference).cwiseAbs().maxCoeff() <
          1e-13);
}

TEST_CASE("interaction ignores lambda and has zero doubled-vacuum expectation") {
    auto spec = reference_spec(2.0, 0.0);
    const auto basis = fock::enumerate_basis(2, 2);
    const auto grid = fock::make_uniform_grid(2, 1.5);
    const auto base = build_I(spec, basis, grid);
    spec.lambda = 0.7;
    const auto shifted = build_I(spec, basis, grid);
    CHECK(max_abs_entry(SparseCd(base.entries - shifted.entries)) == 0.0);

    const auto omega = doubled_gibbs_vacuum(spec, basis);
    const cd expectation = omega.dot(Eigen::VectorXcd(base.entries * omega));
    CHECK(std::abs(expectation) < 1e-14);
}

TEST_CASE("interaction is block off-diagonal in boson number at the vacuum") {
    const auto spec = reference_spec(1.0, 0.2);
    const auto basis = fock::enumerate_basis(2, 2);
    const auto grid = fock::make_uniform_grid(2, 1.0);
    const Eigen::MatrixXcd interaction(build_I(spec, basis, grid).entries);
    const auto vac = basis.rank({0, 0});
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(std::abs(interaction(flat_index(2, basis.dim(), a / 2, a % 2, vac),
                                       flat_index(2, basis.dim(), b / 2, b % 2, vac))) ==
                  0.0);
}

TEST_CASE("derivative interaction: zero coupling, hermiticity, weighted norm bound") {
    auto spec = reference_spec(1.0);
    const auto basis = fock::enumerate_basis(2, 2);
    const auto grid = fock::make_uniform_grid(2, 1.0);

    auto zeroed = spec;
    zeroed.couplings[0].G.setZero();
    CHECK(build_I1(zeroed, basis, grid).entries.nonZeros() == 0);

    const auto i1 = build_I1(spec, basis, grid);
    CHECK(i1.hermitian_flag);

    const Eigen::MatrixXcd number(build_number(2, basis).entries);
    Eigen::VectorXd scale(24);
    for (int i = 0; i < 24; ++i) scale[i] = 1.0 / std::sqrt(number(i, i).real() + 1.0);
    const Eigen::MatrixXcd weighted = Eigen::MatrixXcd(i1.entries) * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(weighted.adjoint() * weighted,
                                                           Eigen::EigenvaluesOnly);
    const double norm = std::sqrt(solver.eigenvalues().maxCoeff());
    CHECK(norm <= model::c_p_beta(spec));
}

TEST_CASE("assembled bundle ties the pieces together") {
    auto spec = reference_spec(1.3, 0.0);
    const auto basis = fock::enumerate_basis(2, 2);
    const auto grid = fock::make_uniform_grid(2, 1.0);

    const auto free_bundle = assemble(spec, basis, grid);
    CHECK(max_abs_entry(
              SparseCd(free_bundle.L_lambda.entries - free_bundle.L0.entries)) == 0.0);

    spec.lambda = 0.4;
    const auto bundle = assemble(spec, basis, grid);
    CHECK(bundle.L_lambda.hermitian_flag);
    CHECK(bundle.I_ell.dim == bundle.I.dim);

    // L_lambda applied to the uncoupled thermal vector reduces to lambda * I.
    const auto omega = doubled_gibbs_vacuum(spec, basis);
    const Eigen::VectorXcd lhs = bundle.L_lambda.entries * omega;
    const Eigen::VectorXcd rhs = spec.lambda * (bundle.I.entries * omega);
    CHECK((lhs - rhs).norm() < 1e-13);

    // Repeat assembly is bit-identical.
    const auto again = assemble(spec, basis, grid);
    CHECK(max_abs_entry(SparseCd(again.L_lambda.entries - bundle.L_lambda.entries)) ==
          0.0);
    REQUIRE(again.L_lambda.entries.nonZeros() == bundle.L_lambda.entries.nonZeros());

    // Flipping the sign of lambda and of every G leaves the spectrum unchanged.
    auto flipped = spec;
    flipped.lambda = -spec.lambda;
    flipped.couplings[0].G = -flipped.couplings[0].G;
    const auto mirror = assemble(flipped, basis, grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sa(
        Eigen::MatrixXcd(bundle.L_lambda.entries), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sb(
        Eigen::MatrixXcd(mirror.L_lambda.entries), Eigen::EigenvaluesOnly);
    CHECK((sa.eigenvalues() - sb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("interaction term of the left half only") {
    const auto spec = reference_spec(1.0, 0.1);
    const auto basis = fock::enumerate_basis(2, 1);
    const auto grid = fock::make_uniform_grid(2, 1.0);
    const auto whole = build_I(spec, basis, grid);
    const auto left = build_I_ell(spec, basis, grid);

    // Adding back the dropped right-acting summand recovers I.
    const auto& ff = spec.couplings[0].ff;
    const double phi_angle = spec.glue_phase();
    const auto minus = fock::discretize(
        [&](double u) { return model::weighted_tau_beta(ff, spec.beta, phi_angle, u); },
        grid, ff.angular_factor);
    const auto field = fock::field_ops(basis, minus).phi;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    const SparseCd dropped =
        kron3(id, spec.couplings[0].G.conjugate(), field.entries, -1.0);
    CHECK(max_abs_entry(SparseCd(SparseCd(left.entries + dropped) - whole.entries)) <
          1e-15);
}

TEST_CASE("zero-temperature Hamiltonian: ground energy and perturbation theory") {
    auto spec = reference_spec();
    const auto grid = fock::positive_part(fock::make_uniform_grid(8, 2.0));
    const auto basis = fock::enumerate_basis(4, 2);

    const auto free_h = build_zero_temperature_hamiltonian(spec, basis, grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> free_solver(
        Eigen::MatrixXcd(free_h.entries), Eigen::EigenvaluesOnly);
    CHECK(free_solver.eigenvalues().minCoeff() == doctest::Approx(0.0).epsilon(1e-14));

    spec.lambda = 1e-3;
    const auto coupled = build_zero_temperature_hamiltonian(spec, basis, grid);
    CHECK(coupled.hermitian_flag);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        Eigen::MatrixXcd(coupled.entries), Eigen::EigenvaluesOnly);
    const double ground = solver.eigenvalues().minCoeff();
    CHECK(solver.eigenvalues().minCoeff() > -1.0);

    // Rayleigh-Schroedinger second order from the same smeared coupling.
    const auto& ff = spec.couplings[0].ff;
    const auto smeared = fock::discretize([&](double u) { return u * ff.g(u); }, grid,
                                          ff.angular_factor);
    double shift = 0.0;
    const Eigen::MatrixXcd g = spec.couplings[0].G;
    for (int m = 0; m < 2; ++m) {
        if (std::abs(g(m, 0)) == 0.0) continue;
        for (int k = 0; k < grid.size(); ++k)
            shift += 0.5 * std::norm(g(m, 0)) * std::norm(smeared.coeffs[k]) /
                     (spec.atom.energies[m] - spec.atom.energies[0] + grid.modes[k]);
    }
    const double predicted = -spec.lambda * spec.lambda * shift;
    CHECK(ground / predicted == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(ground - predicted) < 1e-10);
}

TEST_CASE("weighted interaction norm: zero coupling, thermal fit, relabeling invariance") {
    const auto basis = fock::enumerate_basis(4, 2);
    const auto grid = fock::make_uniform_grid(4, 2.0);

    auto silent = reference_spec();
    silent.couplings[0].G.setZero();
    CHECK(relative_bound_check(assemble(silent, basis, grid)) == 0.0);

    std::vector<double> inv_beta, values;
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        const auto bundle = assemble(reference_spec(beta), basis, grid);
        inv_beta.push_back(1.0 / beta);
        values.push_back(relative_bound_check(bundle));
    }
    CHECK(fit_r_squared(inv_beta, values) > 0.9);

    // Relabeling the grid modes permutes the one-boson space unitarily.
    const auto spec = reference_spec(1.0, 0.3);
    LiouvillianBundle plain;
    plain.I = build_I(spec, basis, grid);
    plain.N = build_number(2, basis);
    fock::BathGrid shuffled;
    const std::vector<int> order = {2, 0, 3, 1};
    for (int j : order) {
        shuffled.modes.push_back(grid.modes[j]);
        shuffled.weights.push_back(grid.weights[j]);
    }
    LiouvillianBundle relabeled;
    relabeled.I = build_I(spec, basis, shuffled);
    relabeled.N = plain.N;
    CHECK(relative_bound_check(relabeled) ==
          doctest::Approx(relative_bound_check(plain)).epsilon(1e-12));

    const auto big_basis = fock::enumerate_basis(44, 2);
    LiouvillianBundle too_big;
    too_big.I = build_I(reference_spec(), big_basis, fock::make_uniform_grid(44, 2.0));
    CHECK_THROWS_AS(relative_bound_check(too_big), budget_error);
}
