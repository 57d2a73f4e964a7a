#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "thermofield/errors.hpp"
#include "thermofield/fock.hpp"
#include "thermofield/model.hpp"
#include "thermofield/quadrature.hpp"

using namespace tfld;
using namespace tfld::fock;

namespace {

constexpr double kPi = 3.14159265358979323846;

OneBosonVector unit_mode(int m, int j) {
    OneBosonVector h;
    h.coeffs = Eigen::VectorXcd::Zero(m);
    h.coeffs[j] = 1.0;
    return h;
}

double sparse_max_diff(const SparseCd& a, const SparseCd& b) {
    return max_abs_entry(SparseCd(a - b));
}

} // namespace

TEST_CASE("basis dimensions follow the occupation count formula") {
    CHECK(enumerate_basis(2, 2).dim() == 6);
    CHECK(enumerate_basis(7, 0).dim() == 1);
    CHECK(enumerate_basis(4, 3).dim() == 35);
    CHECK_THROWS_AS(enumerate_basis(100, 10), budget_error);
    CHECK_THROWS_AS(enumerate_basis(0, 1), config_error);
    CHECK_THROWS_AS(enumerate_basis(2, -1), config_error);
}

TEST_CASE("basis enumeration is lexicographic and ranking round-trips") {
    const auto basis = enumerate_basis(3, 4);
    REQUIRE(basis.dim() == 35);
    CHECK(basis.states.front() == std::vector<int>({0, 0, 0}));
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        CHECK(basis.rank(basis.states[i]) == i);
        if (i > 0) CHECK(basis.states[i - 1] < basis.states[i]);
    }
    CHECK_THROWS_AS(basis.rank({5, 0, 0}), std::out_of_range);
}

TEST_CASE("raising operator carries sqrt factors and respects the cutoff") {
    const auto basis = enumerate_basis(2, 2);
    const auto ops = field_ops(basis, unit_mode(2, 0));
    const Eigen::MatrixXcd a_dag(ops.a_dag.entries);

    const auto vac = basis.rank({0, 0});
    const auto one = basis.rank({1, 0});
    const auto two = basis.rank({2, 0});
    CHECK(a_dag(one, vac) == std::complex<double>(1.0));
    CHECK(a_dag(two, one).real() == doctest::Approx(std::sqrt(2.0)));

    // No column may raise out of the truncated space.
    for (std::size_t c = 0; c < basis.dim(); ++c) {
        int total = 0;
        for (int v : basis.states[c]) total += v;
        if (total == basis.n_total_max)
            CHECK(Eigen::VectorXcd(a_dag.col(c)).norm() == 0.0);
    }
}

TEST_CASE("annihilator kills the vacuum and phi is hermitian") {
    const auto basis = enumerate_basis(3, 2);
    OneBosonVector h;
    h.coeffs.resize(3);
    h.coeffs << std::complex<double>(0.4, -0.9), 1.7, std::complex<double>(-0.3, 0.2);
    const auto ops = field_ops(basis, h);

    const auto vac = basis.rank({0, 0, 0});
    Eigen::VectorXcd e_vac = Eigen::VectorXcd::Zero(basis.dim());
    e_vac[vac] = 1.0;
    CHECK(Eigen::VectorXcd(ops.a.entries * e_vac).norm() == 0.0);
    CHECK(ops.phi.hermitian_flag);

    // Vacuum fluctuation of the field: <vac, phi^2 vac> = |h|^2 / 2.
    const Eigen::VectorXcd phi_vac = ops.phi.entries * e_vac;
    CHECK(phi_vac.squaredNorm() ==
          doctest::Approx(0.5 * h.coeffs.squaredNorm()).epsilon(1e-13));
}

TEST_CASE("raising operator is linear in the smearing vector") {
    const auto basis = enumerate_basis(3, 3);
    OneBosonVector h1, h2, combo;
    h1.coeffs.resize(3);
    h1.coeffs << 0.3, std::complex<double>(0.0, 1.1), -0.7;
    h2.coeffs.resize(3);
    h2.coeffs << -1.0, 0.25, std::complex<double>(0.6, -0.4);

    // Doubling is exact in floating point.
    combo.coeffs = 2.0 * h1.coeffs;
    CHECK(sparse_max_diff(field_ops(basis, combo).a_dag.entries,
                          SparseCd(2.0 * field_ops(basis, h1).a_dag.entries)) == 0.0);

    combo.coeffs = h1.coeffs + h2.coeffs;
    const SparseCd sum(field_ops(basis, h1).a_dag.entries +
                       field_ops(basis, h2).a_dag.entries);
    CHECK(sparse_max_diff(field_ops(basis, combo).a_dag.entries, sum) < 1e-15);
}

TEST_CASE("canonical commutator holds below the top occupation sector") {
    const auto basis = enumerate_basis(2, 3);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Eigen::MatrixXcd ai(field_ops(basis, unit_mode(2, i)).a.entries);
            const Eigen::MatrixXcd adj(field_ops(basis, unit_mode(2, j)).a_dag.entries);
            const Eigen::MatrixXcd commutator = ai * adj - adj * ai;
            for (std::size_t c = 0; c < basis.dim(); ++c) {
                int total = 0;
                for (int v : basis.states[c]) total += v;
                if (total > basis.n_total_max - 1) continue;
                Eigen::VectorXcd expected = Eigen::VectorXcd::Zero(basis.dim());
                if (i == j) expected[c] = 1.0;
                CHECK((commutator.col(c) - expected).norm() < 1e-13);
            }
        }
    }
}

TEST_CASE("second quantization is diagonal with occupation-weighted eigenvalues") {
    const auto basis = enumerate_basis(2, 3);
    const std::vector<double> u = {-0.75, 0.75};
    const auto lf = dgamma(basis, u);
    const auto n = dgamma(basis, {1.0, 1.0});

    const Eigen::MatrixXcd lf_dense(lf.entries);
    CHECK(lf_dense(basis.rank({0, 0}), basis.rank({0, 0})) == std::complex<double>(0.0));
    CHECK(lf_dense(basis.rank({1, 0}), basis.rank({1, 0})).real() ==
          doctest::Approx(-0.75));
    const Eigen::MatrixXcd n_dense(n.entries);
    CHECK(n_dense(basis.rank({2, 1}), basis.rank({2, 1})).real() == doctest::Approx(3.0));

    CHECK(sparse_max_diff(SparseCd(lf.entries * n.entries),
                          SparseCd(n.entries * lf.entries)) == 0.0);
}

TEST_CASE("number operator raises the raising operator by one below the cutoff") {
    const auto basis = enumerate_basis(3, 3);
    OneBosonVector h;
    h.coeffs.resize(3);
    h.coeffs << 0.2, std::complex<double>(0.5, 0.5), -1.3;
    const Eigen::MatrixXcd number(dgamma(basis, {1.0, 1.0, 1.0}).entries);
    const Eigen::MatrixXcd raise(field_ops(basis, h).a_dag.entries);
    const Eigen::MatrixXcd defect = number * raise - raise * number - raise;
    for (std::size_t c = 0; c < basis.dim(); ++c) {
        int total = 0;
        for (int v : basis.states[c]) total += v;
        if (total + 1 <= basis.n_total_max) CHECK(defect.col(c).norm() < 1e-14);
    }
}

TEST_CASE("uniform and geometric grids satisfy the structural contract") {
    const auto uniform = make_uniform_grid(8, 2.0);
    CHECK_NOTHROW(validate_grid(uniform));
    CHECK(uniform.modes[4] == doctest::Approx(0.25));
    CHECK(uniform.modes[7] == doctest::Approx(1.75));
    double total = 0.0;
    for (double w : uniform.weights) total += w;
    CHECK(total == doctest::Approx(4.0));

    const auto geometric = make_geometric_grid(12, 0.01, 4.0);
    CHECK_NOTHROW(validate_grid(geometric));
    CHECK(geometric.modes[6] == doctest::Approx(0.01));
    CHECK(geometric.modes[11] < 4.0);
    const auto half = positive_part(geometric);
    CHECK(half.size() == 6);
    for (double u : half.modes) CHECK(u > 0.0);

    auto broken = uniform;
    broken.modes[3] = 0.0;
    CHECK_THROWS_AS(validate_grid(broken), config_error);
    broken = uniform;
    broken.weights[0] *= 2.0;
    CHECK_THROWS_AS(validate_grid(broken), config_error);
    broken = uniform;
    broken.modes.push_back(5.0);
    broken.weights.push_back(0.5);
    CHECK_THROWS_AS(validate_grid(broken), config_error);
}

TEST_CASE("discretization reproduces quadrature norms") {
    const auto grid = make_uniform_grid(16, 1.0);

    const auto zero = discretize([](double) { return std::complex<double>(0.0); }, grid,
                                 4.0 * kPi);
    CHECK(zero.coeffs.norm() == 0.0);

    const auto flat = discretize([](double) { return std::complex<double>(1.0); }, grid,
                                 4.0 * kPi);
    CHECK(flat.coeffs.squaredNorm() == doctest::Approx(8.0 * kPi).epsilon(1e-12));

    CHECK_THROWS_AS(discretize(
                        [](double u) {
                            return std::complex<double>(u > 0.5 ? NAN : 1.0);
                        },
                        grid, 1.0),
                    numerical_error);
}

TEST_CASE("discretized glued coupling norm converges under grid refinement") {
    model::FormFactor ff;
    ff.p = 0.5;
    const double beta = 1.0;
    const double phi = model::glue_phase_rule(ff.p, ff.phase0);
    auto tau = [&](double u) { return model::tau_beta(ff, beta, phi, u); };

    std::vector<double> norms;
    for (int m : {16, 32, 64, 128}) {
        const auto grid = make_uniform_grid(m, 8.0);
        norms.push_back(discretize(tau, grid, 4.0 * kPi).coeffs.squaredNorm());
    }
    const double d1 = std::abs(norms[1] - norms[0]);
    const double d2 = std::abs(norms[2] - norms[1]);
    const double d3 = std::abs(norms[3] - norms[2]);
    CHECK(d2 < d1);
    CHECK(d3 < d2);

    const double continuum =
        4.0 * kPi *
        (integrate([&](double u) { return std::norm(tau(u)); }, -8.0, 0.0).value +
         integrate([&](double u) { return std::norm(tau(u)); }, 0.0, 8.0).value);
    CHECK(norms.back() == doctest::Approx(continuum).epsilon(1e-2));
}

TEST_CASE("vacuum characteristic function matches the gaussian closed form") {
    const auto trivial = enumerate_basis(2, 3);
    OneBosonVector zero_h;
    zero_h.coeffs = Eigen::VectorXcd::Zero(2);
    const auto [one_lhs, one_rhs] = weyl_expectation_check(trivial, zero_h);
    CHECK(one_lhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one_rhs == doctest::Approx(1.0).epsilon(1e-14));

    OneBosonVector h;
    h.coeffs = Eigen::VectorXcd::Constant(1, 1.0);
    const auto [lhs, rhs] = weyl_expectation_check(enumerate_basis(1, 12), h);
    CHECK(rhs == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
    CHECK(std::abs(lhs - rhs) <= 1e-6);

    double previous = 1.0;
    for (int n : {2, 4, 8, 16}) {
        const auto [l, r] = weyl_expectation_check(enumerate_basis(1, n), h);
        const double err = std::abs(l - r);
        CHECK(err <= previous * (1.0 + 1e-12));
        previous = err;
    }

    OneBosonVector wide;
    wide.coeffs = Eigen::VectorXcd::Zero(2002);
    CHECK_THROWS_AS(weyl_expectation_check(enumerate_basis(2002, 1), wide), budget_error);
}

TEST_CASE("assembly is deterministic") {
    const auto basis = enumerate_basis(3, 2);
    OneBosonVector h;
    h.coeffs.resize(3);
    h.coeffs << 0.1, std::complex<double>(-0.2, 0.9), 2.0;
    const auto first = field_ops(basis, h);
    const auto second = field_ops(basis, h);
    CHECK(sparse_max_diff(first.phi.entries, second.phi.entries) == 0.0);
    REQUIRE(first.phi.entries.nonZeros() == second.phi.entries.nonZeros());
    for (int k = 0; k <= first.phi.entries.outerSize(); ++k)
        CHECK(first.phi.entries.outerIndexPtr()[k] ==
              second.phi.entries.outerIndexPtr()[k]);
}
