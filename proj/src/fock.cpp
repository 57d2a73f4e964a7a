#include "thermofield/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "thermofield/errors.hpp"

namespace tfld::fock {

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

BathGrid make_uniform_grid(int mode_count, double u_max) {
    if (mode_count < 2 || mode_count % 2 != 0)
        throw config_error("grid mode count must be even and >= 2, got " +
                           std::to_string(mode_count));
    if (!(u_max > 0.0))
        throw config_error("grid u_max must be positive");
    const int half = mode_count / 2;
    const double du = u_max / half;
    BathGrid grid;
    grid.modes.resize(mode_count);
    grid.weights.assign(mode_count, du);
    for (int k = 0; k < half; ++k) {
        const double u = (k + 0.5) * du;
        grid.modes[half + k] = u;
        grid.modes[half - 1 - k] = -u;
    }
    return grid;
}

BathGrid make_geometric_grid(int mode_count, double u_min, double u_max) {
    if (mode_count < 4 || mode_count % 2 != 0)
        throw config_error("geometric grid needs an even mode count >= 4");
    if (!(u_min > 0.0) || !(2.0 * u_min < u_max))
        throw config_error("geometric grid needs 0 < u_min < u_max/2");
    const int half = mode_count / 2;
    std::vector<double> bounds(half + 1);
    bounds[0] = 0.0;
    bounds[1] = 2.0 * u_min;
    const double ratio = std::pow(u_max / bounds[1], 1.0 / (half - 1));
    for (int j = 2; j <= half; ++j) bounds[j] = bounds[1] * std::pow(ratio, j - 1);
    bounds[half] = u_max;

    BathGrid grid;
    grid.modes.resize(mode_count);
    grid.weights.resize(mode_count);
    for (int j = 0; j < half; ++j) {
        const double node = 0.5 * (bounds[j] + bounds[j + 1]);
        const double weight = bounds[j + 1] - bounds[j];
        grid.modes[half + j] = node;
        grid.weights[half + j] = weight;
        grid.modes[half - 1 - j] = -node;
        grid.weights[half - 1 - j] = weight;
    }
    return grid;
}

BathGrid positive_part(const BathGrid& grid) {
    BathGrid out;
    for (int j = 0; j < grid.size(); ++j) {
        if (grid.modes[j] > 0.0) {
            out.modes.push_back(grid.modes[j]);
            out.weights.push_back(grid.weights[j]);
        }
    }
    return out;
}

void validate_grid(const BathGrid& grid) {
    const int m = grid.size();
    if (m < 2 || m % 2 != 0)
        throw config_error("grid must have an even number of modes >= 2");
    if (grid.weights.size() != grid.modes.size())
        throw config_error("grid modes and weights must have equal length");
    const double scale = std::max(std::abs(grid.modes.front()), std::abs(grid.modes.back()));
    for (int j = 0; j < m; ++j) {
        if (!std::isfinite(grid.modes[j]) || grid.modes[j] == 0.0)
            throw config_error("grid modes must be finite and nonzero");
        if (j > 0 && !(grid.modes[j] > grid.modes[j - 1]))
            throw config_error("grid modes must be strictly increasing");
        if (!(grid.weights[j] > 0.0))
            throw config_error("grid weights must be positive");
        const int mirror = m - 1 - j;
        if (std::abs(grid.modes[j] + grid.modes[mirror]) > 1e-12 * scale)
            throw config_error("grid must be symmetric under u -> -u");
        if (std::abs(grid.weights[j] - grid.weights[mirror]) >
            1e-12 * std::abs(grid.weights[j]))
            throw config_error("mirrored grid modes must carry equal weights");
    }
}

std::size_t FockBasis::rank(const std::vector<int>& state) const {
    if (static_cast<int>(state.size()) != mode_count)
        throw std::out_of_range("occupation state has wrong length");
    std::uint64_t index = 0;
    int budget = n_total_max;
    for (int i = 0; i < mode_count; ++i) {
        const int v = state[i];
        if (v < 0 || v > budget) throw std::out_of_range("occupation state outside basis");
        for (int w = 0; w < v; ++w)
            index += count_table[mode_count - i - 1][budget - w];
        budget -= v;
    }
    return static_cast<std::size_t>(index);
}

FockBasis enumerate_basis(int mode_count, int n_total_max, std::size_t dimension_budget) {
    if (mode_count < 1) throw config_error("basis needs at least one mode");
    if (n_total_max < 0) throw config_error("occupation cutoff must be nonnegative");

    const double dim_estimate =
        std::exp(std::lgamma(mode_count + n_total_max + 1.0) -
                 std::lgamma(mode_count + 1.0) - std::lgamma(n_total_max + 1.0));
    if (dim_estimate > 1.000001 * static_cast<double>(dimension_budget))
        throw budget_error("basis dimension " + format_double(std::round(dim_estimate)) +
                           " exceeds budget " + std::to_string(dimension_budget));

    FockBasis basis;
    basis.mode_count = mode_count;
    basis.n_total_max = n_total_max;
    basis.count_table.assign(mode_count + 1,
                             std::vector<std::uint64_t>(n_total_max + 1, 1));
    for (int m = 1; m <= mode_count; ++m)
        for (int b = 1; b <= n_total_max; ++b)
            basis.count_table[m][b] =
                basis.count_table[m - 1][b] + basis.count_table[m][b - 1];

    const auto dim = static_cast<std::size_t>(basis.count_table[mode_count][n_total_max]);
    basis.states.reserve(dim);
    std::vector<int> current(mode_count, 0);
    const std::function<void(int, int)> fill = [&](int pos, int budget) {
        if (pos == mode_count) {
            basis.states.push_back(current);
            return;
        }
        for (int v = 0; v <= budget; ++v) {
            current[pos] = v;
            fill(pos + 1, budget - v);
        }
        current[pos] = 0;
    };
    fill(0, n_total_max);
    return basis;
}

FieldOps field_ops(const FockBasis& basis, const OneBosonVector& h) {
    const int m = basis.mode_count;
    if (h.coeffs.size() != m)
        throw std::invalid_argument("one-boson vector length does not match mode count");
    const auto dim = static_cast<Eigen::Index>(basis.dim());

    std::vector<Eigen::Triplet<std::complex<double>>> triplets;
    std::vector<int> target;
    for (std::size_t col = 0; col < basis.dim(); ++col) {
        const auto& state = basis.states[col];
        int total = 0;
        for (int v : state) total += v;
        if (total + 1 > basis.n_total_max) continue;
        for (int j = 0; j < m; ++j) {
            target = state;
            target[j] += 1;
            const auto row = static_cast<Eigen::Index>(basis.rank(target));
            triplets.emplace_back(row, static_cast<Eigen::Index>(col),
                                  h.coeffs[j] * std::sqrt(state[j] + 1.0));
        }
    }

    SparseCd raising(dim, dim);
    raising.setFromTriplets(triplets.begin(), triplets.end());
    raising.makeCompressed();
    SparseCd lowering = raising.adjoint();
    SparseCd field = SparseCd((raising + lowering) * (1.0 / std::sqrt(2.0)));

    FieldOps ops;
    ops.a_dag = make_operator(std::move(raising), false);
    ops.a = make_operator(std::move(lowering), false);
    ops.phi = make_operator(std::move(field), true);
    return ops;
}

OperatorMatrix dgamma(const FockBasis& basis, const std::vector<double>& multiplier) {
    if (static_cast<int>(multiplier.size()) != basis.mode_count)
        throw std::invalid_argument("multiplier length does not match mode count");
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    std::vector<Eigen::Triplet<std::complex<double>>> triplets;
    triplets.reserve(basis.dim());
    for (std::size_t k = 0; k < basis.dim(); ++k) {
        double value = 0.0;
        for (int j = 0; j < basis.mode_count; ++j)
            value += basis.states[k][j] * multiplier[j];
        if (value != 0.0)
            triplets.emplace_back(static_cast<Eigen::Index>(k),
                                  static_cast<Eigen::Index>(k), value);
    }
    SparseCd m(dim, dim);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return make_operator(std::move(m), true);
}

OneBosonVector discretize(const std::function<std::complex<double>(double)>& f,
                          const BathGrid& grid, double angular_factor) {
    OneBosonVector h;
    h.coeffs.resize(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const std::complex<double> value = f(grid.modes[j]);
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
            throw numerical_error("non-finite coupling value at grid point u = " +
                                  format_double(grid.modes[j]));
        h.coeffs[j] = std::sqrt(angular_factor * grid.weights[j]) * value;
    }
    return h;
}

std::pair<double, double> weyl_expectation_check(const FockBasis& basis,
                                                 const OneBosonVector& h) {
    if (basis.dim() > kDenseExponentialBudget)
        throw budget_error("dense exponential needs dimension <= " +
                           std::to_string(kDenseExponentialBudget) + ", got " +
                           std::to_string(basis.dim()));
    const auto ops = field_ops(basis, h);
    const Eigen::MatrixXcd dense(ops.phi.entries);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
    const std::size_t vacuum = basis.rank(std::vector<int>(basis.mode_count, 0));
    std::complex<double> expectation = 0.0;
    for (Eigen::Index k = 0; k < dense.rows(); ++k) {
        const std::complex<double> amplitude =
            solver.eigenvectors()(static_cast<Eigen::Index>(vacuum), k);
        expectation += std::norm(amplitude) *
                       std::exp(std::complex<double>(0.0, solver.eigenvalues()[k]));
    }
    const double rhs = std::exp(-0.25 * h.coeffs.squaredNorm());
    return {expectation.real(), rhs};
}

} // namespace tfld::fock
