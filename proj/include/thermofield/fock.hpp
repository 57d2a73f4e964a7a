// fock.hpp: symmetric frequency grids and the truncated bosonic Fock space.
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "thermofield/operator.hpp"

namespace tfld::fock {

inline constexpr std::size_t kDefaultDimensionBudget = 4'000'000;
inline constexpr std::size_t kDenseExponentialBudget = 2'000;

struct BathGrid {
    std::vector<double> modes;   // strictly increasing, symmetric about 0, never 0
    std::vector<double> weights; // positive quadrature weights, paired across +-u

    int size() const { return static_cast<int>(modes.size()); }
};

// Midpoint rule: modes at +-(k - 1/2) * du, k = 1..M/2, du = 2 u_max / M.
BathGrid make_uniform_grid(int mode_count, double u_max);

// Geometric cell boundaries on (0, u_max] clustering at 0; the innermost cell
// is [0, 2 u_min] so the smallest positive mode sits at u_min. Mirrored to u<0.
BathGrid make_geometric_grid(int mode_count, double u_min, double u_max);

// Positive-frequency half, preserving mode order and weights.
BathGrid positive_part(const BathGrid& grid);

// Throws config_error on asymmetry, zero modes, odd count, or bad weights.
void validate_grid(const BathGrid& grid);

struct FockBasis {
    int mode_count = 0;
    int n_total_max = 0;
    std::vector<std::vector<int>> states; // lexicographically ordered occupations

    std::size_t dim() const { return states.size(); }
    std::size_t rank(const std::vector<int>& state) const;

    // binom[m][b] = C(m + b, m) = #occupations of length m with total <= b.
    std::vector<std::vector<std::uint64_t>> count_table;
};

FockBasis enumerate_basis(int mode_count, int n_total_max,
                          std::size_t dimension_budget = kDefaultDimensionBudget);

struct OneBosonVector {
    Eigen::VectorXcd coeffs;
};

struct FieldOps {
    OperatorMatrix a_dag;
    OperatorMatrix a;
    OperatorMatrix phi;
};

// a_dag is linear in h, a is its adjoint (antilinear in h), phi = (a_dag + a)/sqrt(2).
// Transitions above the total-occupation cutoff are projected out.
FieldOps field_ops(const FockBasis& basis, const OneBosonVector& h);

// Diagonal second quantization: eigenvalue sum_j n_j * multiplier_j.
OperatorMatrix dgamma(const FockBasis& basis, const std::vector<double>& multiplier);

// coeffs_j = sqrt(angular_factor * w_j) * f(u_j).
OneBosonVector discretize(const std::function<std::complex<double>(double)>& f,
                          const BathGrid& grid, double angular_factor);

// (Re<vac, exp(i phi(h)) vac> via dense spectral exponential, exp(-|h|^2/4)).
std::pair<double, double> weyl_expectation_check(const FockBasis& basis,
                                                 const OneBosonVector& h);

} // namespace tfld::fock
