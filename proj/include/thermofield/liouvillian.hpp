// liouvillian.hpp: assembly of the standard Liouvillian L_lambda = L0 + lambda*I and
// its companions (interaction I, left half I_ell, derivative interaction I1, number
// operator N, zero-temperature Hamiltonian) on C^d (x) C^d (x) F_trunc.
#pragma once

#include <cstddef>

#include "thermofield/fock.hpp"
#include "thermofield/model.hpp"
#include "thermofield/operator.hpp"

namespace tfld::liouvillian {

// Product index convention used everywhere: (left*d + right)*dim(F) + boson.
inline Eigen::Index flat_index(int atom_dim, std::size_t fock_dim, int left, int right,
                               std::size_t boson) {
    return static_cast<Eigen::Index>(
        (static_cast<std::size_t>(left * atom_dim + right)) * fock_dim + boson);
}

// A (x) B (x) F, scaled; A and B act on the doubled atom, F on the Fock factor.
SparseCd kron3(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const SparseCd& f,
               std::complex<double> scale = 1.0);

struct LiouvillianBundle {
    OperatorMatrix L0;
    OperatorMatrix I;
    OperatorMatrix I_ell;
    OperatorMatrix I1;
    OperatorMatrix N;
    OperatorMatrix L_lambda;
    model::ModelSpec spec;
    fock::FockBasis basis;
    fock::BathGrid grid;
};

// H_at (x) 1 (x) 1 - 1 (x) H_at (x) 1 + 1 (x) 1 (x) dGamma(u); exactly diagonal.
OperatorMatrix build_L0(const model::ModelSpec& spec, const fock::FockBasis& basis,
                        const fock::BathGrid& grid);

// sum_alpha [ G_a (x) 1 (x) phi(tau_beta g_a) - 1 (x) conj(G_a) (x) phi(e^{-bu/2} tau_beta g_a) ],
// the conjugation taken entrywise in the atomic energy basis.
OperatorMatrix build_I(const model::ModelSpec& spec, const fock::FockBasis& basis,
                       const fock::BathGrid& grid);

// First summand of I only (the right-acting term dropped).
OperatorMatrix build_I_ell(const model::ModelSpec& spec, const fock::FockBasis& basis,
                           const fock::BathGrid& grid);

// Same structure as I with both smearing functions replaced by their u-derivatives.
OperatorMatrix build_I1(const model::ModelSpec& spec, const fock::FockBasis& basis,
                        const fock::BathGrid& grid);

// 1 (x) 1 (x) dGamma(1).
OperatorMatrix build_number(int atom_dim, const fock::FockBasis& basis);

// Validates spec and grid structurally, then builds every operator plus
// L_lambda = L0 + lambda * I.
LiouvillianBundle assemble(const model::ModelSpec& spec, const fock::FockBasis& basis,
                           const fock::BathGrid& grid);

// H_lambda = H_at (x) 1 + 1 (x) dGamma(u) + lambda sum_a G_a (x) phi(u g_a(u)) on
// C^d (x) F over positive frequencies only; the factor u embeds the radial measure.
OperatorMatrix build_zero_temperature_hamiltonian(const model::ModelSpec& spec,
                                                  const fock::FockBasis& basis,
                                                  const fock::BathGrid& grid_positive_only);

inline constexpr std::size_t kDenseNormBudget = 4'000;

// ||I (N+1)^{-1/2}|| as the largest singular value, computed densely.
double relative_bound_check(const LiouvillianBundle& bundle,
                            std::size_t dense_budget = kDenseNormBudget);

} // namespace tfld::liouvillian
