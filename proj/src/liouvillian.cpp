#include "thermofield/liouvillian.hpp"

#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "thermofield/errors.hpp"

namespace tfld::liouvillian {

namespace {

using Triplet = Eigen::Triplet<std::complex<double>>;

void accumulate_kron3(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                      const SparseCd& f, std::complex<double> scale,
                      std::vector<Triplet>& out) {
    const int d = static_cast<int>(a.rows());
    const auto fock_dim = static_cast<std::size_t>(f.rows());
    for (int ar = 0; ar < d; ++ar) {
        for (int ac = 0; ac < d; ++ac) {
            if (a(ar, ac) == 0.0) continue;
            for (int br = 0; br < d; ++br) {
                for (int bc = 0; bc < d; ++bc) {
                    if (b(br, bc) == 0.0) continue;
                    const std::complex<double> atom = scale * a(ar, ac) * b(br, bc);
                    for (int k = 0; k < f.outerSize(); ++k) {
                        for (SparseCd::InnerIterator it(f, k); it; ++it) {
                            out.emplace_back(
                                flat_index(d, fock_dim, ar, br,
                                           static_cast<std::size_t>(it.row())),
                                flat_index(d, fock_dim, ac, bc,
                                           static_cast<std::size_t>(it.col())),
                                atom * it.value());
                        }
                    }
                }
            }
        }
    }
}

enum class SmearKind { value, derivative };
enum class Side { both, left_only };

// Shared body of build_I / build_I_ell / build_I1.
OperatorMatrix build_interaction(const model::ModelSpec& spec,
                                 const fock::FockBasis& basis,
                                 const fock::BathGrid& grid, SmearKind kind, Side side) {
    const int d = spec.atom.dim;
    const auto fock_dim = basis.dim();
    const auto total = static_cast<Eigen::Index>(fock_dim * d * d);
    const double beta = spec.beta;
    const double phi = spec.glue_phase();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);

    std::vector<Triplet> triplets;
    for (const auto& coupling : spec.couplings) {
        const auto& ff = coupling.ff;
        const auto plus = fock::discretize(
            [&](double u) {
                return kind == SmearKind::value ? model::tau_beta(ff, beta, phi, u)
                                                : model::d_tau_beta(ff, beta, phi, u, 1);
            },
            grid, ff.angular_factor);
        const auto field_plus = fock::field_ops(basis, plus).phi;
        accumulate_kron3(coupling.G, id, field_plus.entries, 1.0, triplets);

        if (side == Side::left_only) continue;
        const auto minus = fock::discretize(
            [&](double u) {
                return kind == SmearKind::value
                           ? model::weighted_tau_beta(ff, beta, phi, u)
                           : model::weighted_tau_beta(ff, beta, phi, u, 1);
            },
            grid, ff.angular_factor);
        const auto field_minus = fock::field_ops(basis, minus).phi;
        accumulate_kron3(id, coupling.G.conjugate(), field_minus.entries, -1.0, triplets);
    }

    SparseCd m(total, total);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return make_operator(std::move(m), true);
}

} // namespace

SparseCd kron3(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const SparseCd& f,
               std::complex<double> scale) {
    const auto total =
        static_cast<Eigen::Index>(a.rows() * b.rows() * static_cast<std::size_t>(f.rows()));
    std::vector<Triplet> triplets;
    accumulate_kron3(a, b, f, scale, triplets);
    SparseCd m(total, total);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

OperatorMatrix build_L0(const model::ModelSpec& spec, const fock::FockBasis& basis,
                        const fock::BathGrid& grid) {
    const int d = spec.atom.dim;
    const auto fock_dim = basis.dim();
    const auto total = static_cast<Eigen::Index>(fock_dim * d * d);

    std::vector<double> boson_energy(fock_dim, 0.0);
    for (std::size_t k = 0; k < fock_dim; ++k)
        for (int j = 0; j < basis.mode_count; ++j)
            boson_energy[k] += basis.states[k][j] * grid.modes[j];

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(total));
    for (int l = 0; l < d; ++l) {
        for (int r = 0; r < d; ++r) {
            const double atom = spec.atom.energies[l] - spec.atom.energies[r];
            for (std::size_t k = 0; k < fock_dim; ++k) {
                const double value = atom + boson_energy[k];
                if (value != 0.0) {
                    const auto idx = flat_index(d, fock_dim, l, r, k);
                    triplets.emplace_back(idx, idx, value);
                }
            }
        }
    }
    SparseCd m(total, total);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return make_operator(std::move(m), true);
}

OperatorMatrix build_I(const model::ModelSpec& spec, const fock::FockBasis& basis,
                       const fock::BathGrid& grid) {
    return build_interaction(spec, basis, grid, SmearKind::value, Side::both);
}

OperatorMatrix build_I_ell(const model::ModelSpec& spec, const fock::FockBasis& basis,
                           const fock::BathGrid& grid) {
    return build_interaction(spec, basis, grid, SmearKind::value, Side::left_only);
}

OperatorMatrix build_I1(const model::ModelSpec& spec, const fock::FockBasis& basis,
                        const fock::BathGrid& grid) {
    return build_interaction(spec, basis, grid, SmearKind::derivative, Side::both);
}

OperatorMatrix build_number(int atom_dim, const fock::FockBasis& basis) {
    const auto number =
        fock::dgamma(basis, std::vector<double>(basis.mode_count, 1.0)).entries;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(atom_dim, atom_dim);
    return make_operator(kron3(id, id, number), true);
}

LiouvillianBundle assemble(const model::ModelSpec& spec, const fock::FockBasis& basis,
                           const fock::BathGrid& grid) {
    model::validate_spec(spec);
    fock::validate_grid(grid);
    if (grid.size() != basis.mode_count)
        throw config_error("grid and basis disagree on the mode count");

    LiouvillianBundle bundle;
    bundle.L0 = build_L0(spec, basis, grid);
    bundle.I = build_I(spec, basis, grid);
    bundle.I_ell = build_I_ell(spec, basis, grid);
    bundle.I1 = build_I1(spec, basis, grid);
    bundle.N = build_number(spec.atom.dim, basis);
    SparseCd full = bundle.L0.entries + SparseCd(spec.lambda * bundle.I.entries);
    bundle.L_lambda = make_operator(std::move(full), true);
    bundle.spec = spec;
    bundle.basis = basis;
    bundle.grid = grid;
    return bundle;
}

OperatorMatrix build_zero_temperature_hamiltonian(const model::ModelSpec& spec,
                                                  const fock::FockBasis& basis,
                                                  const fock::BathGrid& grid_positive_only) {
    const int d = spec.atom.dim;
    const auto fock_dim = basis.dim();
    const auto total = static_cast<Eigen::Index>(fock_dim * static_cast<std::size_t>(d));
    for (double u : grid_positive_only.modes)
        if (u <= 0.0)
            throw config_error("zero-temperature grid must contain positive modes only");
    if (grid_positive_only.size() != basis.mode_count)
        throw config_error("grid and basis disagree on the mode count");

    std::vector<Triplet> triplets;
    const auto boson = fock::dgamma(basis, grid_positive_only.modes).entries;
    for (int a = 0; a < d; ++a) {
        for (std::size_t k = 0; k < fock_dim; ++k) {
            const auto idx = static_cast<Eigen::Index>(a * fock_dim + k);
            triplets.emplace_back(idx, idx, spec.atom.energies[a]);
        }
        for (int k = 0; k < boson.outerSize(); ++k)
            for (SparseCd::InnerIterator it(boson, k); it; ++it)
                triplets.emplace_back(static_cast<Eigen::Index>(a * fock_dim + it.row()),
                                      static_cast<Eigen::Index>(a * fock_dim + it.col()),
                                      it.value());
    }

    for (const auto& coupling : spec.couplings) {
        const auto& ff = coupling.ff;
        const auto smeared = fock::discretize([&](double u) { return u * ff.g(u); },
                                              grid_positive_only, ff.angular_factor);
        const auto field = fock::field_ops(basis, smeared).phi;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                const std::complex<double> atom = spec.lambda * coupling.G(a, b);
                if (atom == 0.0) continue;
                for (int k = 0; k < field.entries.outerSize(); ++k)
                    for (SparseCd::InnerIterator it(field.entries, k); it; ++it)
                        triplets.emplace_back(
                            static_cast<Eigen::Index>(a * fock_dim + it.row()),
                            static_cast<Eigen::Index>(b * fock_dim + it.col()),
                            atom * it.value());
            }
        }
    }

    SparseCd m(total, total);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return make_operator(std::move(m), true);
}

double relative_bound_check(const LiouvillianBundle& bundle, std::size_t dense_budget) {
    const auto dim = bundle.I.dim;
    if (dim > dense_budget)
        throw budget_error("dense norm needs dimension <= " +
                           std::to_string(dense_budget) + ", got " + std::to_string(dim));

    Eigen::VectorXd scale(static_cast<Eigen::Index>(dim));
    const Eigen::MatrixXcd number(bundle.N.entries);
    for (Eigen::Index i = 0; i < scale.size(); ++i)
        scale[i] = 1.0 / std::sqrt(number(i, i).real() + 1.0);

    const Eigen::MatrixXcd weighted =
        Eigen::MatrixXcd(bundle.I.entries) * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(weighted.adjoint() * weighted,
                                                           Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

} // namespace tfld::liouvillian
