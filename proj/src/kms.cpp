#include "thermofield/kms.hpp"

#include <cmath>
#include <complex>

#include "thermofield/errors.hpp"
#include "thermofield/lanczos.hpp"
#include "thermofield/spectral.hpp"

namespace tfld::kms {

StateVector make_state(Eigen::VectorXcd coeffs) {
    StateVector state;
    state.norm = coeffs.norm();
    state.coeffs = std::move(coeffs);
    return state;
}

void check_state(const StateVector& state) {
    const double recomputed = state.coeffs.norm();
    if (std::abs(recomputed - state.norm) > 1e-12 * std::max(1.0, recomputed))
        throw numerical_error("cached state norm " + std::to_string(state.norm) +
                              " drifted from recomputed " + std::to_string(recomputed));
}

StateVector reference_vector(const model::ModelSpec& spec,
                             const fock::FockBasis& basis) {
    const int d = spec.atom.dim;
    const auto gibbs = model::gibbs_vector(spec.atom, spec.beta);
    Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(
        static_cast<Eigen::Index>(basis.dim() * static_cast<std::size_t>(d * d)));
    for (int j = 0; j < d; ++j)
        coeffs[liouvillian::flat_index(d, basis.dim(), j, j, 0)] = gibbs[j * d + j];
    return make_state(std::move(coeffs));
}

StateVector interacting_kms_vector(const liouvillian::LiouvillianBundle& bundle,
                                   const KrylovSettings& settings) {
    const auto omega = reference_vector(bundle.spec, bundle.basis);
    const SparseCd half_generator(bundle.L0.entries +
                                  SparseCd(bundle.spec.lambda * bundle.I_ell.entries));
    krylov::ExpmOptions options;
    options.tol = settings.tol;
    options.max_subspace = settings.max_subspace;
    options.stability_limit = settings.stability_limit;
    Eigen::VectorXcd evolved = krylov::expm_multiply(
        half_generator, std::complex<double>(-bundle.spec.beta / 2.0, 0.0),
        omega.coeffs, options);
    const double norm = evolved.norm();
    if (norm == 0.0)
        throw numerical_error("half-Liouvillian exponential annihilated the reference");
    evolved /= norm;
    const std::complex<double> overlap = evolved.dot(omega.coeffs);
    if (std::abs(overlap) > 0.0) evolved *= overlap / std::abs(overlap);
    return make_state(std::move(evolved));
}

double kernel_residual(const liouvillian::LiouvillianBundle& bundle,
                       const StateVector& psi) {
    return (bundle.L_lambda.entries * psi.coeffs).norm();
}

double projection_distance(const StateVector& psi, const StateVector& chi) {
    const double overlap = std::abs(psi.coeffs.dot(chi.coeffs));
    return std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
}

DecompositionReport overlap_decomposition_check(
    const liouvillian::LiouvillianBundle& bundle, const StateVector& psi) {
    const int d = bundle.spec.atom.dim;
    const auto fock_dim = bundle.basis.dim();
    const auto reference = reference_vector(bundle.spec, bundle.basis);

    DecompositionReport report;
    const double distance = projection_distance(psi, reference);
    report.lhs = distance * distance;

    // Occupation of atomic levels other than the ground level, left factor.
    double excited_weight = 0.0;
    for (int l = 1; l < d; ++l)
        for (int r = 0; r < d; ++r)
            for (std::size_t k = 0; k < fock_dim; ++k)
                excited_weight +=
                    std::norm(psi.coeffs[liouvillian::flat_index(d, fock_dim, l, r, k)]);
    report.q_term = 4.0 * excited_weight;

    // Distance between the atomic Gibbs purification and the doubled ground state.
    const auto gibbs = model::gibbs_vector(bundle.spec.atom, bundle.spec.beta);
    const double ground_overlap_sq = gibbs[0] * gibbs[0];
    report.middle_term = 2.0 * std::sqrt(std::max(0.0, 1.0 - ground_overlap_sq));

    const Eigen::VectorXcd number_applied = bundle.N.entries * psi.coeffs;
    report.n_term = 2.0 * std::real(psi.coeffs.dot(number_applied));

    report.rhs = report.q_term + report.middle_term + report.n_term;
    return report;
}

namespace {

// Deterministic kernel representative where the Krylov exponential is refused.
StateVector kernel_cluster_vector(const liouvillian::LiouvillianBundle& bundle,
                                  const StateVector& reference) {
    return make_state(spectral::kernel_cluster_projection(bundle.L_lambda.entries,
                                                          reference.coeffs));
}

} // namespace

std::vector<SweepRecord> overlap_sweep(const model::ModelSpec& spec_template,
                                       const std::vector<double>& betas,
                                       const std::vector<double>& lambdas,
                                       const SweepResources& resources) {
    double min_p = 10.0;
    for (const auto& coupling : spec_template.couplings)
        min_p = std::min(min_p, coupling.ff.p);

    const auto basis = fock::enumerate_basis(resources.mode_count, resources.n_total_max);
    std::vector<SweepRecord> records;
    for (double beta : betas) {
        const auto grid =
            min_p < 0.0
                ? fock::make_geometric_grid(resources.mode_count,
                                            std::min(resources.u_min, 0.5 / beta),
                                            resources.u_max)
                : fock::make_uniform_grid(resources.mode_count, resources.u_max);
        for (double lambda : lambdas) {
            SweepRecord record;
            record.beta = beta;
            record.lambda = lambda;
            try {
                auto spec = spec_template;
                spec.beta = beta;
                spec.lambda = lambda;
                const auto bundle = liouvillian::assemble(spec, basis, grid);
                const auto reference = reference_vector(spec, basis);

                StateVector psi;
                if (lambda == 0.0) {
                    psi = reference;
                } else {
                    try {
                        psi = interacting_kms_vector(bundle);
                    } catch (const numerical_error&) {
                        psi = kernel_cluster_vector(bundle, reference);
                        record.extras["kernel_method"] = 1.0;
                    }
                }
                record.overlap_distance =
                    lambda == 0.0 ? 0.0 : projection_distance(psi, reference);
                record.kernel_residual = kernel_residual(bundle, psi);
                record.n_expectation =
                    std::real(psi.coeffs.dot(Eigen::VectorXcd(bundle.N.entries * psi.coeffs)));
            } catch (const std::exception&) {
                record.extras["failed"] = 1.0;
            }
            records.push_back(std::move(record));
        }
    }
    return records;
}

} // namespace tfld::kms
