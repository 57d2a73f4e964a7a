// kms.hpp: reference and interacting KMS vectors and their separation; the
// overlap decomposition and the (beta, lambda) sweep.
#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermofield/liouvillian.hpp"

namespace tfld::kms {

struct StateVector {
    Eigen::VectorXcd coeffs;
    double norm{0.0};
};

// Wraps a coefficient vector and caches its norm.
StateVector make_state(Eigen::VectorXcd coeffs);

// Throws numerical_error when the cached norm drifts from recomputation by > 1e-12.
void check_state(const StateVector& state);

// Gibbs purification tensor vacuum: unit vector in the kernel of L0.
StateVector reference_vector(const model::ModelSpec& spec, const fock::FockBasis& basis);

struct KrylovSettings {
    double tol{1e-10};
    int max_subspace{200};
    // See krylov::ExpmOptions: estimated rounding amplification ceiling. Large
    // beta * spectral-width products make the half-Liouvillian exponential lose
    // all digits; the call throws numerical_error instead of returning noise.
    double stability_limit{1e-6};
};

// normalize(exp(-beta(L0 + lambda I_ell)/2) Omega_{beta,0}) by Krylov action.
StateVector interacting_kms_vector(const liouvillian::LiouvillianBundle& bundle,
                                   const KrylovSettings& settings = {});

// ||L_lambda psi||.
double kernel_residual(const liouvillian::LiouvillianBundle& bundle,
                       const StateVector& psi);

// ||P_psi - P_chi|| = sqrt(1 - |<psi, chi>|^2) for unit rays.
double projection_distance(const StateVector& psi, const StateVector& chi);

struct DecompositionReport {
    double lhs{0.0};         // squared projection distance of psi from the reference
    double q_term{0.0};      // 4 <psi, (1 - P_ground) (x) 1 (x) 1 psi>
    double middle_term{0.0}; // 2 ||P_{atomic Gibbs} - P_{ground (x) ground}||
    double n_term{0.0};      // 2 <psi, N psi>
    double rhs{0.0};         // sum of the three terms
};

// Reports both sides of the low-temperature overlap decomposition; no inequality
// is enforced here, callers compare the numbers.
DecompositionReport overlap_decomposition_check(
    const liouvillian::LiouvillianBundle& bundle, const StateVector& psi_interacting);

struct SweepRecord {
    double beta{0.0};
    double lambda{0.0};
    double overlap_distance{0.0};
    double kernel_residual{0.0};
    double n_expectation{0.0};
    std::map<std::string, double> extras;
};

struct SweepResources {
    int mode_count{8};
    double u_max{4.0};
    int n_total_max{2};
    // Smallest positive mode when a geometric grid is selected (infrared classes);
    // shrunk automatically like 1/beta so the glued map stays resolved near zero.
    double u_min{0.05};
};

// One record per (beta, lambda). The interacting vector comes from the Krylov
// exponential where it is numerically certified; where thermal amplification
// forbids that, the reference projected onto the near-kernel eigencluster of
// L_lambda stands in for it (the truncated kernel is numerically degenerate, so
// the cluster projection is the deterministic representative), flagged in
// extras["kernel_method"]. Per-point failures land in extras["failed"].
std::vector<SweepRecord> overlap_sweep(const model::ModelSpec& spec_template,
                                       const std::vector<double>& betas,
                                       const std::vector<double>& lambdas,
                                       const SweepResources& resources = {});

} // namespace tfld::kms
