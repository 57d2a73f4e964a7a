// spectral.hpp: eigenanalysis of L_lambda near zero, the golden-rule level-shift
// matrix and its gap, the conjugate operator A0, the commutator form B, the virial
// check, the Feshbach map, and the positive-commutator positivity probe.
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "thermofield/liouvillian.hpp"

namespace tfld::spectral {

struct PCParameters {
    double theta{1.0};
    double epsilon{1.0};
    double delta{0.0};
    double m{0.0};      // Feshbach spectral parameter
    double nu{1.0};     // number-operator ball radius, >= 1
    double e{0.6};      // epsilon exponent, 0 < t < e < 1
    double t{0.1};      // theta exponent, t > 3e - 2
};

struct EigenResult {
    std::vector<double> eigenvalues;        // sorted by |value|
    std::vector<Eigen::VectorXcd> vectors;  // unit norm
    std::vector<double> residuals;          // ||L v - value v||
};

// The count eigenpairs of L nearest zero; dense solve below dense_threshold,
// shift-invert Lanczos with deflation above. Non-convergence raises a numerical
// error carrying the iteration trace.
EigenResult low_spectrum(const OperatorMatrix& L, int count, double tol = 1e-9,
                         std::size_t dense_threshold = 2000);

// Unit projection of seed onto the near-zero eigencluster of L. Truncation leaves
// the kernel numerically degenerate, so single eigenvectors are an arbitrary
// rotation of the cluster; the projection is basis-invariant and its overlap with
// seed comes out real and nonnegative. The cluster is the |eigenvalue|-sorted
// prefix cut at the first hundredfold magnitude jump, capped at 1e-6 of the
// operator scale.
Eigen::VectorXcd kernel_cluster_projection(const SparseCd& L,
                                           const Eigen::VectorXcd& seed);

// Orthogonal projection onto span{phi_j (x) phi_j (x) vacuum}; rank d.
OperatorMatrix pi_projection(const liouvillian::LiouvillianBundle& bundle);

// d x d matrix of Pi I (eps/(L0^2+eps^2)) I Pi on the range of pi_projection, in
// the basis phi_j (x) phi_j (x) vacuum.
Eigen::MatrixXcd regularized_lso(const liouvillian::LiouvillianBundle& bundle,
                                 double epsilon);

struct Gamma0Result {
    Eigen::MatrixXcd matrix;        // d x d, same basis as regularized_lso
    double gap{0.0};                // smallest eigenvalue orthogonal to the Gibbs direction
    double explicit_bound{0.0};     // closed-form lower-bound scalar (see gamma0_matrix)
    bool golden_rule_holds{false};  // fgr_value > 0; when false the gap degenerates to 0
};

// Level-shift matrix assembled directly from Bohr frequencies, coupling matrix
// elements, form-factor values at the Bohr frequencies and thermal occupation
// weights; the kernel is the Gibbs direction. Normalized as the eps -> 0 limit of
// regularized_lso. explicit_bound is min over level pairs of
// (E_m-E_n)^2 tr(e^{-beta H_at}) / |e^{-beta E_m} - e^{-beta E_n}| *
// angular_factor |sum_alpha <phi_m, G_alpha phi_n> g_alpha(|E_m-E_n|)|^2.
Gamma0Result gamma0_matrix(const model::ModelSpec& spec);

// A0 = i theta lambda (Pi I Rbar^2 - Rbar^2 I Pi) with
// Rbar^2 = (1-Pi)(L0^2+eps^2)^{-1}(1-Pi); Hermitian by construction.
OperatorMatrix build_A0(const liouvillian::LiouvillianBundle& bundle,
                        const PCParameters& params);

// B = N + lambda I1 + i[L_lambda, A0], the commutator formed explicitly.
OperatorMatrix build_B(const liouvillian::LiouvillianBundle& bundle,
                       const PCParameters& params);

struct VirialReport {
    double b_expectation{0.0};  // <psi, B psi>, evaluated matrix-free
    double n_bound_ratio{0.0};  // ||N^{1/2} psi|| / (c_p_beta |lambda| ||psi||); 0/0 -> 0
};

VirialReport virial_check(const liouvillian::LiouvillianBundle& bundle,
                          const PCParameters& params, const Eigen::VectorXcd& psi);

struct FeshbachResult {
    Eigen::MatrixXcd map;          // proj(M - M(1-proj)((1-proj)M(1-proj)-m)^{-1}(1-proj)M)proj
    Eigen::MatrixXcd range_basis;  // orthonormal columns spanning Ran proj
    double complement_sigma_min{0.0};
};

// Schur-complement compression at spectral parameter m. proj must be an orthogonal
// projection; a complement block singular to 1e-10 raises a numerical error naming
// the offending singular value.
FeshbachResult feshbach_map(const Eigen::MatrixXcd& M, const Eigen::MatrixXcd& proj,
                            double m);

struct PCProbeReport {
    double min_quadratic_form{0.0};
    double gap_prediction{0.0};        // theta lambda^2 gamma0 / (4 eps)
    double gap_prediction_pc{0.0};     // |lambda|^{2-eta} nu^{3-9eta/2} gamma0, eta = e-t
    int subspace_dim{0};
    double kernel_n_expectation{0.0};  // <(N+1)> of the computed kernel vector
};

// Floor of the quadratic form B + delta P_kernel over the orthogonal complement of
// the kernel vector inside the filtered window subspace: eigenvectors of L_lambda
// with |eigenvalue| <= window and <(N+1)> <= nu^2. The window must isolate 0 in the
// atomic Bohr spectrum; an empty filtered subspace is a config error.
PCProbeReport pc_positivity_probe(const liouvillian::LiouvillianBundle& bundle,
                                  const PCParameters& params, double window);

// lambda' = nu^{9/2} lambda; eps = nu^{-3}|lambda'|^e; theta = |lambda'|^t;
// delta = theta lambda^2 gamma0 / eps. Violated constraints raise config errors
// naming the inequality.
PCParameters choose_pc_parameters(double lambda, double nu, double e, double t,
                                  double gamma0);

} // namespace tfld::spectral
