// lanczos.hpp: Krylov actions for Hermitian sparse operators; exp(scale*H)v with
// substepping and a rounding-amplification guard, and eigenpairs nearest a target
// via dense solve or shift-invert Lanczos with deflation.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermofield/operator.hpp"

namespace tfld::krylov {

struct ExpmOptions {
    double tol{1e-10};
    int max_subspace{200};
    int max_substeps{64};
    // Ceiling on the estimated relative rounding error of the output. Decaying
    // exponentials amplify machine noise along the most negative explored
    // eigendirections by e^{|Re scale| (nu - lambda_min)}; beyond the ceiling the
    // output carries no certified digits and the call throws instead of returning.
    double stability_limit{1e-6};
};

struct ExpmReport {
    int substeps{1};
    int max_subspace_used{0};
    double residual_estimate{0.0};
    double rounding_error_estimate{0.0};
};

// exp(scale * h) v. Thermal decay: scale = -beta/2; unitary motion: scale = -i t.
Eigen::VectorXcd expm_multiply(const SparseCd& h, std::complex<double> scale,
                               const Eigen::VectorXcd& v, const ExpmOptions& opts = {},
                               ExpmReport* report = nullptr);

struct EigenPairs {
    std::vector<double> values;               // sorted by |value - target|
    std::vector<Eigen::VectorXcd> vectors;    // unit norm
    std::vector<double> residuals;            // ||h v - value v||
    std::string trace;                        // iteration log
};

struct EigsOptions {
    double tol{1e-9};
    int max_subspace{400};
    int max_rounds{8};
    std::size_t dense_threshold{2000};
    unsigned seed{20250814};
};

EigenPairs eigs_near(const SparseCd& h, double target, int count,
                     const EigsOptions& opts = {});

} // namespace tfld::krylov
