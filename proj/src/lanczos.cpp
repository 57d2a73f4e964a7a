#include "thermofield/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "thermofield/errors.hpp"

namespace tfld::krylov {

namespace {

constexpr double kMachineEps = 2.220446049250313e-16;

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

// exp(scale * T) e_1 for a real symmetric tridiagonal T given by its diagonals.
Eigen::VectorXcd tridiagonal_exp_e1(const std::vector<double>& alpha,
                                    const std::vector<double>& beta,
                                    std::complex<double> scale, double* lambda_min) {
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        t(j, j) = alpha[j];
        if (j + 1 < m) {
            t(j, j + 1) = beta[j + 1];
            t(j + 1, j) = beta[j + 1];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    if (lambda_min) *lambda_min = solver.eigenvalues().minCoeff();
    const Eigen::VectorXd first_row = solver.eigenvectors().row(0);
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k)
        y += std::exp(scale * solver.eigenvalues()[k]) * first_row[k] *
             solver.eigenvectors().col(k).cast<std::complex<double>>();
    return y;
}

struct StepResult {
    Eigen::VectorXcd vector;
    bool converged{false};
    int subspace_used{0};
    double residual{0.0};
    double lambda_min{0.0};
};

// One Lanczos approximation of exp(scale * h) v with full reorthogonalization.
StepResult expm_lanczos_step(const SparseCd& h, std::complex<double> scale,
                             const Eigen::VectorXcd& v, double rel_tol,
                             int max_subspace) {
    StepResult result;
    const double v_norm = v.norm();
    if (v_norm == 0.0) {
        result.vector = v;
        result.converged = true;
        return result;
    }

    const int m_cap = static_cast<int>(std::min<Eigen::Index>(max_subspace, v.size()));
    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(m_cap);
    basis.push_back(v / v_norm);
    std::vector<double> alpha, beta; // beta[0] unused
    beta.push_back(0.0);

    Eigen::VectorXcd y;
    double scale_seen = 0.0;
    for (int j = 0; j < m_cap; ++j) {
        Eigen::VectorXcd w = h * basis[j];
        if (j > 0) w -= beta[j] * basis[j - 1];
        const double a = std::real(basis[j].dot(w));
        alpha.push_back(a);
        w -= a * basis[j];
        for (const auto& q : basis) w -= q.dot(w) * q; // second orthogonalization pass
        const double b = w.norm();
        scale_seen = std::max({scale_seen, std::abs(a), b});

        double lambda_min = 0.0;
        y = tridiagonal_exp_e1(alpha, beta, scale, &lambda_min);
        result.lambda_min = lambda_min;
        result.subspace_used = j + 1;
        const double y_norm = y.norm();
        const bool breakdown = b <= 1e-14 * std::max(scale_seen, 1.0);
        result.residual = breakdown ? 0.0 : b * std::abs(y[j]) / std::max(y_norm, 1e-300);
        if (breakdown || result.residual <= rel_tol) {
            result.converged = true;
            break;
        }
        if (j + 1 < m_cap) {
            beta.push_back(b);
            basis.push_back(w / b);
        }
    }

    result.vector = Eigen::VectorXcd::Zero(v.size());
    for (int j = 0; j < result.subspace_used; ++j)
        result.vector += (v_norm * y[j]) * basis[j];
    return result;
}

} // namespace

Eigen::VectorXcd expm_multiply(const SparseCd& h, std::complex<double> scale,
                               const Eigen::VectorXcd& v, const ExpmOptions& opts,
                               ExpmReport* report) {
    const double input_norm = v.norm();
    if (input_norm == 0.0 || scale == 0.0) {
        if (report) *report = ExpmReport{};
        return v;
    }

    double last_residual = 0.0;
    for (int substeps = 1; substeps <= opts.max_substeps; substeps *= 2) {
        const std::complex<double> step_scale = scale / static_cast<double>(substeps);
        const double step_tol = std::max(opts.tol / substeps, 5e-14);
        Eigen::VectorXcd current = v;
        double lambda_min = 0.0;
        int used = 0;
        bool ok = true;
        for (int s = 0; s < substeps; ++s) {
            const auto step =
                expm_lanczos_step(h, step_scale, current, step_tol, opts.max_subspace);
            last_residual = step.residual;
            if (!step.converged) {
                ok = false;
                break;
            }
            lambda_min = (s == 0) ? step.lambda_min : std::min(lambda_min, step.lambda_min);
            used = std::max(used, step.subspace_used);
            current = std::move(step.vector);
        }
        if (!ok) continue;

        // Decaying exponentials amplify rounding noise along the most negative
        // explored eigendirection relative to the surviving component.
        const double theta = std::max(0.0, -std::real(scale));
        double rounding = kMachineEps;
        if (theta > 0.0 && current.norm() > 0.0) {
            const double log_amp =
                theta * (-lambda_min) - std::log(current.norm() / input_norm);
            rounding = kMachineEps * std::exp(std::min(log_amp, 700.0));
        }
        if (rounding > opts.stability_limit)
            throw numerical_error(
                "thermal exponential amplifies rounding noise to an estimated relative "
                "error " +
                format_double(rounding) + ", above the stability limit " +
                format_double(opts.stability_limit));

        if (report) {
            report->substeps = substeps;
            report->max_subspace_used = used;
            report->residual_estimate = last_residual;
            report->rounding_error_estimate = rounding;
        }
        return current;
    }
    throw numerical_error("Krylov exponential did not reach tolerance " +
                          format_double(opts.tol) + "; achieved residual " +
                          format_double(last_residual) + " at max subspace " +
                          std::to_string(opts.max_subspace));
}

namespace {

void sort_by_distance(EigenPairs& pairs, double target) {
    std::vector<std::size_t> order(pairs.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(pairs.values[a] - target) < std::abs(pairs.values[b] - target);
    });
    const bool with_residuals = pairs.residuals.size() == pairs.values.size();
    EigenPairs sorted;
    sorted.trace = pairs.trace;
    for (auto i : order) {
        sorted.values.push_back(pairs.values[i]);
        sorted.vectors.push_back(std::move(pairs.vectors[i]));
        if (with_residuals) sorted.residuals.push_back(pairs.residuals[i]);
    }
    pairs = std::move(sorted);
}

EigenPairs dense_eigs_near(const SparseCd& h, double target, int count) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver((Eigen::MatrixXcd(h)));
    EigenPairs pairs;
    pairs.trace = "dense path, dim " + std::to_string(h.rows());
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        pairs.values.push_back(solver.eigenvalues()[k]);
        pairs.vectors.push_back(solver.eigenvectors().col(k));
    }
    sort_by_distance(pairs, target);
    pairs.values.resize(count);
    pairs.vectors.resize(count);
    for (int k = 0; k < count; ++k)
        pairs.residuals.push_back(
            (h * pairs.vectors[k] - pairs.values[k] * pairs.vectors[k]).norm());
    return pairs;
}

} // namespace

EigenPairs eigs_near(const SparseCd& h, double target, int count,
                     const EigsOptions& opts) {
    const auto dim = h.rows();
    if (count <= 0) throw std::invalid_argument("eigenpair count must be positive");
    if (static_cast<Eigen::Index>(count) > dim)
        throw std::invalid_argument("eigenpair count exceeds dimension");
    if (static_cast<std::size_t>(dim) <= opts.dense_threshold)
        return dense_eigs_near(h, target, count);

    // Operator scale from the infinity norm, for the shift offset.
    double scale_est = 0.0;
    for (int k = 0; k < h.outerSize(); ++k) {
        double row = 0.0;
        for (SparseCd::InnerIterator it(h, k); it; ++it) row += std::abs(it.value());
        scale_est = std::max(scale_est, row);
    }
    if (scale_est == 0.0) scale_est = 1.0;

    using ColMajor = Eigen::SparseMatrix<std::complex<double>>;
    Eigen::SparseLU<ColMajor> lu;
    double sigma = target + 3.7e-3 * scale_est;
    std::string trace = "shift-invert path, dim " + std::to_string(dim);
    bool factored = false;
    ColMajor identity(dim, dim);
    identity.setIdentity();
    for (int attempt = 0; attempt < 5 && !factored; ++attempt) {
        ColMajor shifted = ColMajor(h) - ColMajor(sigma * identity);
        shifted.makeCompressed();
        lu.compute(shifted);
        if (lu.info() == Eigen::Success) {
            factored = true;
        } else {
            trace += "; factorization failed at sigma " + format_double(sigma);
            sigma = target + (sigma - target) * 1.7;
        }
    }
    if (!factored)
        throw numerical_error("shift-invert factorization failed repeatedly; " + trace);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    EigenPairs found;
    found.trace = trace;

    for (int round = 0; round < opts.max_rounds; ++round) {
        if (static_cast<int>(found.values.size()) >= count) break;

        Eigen::VectorXcd start(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            start[i] = std::complex<double>(gauss(rng), gauss(rng));
        for (const auto& u : found.vectors) start -= u.dot(start) * u;
        if (start.norm() < 1e-10) continue;
        start /= start.norm();

        const int m_cap =
            static_cast<int>(std::min<Eigen::Index>(opts.max_subspace, dim));
        std::vector<Eigen::VectorXcd> basis{start};
        std::vector<double> alpha, beta;
        beta.push_back(0.0);
        int m = 0;
        for (int j = 0; j < m_cap; ++j) {
            Eigen::VectorXcd w = lu.solve(basis[j]);
            if (j > 0) w -= beta[j] * basis[j - 1];
            const double a = std::real(basis[j].dot(w));
            alpha.push_back(a);
            w -= a * basis[j];
            for (const auto& q : basis) w -= q.dot(w) * q;
            for (const auto& q : found.vectors) w -= q.dot(w) * q;
            const double b = w.norm();
            m = j + 1;
            if (b <= 1e-13) break;
            if (j + 1 < m_cap) {
                beta.push_back(b);
                basis.push_back(w / b);
            }
        }

        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            t(j, j) = alpha[j];
            if (j + 1 < m) {
                t(j, j + 1) = beta[j + 1];
                t(j + 1, j) = beta[j + 1];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);

        int accepted = 0;
        for (int k = 0; k < m; ++k) {
            const double theta = small.eigenvalues()[k];
            if (std::abs(theta) < 1e-12) continue;
            Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
            for (int j = 0; j < m; ++j) x += small.eigenvectors()(j, k) * basis[j];
            for (const auto& u : found.vectors) x -= u.dot(x) * u;
            const double x_norm = x.norm();
            if (x_norm < 0.1) continue; // already captured direction
            x /= x_norm;
            const double value = sigma + 1.0 / theta;
            const double residual = (h * x - value * x).norm();
            if (residual <= opts.tol) {
                found.values.push_back(value);
                found.vectors.push_back(std::move(x));
                found.residuals.push_back(residual);
                ++accepted;
            }
        }
        found.trace += "; round " + std::to_string(round) + ": m=" + std::to_string(m) +
                       ", accepted " + std::to_string(accepted) + ", total " +
                       std::to_string(found.values.size());
    }

    if (static_cast<int>(found.values.size()) < count)
        throw numerical_error("shift-invert Lanczos found only " +
                              std::to_string(found.values.size()) + " of " +
                              std::to_string(count) + " eigenpairs at tolerance " +
                              format_double(opts.tol) + "; " + found.trace);
    sort_by_distance(found, target);
    found.values.resize(count);
    found.vectors.resize(count);
    found.residuals.resize(count);
    return found;
}

} // namespace tfld::krylov
