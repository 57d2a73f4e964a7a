// spectral.cpp: see spectral.hpp.
#include "thermofield/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "thermofield/errors.hpp"
#include "thermofield/lanczos.hpp"

namespace tfld::spectral {

namespace {

using cd = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Max absolute row sum, the cheap upper bound for the spectral radius.
double row_scale(const SparseCd& h) {
    double scale = 0.0;
    for (int k = 0; k < h.outerSize(); ++k) {
        double row = 0.0;
        for (SparseCd::InnerIterator it(h, k); it; ++it) row += std::abs(it.value());
        scale = std::max(scale, row);
    }
    return scale == 0.0 ? 1.0 : scale;
}

// Flat indices of the kernel basis phi_j (x) phi_j (x) vacuum.
std::vector<Eigen::Index> pi_indices(const liouvillian::LiouvillianBundle& bundle) {
    const int d = bundle.spec.atom.dim;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
        idx[static_cast<std::size_t>(j)] =
            liouvillian::flat_index(d, bundle.basis.dim(), j, j, 0);
    return idx;
}

// Gibbs purification coordinates on the kernel basis (unit vector).
Eigen::VectorXd gibbs_coordinates(const model::ModelSpec& spec) {
    const int d = spec.atom.dim;
    const Eigen::VectorXd purif = model::gibbs_vector(spec.atom, spec.beta);
    Eigen::VectorXd coords(d);
    for (int j = 0; j < d; ++j) coords[j] = purif[j * d + j];
    return coords;
}

Eigen::VectorXcd kernel_seed(const liouvillian::LiouvillianBundle& bundle) {
    const auto dim = static_cast<Eigen::Index>(bundle.L_lambda.dim);
    const Eigen::VectorXd coords = gibbs_coordinates(bundle.spec);
    const auto idx = pi_indices(bundle);
    Eigen::VectorXcd seed = Eigen::VectorXcd::Zero(dim);
    for (std::size_t j = 0; j < idx.size(); ++j)
        seed[idx[j]] = coords[static_cast<Eigen::Index>(j)];
    return seed;
}

} // namespace

EigenResult low_spectrum(const OperatorMatrix& L, int count, double tol,
                         std::size_t dense_threshold) {
    krylov::EigsOptions opts;
    opts.tol = tol;
    opts.dense_threshold = dense_threshold;
    auto pairs = krylov::eigs_near(L.entries, 0.0, count, opts);
    EigenResult result;
    result.eigenvalues = std::move(pairs.values);
    result.vectors = std::move(pairs.vectors);
    result.residuals = std::move(pairs.residuals);
    return result;
}

Eigen::VectorXcd kernel_cluster_projection(const SparseCd& L,
                                           const Eigen::VectorXcd& seed) {
    const Eigen::Index dim = L.rows();
    const int count = static_cast<int>(std::min<Eigen::Index>(48, dim));
    const auto pairs = krylov::eigs_near(L, 0.0, count);
    const double scale = row_scale(L);
    const double floor = 1e-13 * scale;
    const double cap = 1e-6 * scale;

    Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(seed.size());
    for (int k = 0; k < count; ++k) {
        const double magnitude = std::abs(pairs.values[k]);
        if (magnitude > cap) break;
        if (k > 0 &&
            magnitude > 100.0 * std::max(std::abs(pairs.values[k - 1]), floor))
            break;
        proj += pairs.vectors[k] * pairs.vectors[k].dot(seed);
    }
    const double weight = proj.norm();
    if (weight < 1e-12)
        throw numerical_error(
            "near-kernel eigencluster is orthogonal to the seed vector");
    return proj / weight;
}

OperatorMatrix pi_projection(const liouvillian::LiouvillianBundle& bundle) {
    const auto dim = static_cast<Eigen::Index>(bundle.L0.dim);
    std::vector<Eigen::Triplet<cd>> trips;
    for (auto idx : pi_indices(bundle)) trips.emplace_back(idx, idx, 1.0);
    SparseCd m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return make_operator(std::move(m), true);
}

Eigen::MatrixXcd regularized_lso(const liouvillian::LiouvillianBundle& bundle,
                                 double epsilon) {
    if (!(epsilon > 0.0)) throw config_error("regularization epsilon must be positive");
    const auto dim = static_cast<Eigen::Index>(bundle.L0.dim);
    const int d = bundle.spec.atom.dim;
    const auto idx = pi_indices(bundle);

    const Eigen::VectorXcd ell = bundle.L0.entries.diagonal();
    Eigen::VectorXd kernel(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double l = std::real(ell[k]);
        kernel[k] = epsilon / (l * l + epsilon * epsilon);
    }

    Eigen::MatrixXcd columns(dim, d);
    for (int b = 0; b < d; ++b) {
        Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(dim);
        unit[idx[static_cast<std::size_t>(b)]] = 1.0;
        columns.col(b) = bundle.I.entries * unit;
    }

    Eigen::MatrixXcd out(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            out(a, b) = (columns.col(a).conjugate().array() *
                         kernel.array().cast<cd>() * columns.col(b).array())
                            .sum();
    return (out + out.adjoint()) / 2.0;
}

Gamma0Result gamma0_matrix(const model::ModelSpec& spec) {
    model::validate_spec(spec);
    const int d = spec.atom.dim;
    const auto& energies = spec.atom.energies;
    const double beta = spec.beta;

    const auto coupling_sum = [&](int a, int b, double omega) {
        cd sum = 0.0;
        for (const auto& term : spec.couplings)
            sum += std::sqrt(term.ff.angular_factor) * term.G(a, b) * term.ff.g(omega);
        return sum;
    };

    Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        for (int m = 0; m < d; ++m) {
            if (m == k) continue;
            const double gap = energies[static_cast<std::size_t>(m)] -
                               energies[static_cast<std::size_t>(k)];
            const double omega = std::abs(gap);
            if (omega < 1e-12) continue;
            const double weight = std::norm(coupling_sum(k, m, omega));
            const double occupancy = gap < 0.0
                                         ? 1.0 / (1.0 - std::exp(-beta * omega))
                                         : 1.0 / std::expm1(beta * omega);
            gamma(k, k) += kPi * omega * omega * occupancy * weight;
        }
    }
    for (int k = 0; k < d; ++k) {
        for (int j = 0; j < d; ++j) {
            if (j == k) continue;
            const double omega = std::abs(energies[static_cast<std::size_t>(j)] -
                                          energies[static_cast<std::size_t>(k)]);
            if (omega < 1e-12) continue;
            const double weight = std::norm(coupling_sum(k, j, omega));
            gamma(k, j) -= kPi * omega * omega * weight /
                           (2.0 * std::sinh(beta * omega / 2.0));
        }
    }
    gamma = ((gamma + gamma.adjoint()) / 2.0).eval();

    Gamma0Result result;
    result.matrix = gamma;
    result.golden_rule_holds = model::fgr_value(spec) > 0.0;

    const Eigen::VectorXd gibbs = gibbs_coordinates(spec);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gibbs);
    const Eigen::MatrixXd complement =
        Eigen::MatrixXd(qr.householderQ()).rightCols(d - 1);
    const Eigen::MatrixXcd reduced =
        complement.cast<cd>().adjoint() * gamma * complement.cast<cd>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(reduced);
    result.gap = solver.eigenvalues().minCoeff();

    const double ground = *std::min_element(energies.begin(), energies.end());
    double trace_shifted = 0.0;
    for (double e : energies) trace_shifted += std::exp(-beta * (e - ground));
    double bound = std::numeric_limits<double>::infinity();
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (n == m) continue;
            const double em = energies[static_cast<std::size_t>(m)];
            const double en = energies[static_cast<std::size_t>(n)];
            const double omega = std::abs(em - en);
            if (omega < 1e-12) continue;
            const double denom = std::abs(std::exp(-beta * (em - ground)) -
                                          std::exp(-beta * (en - ground)));
            const double weight = std::norm(coupling_sum(m, n, omega));
            bound = std::min(bound, omega * omega * trace_shifted / denom * weight);
        }
    }
    result.explicit_bound = std::isfinite(bound) ? bound : 0.0;
    return result;
}

OperatorMatrix build_A0(const liouvillian::LiouvillianBundle& bundle,
                        const PCParameters& params) {
    if (!(params.epsilon > 0.0)) throw config_error("A0 requires epsilon > 0");
    const auto dim = static_cast<Eigen::Index>(bundle.L0.dim);
    std::vector<char> in_pi(static_cast<std::size_t>(dim), 0);
    for (auto idx : pi_indices(bundle)) in_pi[static_cast<std::size_t>(idx)] = 1;

    const Eigen::VectorXcd ell = bundle.L0.entries.diagonal();
    Eigen::VectorXd rbar2(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double l = std::real(ell[k]);
        rbar2[k] = in_pi[static_cast<std::size_t>(k)]
                       ? 0.0
                       : 1.0 / (l * l + params.epsilon * params.epsilon);
    }

    const cd factor = cd(0.0, 1.0) * params.theta * bundle.spec.lambda;
    std::vector<Eigen::Triplet<cd>> trips;
    const SparseCd& inter = bundle.I.entries;
    for (int outer = 0; outer < inter.outerSize(); ++outer) {
        for (SparseCd::InnerIterator it(inter, outer); it; ++it) {
            const auto i = it.row();
            const auto j = it.col();
            cd value = 0.0;
            if (in_pi[static_cast<std::size_t>(i)]) value += factor * it.value() * rbar2[j];
            if (in_pi[static_cast<std::size_t>(j)]) value -= factor * rbar2[i] * it.value();
            if (value != cd(0.0)) trips.emplace_back(i, j, value);
        }
    }
    SparseCd a0(dim, dim);
    a0.setFromTriplets(trips.begin(), trips.end());
    return make_operator(std::move(a0), true);
}

OperatorMatrix build_B(const liouvillian::LiouvillianBundle& bundle,
                       const PCParameters& params) {
    const auto a0 = build_A0(bundle, params);
    const SparseCd& l_lambda = bundle.L_lambda.entries;
    const SparseCd commutator =
        SparseCd(l_lambda * a0.entries - a0.entries * l_lambda).pruned();
    SparseCd b = bundle.N.entries;
    b += cd(bundle.spec.lambda, 0.0) * bundle.I1.entries;
    b += cd(0.0, 1.0) * commutator;
    return make_operator(std::move(b), true);
}

VirialReport virial_check(const liouvillian::LiouvillianBundle& bundle,
                          const PCParameters& params, const Eigen::VectorXcd& psi) {
    const double norm = psi.norm();
    if (norm == 0.0) throw config_error("virial_check requires a nonzero state");

    const Eigen::VectorXcd n_psi = bundle.N.entries * psi;
    const double n_expect = std::real(psi.dot(n_psi));
    const Eigen::VectorXcd i1_psi = bundle.I1.entries * psi;
    const auto a0 = build_A0(bundle, params);
    const Eigen::VectorXcd l_psi = bundle.L_lambda.entries * psi;
    const Eigen::VectorXcd a_psi = a0.entries * psi;

    VirialReport report;
    report.b_expectation = n_expect + bundle.spec.lambda * std::real(psi.dot(i1_psi)) -
                           2.0 * std::imag(l_psi.dot(a_psi));
    const double n_half = std::sqrt(std::max(0.0, n_expect));
    const double denom =
        model::c_p_beta(bundle.spec) * std::abs(bundle.spec.lambda) * norm;
    if (denom > 0.0)
        report.n_bound_ratio = n_half / denom;
    else
        report.n_bound_ratio =
            n_half < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
    return report;
}

FeshbachResult feshbach_map(const Eigen::MatrixXcd& M, const Eigen::MatrixXcd& proj,
                            double m) {
    const Eigen::Index n = M.rows();
    if (M.cols() != n || proj.rows() != n || proj.cols() != n)
        throw config_error("feshbach_map requires square matrices of equal dimension");
    if ((proj - proj.adjoint()).norm() > 1e-10 * std::max(1.0, proj.norm()) ||
        (proj * proj - proj).norm() > 1e-10 * std::max(1.0, proj.norm()))
        throw config_error("feshbach_map requires an orthogonal projection");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> split(proj);
    std::vector<Eigen::Index> range_cols;
    std::vector<Eigen::Index> complement_cols;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (split.eigenvalues()[k] > 0.5)
            range_cols.push_back(k);
        else
            complement_cols.push_back(k);
    }
    if (range_cols.empty()) throw config_error("feshbach_map requires a nonzero projection");

    Eigen::MatrixXcd range(n, static_cast<Eigen::Index>(range_cols.size()));
    for (std::size_t k = 0; k < range_cols.size(); ++k)
        range.col(static_cast<Eigen::Index>(k)) = split.eigenvectors().col(range_cols[k]);

    FeshbachResult result;
    result.range_basis = range;
    if (complement_cols.empty()) {
        result.map = M;
        result.complement_sigma_min = std::numeric_limits<double>::infinity();
        return result;
    }

    Eigen::MatrixXcd complement(n, static_cast<Eigen::Index>(complement_cols.size()));
    for (std::size_t k = 0; k < complement_cols.size(); ++k)
        complement.col(static_cast<Eigen::Index>(k)) =
            split.eigenvectors().col(complement_cols[k]);

    const Eigen::MatrixXcd block =
        complement.adjoint() * M * complement -
        m * Eigen::MatrixXcd::Identity(complement.cols(), complement.cols());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
    result.complement_sigma_min = svd.singularValues().minCoeff();
    if (result.complement_sigma_min <= 1e-10)
        throw numerical_error(
            "Feshbach complement block is singular at m = " + format_double(m) +
            " (smallest singular value " +
            format_double(result.complement_sigma_min) + ")");

    const Eigen::MatrixXcd cross = complement.adjoint() * M * range;
    const Eigen::MatrixXcd solved = block.colPivHouseholderQr().solve(cross);
    const Eigen::MatrixXcd compressed =
        range.adjoint() * M * range - cross.adjoint() * solved;
    result.map = range * compressed * range.adjoint();
    return result;
}

PCProbeReport pc_positivity_probe(const liouvillian::LiouvillianBundle& bundle,
                                  const PCParameters& params, double window) {
    if (!(window > 0.0)) throw config_error("probe window must be positive");
    const auto& energies = bundle.spec.atom.energies;
    for (std::size_t i = 0; i < energies.size(); ++i)
        for (std::size_t j = 0; j < energies.size(); ++j) {
            const double diff = std::abs(energies[i] - energies[j]);
            if (diff > 1e-12 && diff <= window)
                throw config_error("probe window " + format_double(window) +
                                   " reaches the atomic Bohr frequency " +
                                   format_double(diff));
        }

    const auto dim = static_cast<Eigen::Index>(bundle.L_lambda.dim);
    int count = static_cast<int>(std::min<Eigen::Index>(32, dim));
    krylov::EigenPairs pairs = krylov::eigs_near(bundle.L_lambda.entries, 0.0, count);
    while (std::abs(pairs.values.back()) <= window && count < dim) {
        count = static_cast<int>(std::min<Eigen::Index>(2 * count, dim));
        pairs = krylov::eigs_near(bundle.L_lambda.entries, 0.0, count);
    }

    const Eigen::VectorXcd kernel =
        kernel_cluster_projection(bundle.L_lambda.entries, kernel_seed(bundle));

    PCProbeReport report;
    report.kernel_n_expectation =
        std::real(kernel.dot(Eigen::VectorXcd(bundle.N.entries * kernel))) + 1.0;

    std::vector<Eigen::VectorXcd> basis;
    for (std::size_t k = 0; k < pairs.values.size(); ++k) {
        if (std::abs(pairs.values[k]) > window) break;
        const Eigen::VectorXcd& candidate = pairs.vectors[k];
        const double n_plus_one =
            std::real(candidate.dot(Eigen::VectorXcd(bundle.N.entries * candidate))) +
            1.0;
        if (n_plus_one > params.nu * params.nu) continue;
        Eigen::VectorXcd reduced = candidate - kernel * kernel.dot(candidate);
        for (const auto& q : basis) reduced -= q * q.dot(reduced);
        const double nrm = reduced.norm();
        if (nrm < 1e-8) continue;
        basis.push_back(reduced / nrm);
    }
    if (basis.empty())
        throw config_error(
            "empty probe subspace: no window eigenvector passes the (N+1) filter "
            "away from the kernel vector (window " +
            format_double(window) + ", nu " + format_double(params.nu) + ")");

    const auto b_op = build_B(bundle, params);
    const auto r = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd form(r, r);
    for (Eigen::Index col = 0; col < r; ++col) {
        const Eigen::VectorXcd image =
            b_op.entries * basis[static_cast<std::size_t>(col)] +
            params.delta * kernel *
                kernel.dot(basis[static_cast<std::size_t>(col)]);
        for (Eigen::Index row = 0; row < r; ++row)
            form(row, col) = basis[static_cast<std::size_t>(row)].dot(image);
    }
    form = ((form + form.adjoint()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(form);
    report.min_quadratic_form = solver.eigenvalues().minCoeff();
    report.subspace_dim = static_cast<int>(r);

    const double lambda = bundle.spec.lambda;
    const double gamma0 = gamma0_matrix(bundle.spec).gap;
    const double eta = params.e - params.t;
    report.gap_prediction = params.theta * lambda * lambda * gamma0 / (4.0 * params.epsilon);
    report.gap_prediction_pc = std::pow(std::abs(lambda), 2.0 - eta) *
                               std::pow(params.nu, 3.0 - 4.5 * eta) * gamma0;
    return report;
}

PCParameters choose_pc_parameters(double lambda, double nu, double e, double t,
                                  double gamma0) {
    if (!(nu >= 1.0))
        throw config_error("constraint nu >= 1 violated (nu = " + format_double(nu) + ")");
    if (!(t > 0.0 && t < e && e < 1.0))
        throw config_error("exponent constraint 0 < t < e < 1 violated (e = " +
                           format_double(e) + ", t = " + format_double(t) + ")");
    if (!(t > 3.0 * e - 2.0))
        throw config_error("exponent constraint t > 3e - 2 violated (e = " +
                           format_double(e) + ", t = " + format_double(t) + ")");
    if (lambda == 0.0)
        throw config_error("parameter choice requires a nonzero coupling lambda");
    if (!(gamma0 >= 0.0))
        throw config_error("constraint gamma0 >= 0 violated (gamma0 = " +
                           format_double(gamma0) + ")");

    PCParameters params;
    params.nu = nu;
    params.e = e;
    params.t = t;
    const double lambda_prime = std::pow(nu, 4.5) * lambda;
    params.epsilon = std::pow(std::abs(lambda_prime), e) / (nu * nu * nu);
    params.theta = std::pow(std::abs(lambda_prime), t);
    params.delta = params.theta * lambda * lambda * gamma0 / params.epsilon;
    params.m = 0.0;
    return params;
}

} // namespace tfld::spectral
