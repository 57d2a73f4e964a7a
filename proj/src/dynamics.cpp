#include "thermofield/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "thermofield/errors.hpp"
#include "thermofield/lanczos.hpp"
#include "thermofield/spectral.hpp"

namespace tfld::dynamics {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value);
    return buffer;
}

double real_expectation(const OperatorMatrix& a, const Eigen::VectorXcd& psi) {
    return psi.dot(Eigen::VectorXcd(a.entries * psi)).real();
}

void append_cesaro(Trajectory& trajectory) {
    trajectory.cesaro.resize(trajectory.times.size());
    if (trajectory.times.empty()) return;
    trajectory.cesaro[0] = trajectory.values[0];
    double integral = 0.0;
    for (std::size_t k = 1; k < trajectory.times.size(); ++k) {
        const double dt = trajectory.times[k] - trajectory.times[k - 1];
        integral += 0.5 * dt * (trajectory.values[k] + trajectory.values[k - 1]);
        const double span = trajectory.times[k] - trajectory.times[0];
        trajectory.cesaro[k] = span > 0.0 ? integral / span : trajectory.values[k];
    }
}

double value_at(const Trajectory& trajectory, const std::vector<double>& samples,
                double t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < trajectory.times.size(); ++k)
        if (std::abs(trajectory.times[k] - t) < std::abs(trajectory.times[best] - t))
            best = k;
    return samples[best];
}

} // namespace

kms::StateVector evolve(const liouvillian::LiouvillianBundle& bundle,
                        const kms::StateVector& psi, double t,
                        const kms::KrylovSettings& settings) {
    kms::check_state(psi);
    if (t == 0.0) return psi;

    krylov::ExpmOptions options;
    options.tol = settings.tol;
    options.max_subspace = settings.max_subspace;
    options.stability_limit = settings.stability_limit;
    const Eigen::VectorXcd moved = krylov::expm_multiply(
        bundle.L_lambda.entries, std::complex<double>(0.0, -t), psi.coeffs, options);

    const double drift = std::abs(moved.norm() - psi.norm) / psi.norm;
    if (drift > 1e-10 + 1e-9 * std::abs(t))
        throw numerical_error("unitary step lost the norm: relative drift " +
                              format_double(drift) + " over t = " + format_double(t));
    return kms::make_state(moved);
}

OperatorMatrix atomic_observable(const liouvillian::LiouvillianBundle& bundle,
                                 const Eigen::MatrixXcd& a) {
    const int d = bundle.spec.atom.dim;
    if (a.rows() != d || a.cols() != d)
        throw config_error("atomic observable must be " + std::to_string(d) + "x" +
                           std::to_string(d) + ", got " + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()));
    const Eigen::MatrixXcd unit = Eigen::MatrixXcd::Identity(d, d);
    const std::size_t fock_dim = bundle.basis.dim();
    SparseCd fock_unit(static_cast<Eigen::Index>(fock_dim),
                       static_cast<Eigen::Index>(fock_dim));
    fock_unit.setIdentity();
    return make_operator(liouvillian::kron3(a, unit, fock_unit),
                         a.isApprox(a.adjoint(), 1e-14));
}

Trajectory heisenberg_expectation(const liouvillian::LiouvillianBundle& bundle,
                                  const kms::StateVector& omega_state,
                                  const OperatorMatrix& a,
                                  const std::vector<double>& times,
                                  const kms::KrylovSettings& settings) {
    if (!a.hermitian_flag)
        throw config_error("heisenberg_expectation requires a Hermitian observable");
    if (times.empty()) throw config_error("empty time sequence");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (times[k] < times[k - 1])
            throw config_error("time sequence must be nondecreasing");

    Trajectory trajectory;
    trajectory.times = times;
    trajectory.values.reserve(times.size());

    kms::StateVector state = evolve(bundle, omega_state, times[0], settings);
    trajectory.values.push_back(real_expectation(a, state.coeffs));
    for (std::size_t k = 1; k < times.size(); ++k) {
        state = evolve(bundle, state, times[k] - times[k - 1], settings);
        trajectory.values.push_back(real_expectation(a, state.coeffs));
    }
    append_cesaro(trajectory);
    return trajectory;
}

RteReport rte_diagnostic(const liouvillian::LiouvillianBundle& bundle,
                         const kms::StateVector& initial, const OperatorMatrix& a,
                         double horizon, const kms::KrylovSettings& settings) {
    if (horizon <= 0.0) throw config_error("evolution horizon must be positive");

    RteReport report;
    double smallest_gap = 0.0;
    std::vector<double> positive;
    for (double mode : bundle.grid.modes)
        if (mode > 0.0) positive.push_back(mode);
    std::sort(positive.begin(), positive.end());
    if (positive.size() > 1) {
        smallest_gap = positive[1] - positive[0];
        for (std::size_t k = 2; k < positive.size(); ++k)
            smallest_gap = std::min(smallest_gap, positive[k] - positive[k - 1]);
    } else if (positive.size() == 1) {
        smallest_gap = 2.0 * positive[0];
    }
    report.recurrence_time =
        smallest_gap > 0.0 ? 2.0 * kPi / smallest_gap
                           : std::numeric_limits<double>::infinity();

    const Eigen::VectorXcd seed =
        kms::reference_vector(bundle.spec, bundle.basis).coeffs;
    const Eigen::VectorXcd equilibrium =
        spectral::kernel_cluster_projection(bundle.L_lambda.entries, seed);
    report.equilibrium_value =
        equilibrium.dot(Eigen::VectorXcd(a.entries * equilibrium)).real();

    const double dt = 0.125;
    const int steps = std::max(8, static_cast<int>(std::ceil(horizon / dt)));
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) times[static_cast<std::size_t>(k)] =
        horizon * static_cast<double>(k) / static_cast<double>(steps);

    report.trajectory = heisenberg_expectation(bundle, initial, a, times, settings);
    const auto deviation_at = [&](double t) {
        return std::abs(value_at(report.trajectory, report.trajectory.cesaro, t) -
                        report.equilibrium_value);
    };
    report.trend = {deviation_at(horizon / 4.0), deviation_at(horizon / 2.0),
                    deviation_at(horizon)};
    report.deviation = report.trend.back();
    report.initial_deviation =
        std::abs(report.trajectory.values.front() - report.equilibrium_value);
    return report;
}

} // namespace tfld::dynamics
