// dynamics.hpp: real-time Heisenberg evolution under L_lambda and ergodic
// (Cesaro) averaging; the finite-truncation return-to-equilibrium diagnostic.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "thermofield/kms.hpp"
#include "thermofield/liouvillian.hpp"

namespace tfld::dynamics {

struct Trajectory {
    std::vector<double> times;
    std::vector<double> values; // <psi(t), A psi(t)>
    std::vector<double> cesaro; // running trapezoid averages of values
};

// exp(-i t L_lambda) psi by Krylov action. Norm drift beyond
// 1e-10 + 1e-9 |t| relative aborts with the achieved drift.
kms::StateVector evolve(const liouvillian::LiouvillianBundle& bundle,
                        const kms::StateVector& psi, double t,
                        const kms::KrylovSettings& settings = {});

// a (x) 1 (x) 1 on the glued space; a acts on the left atomic factor.
OperatorMatrix atomic_observable(const liouvillian::LiouvillianBundle& bundle,
                                 const Eigen::MatrixXcd& a);

// Samples <psi(t_k), A psi(t_k)> along one sequential evolution through the
// given times. A must be Hermitian. cesaro_k averages the sampled values over
// [t_0, t_k] by the trapezoid rule (cesaro_0 = values_0).
Trajectory heisenberg_expectation(const liouvillian::LiouvillianBundle& bundle,
                                  const kms::StateVector& omega_state,
                                  const OperatorMatrix& a,
                                  const std::vector<double>& times,
                                  const kms::KrylovSettings& settings = {});

struct RteReport {
    double deviation{0.0};          // |cesaro(T) - <Omega_kernel, A Omega_kernel>|
    std::vector<double> trend;      // deviation sampled at T/4, T/2, T
    double initial_deviation{0.0};  // |values(0) - equilibrium|
    double equilibrium_value{0.0};
    double recurrence_time{0.0};    // 2 pi / (smallest positive mode gap)
    Trajectory trajectory;
};

// Ergodic-average distance from the numerical equilibrium state (the near-kernel
// eigencluster representative of L_lambda). Meaningful only for T below the
// reported grid recurrence time; no decay is asserted here.
RteReport rte_diagnostic(const liouvillian::LiouvillianBundle& bundle,
                         const kms::StateVector& initial, const OperatorMatrix& a,
                         double horizon, const kms::KrylovSettings& settings = {});

} // namespace tfld::dynamics
