#include "thermofield/model.hpp"

#include <cmath>
#include <limits>

#include "thermofield/errors.hpp"
#include "thermofield/quadrature.hpp"

namespace tfld::model {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool exponent_supported(double p) {
    const double tol = 1e-12;
    return std::abs(p + 0.5) < tol || std::abs(p - 0.5) < tol || std::abs(p - 1.5) < tol ||
           p > 2.0;
}

// x / (1 - e^{-x}) for x >= 0 as a jet. The Bernoulli series below 0.9 avoids the
// 0/0 cancellation that would otherwise contaminate the higher jet components near 0.
Jet3 bose_regularizer(const Jet3& x) {
    if (x.value() < 0.9) {
        constexpr double c[13] = {1.0,
                                  0.5,
                                  1.0 / 12.0,
                                  0.0,
                                  -1.0 / 720.0,
                                  0.0,
                                  1.0 / 30240.0,
                                  0.0,
                                  -1.0 / 1209600.0,
                                  0.0,
                                  1.0 / 47900160.0,
                                  0.0,
                                  -691.0 / 1307674368000.0};
        Jet3 acc{c[12]};
        for (int k = 11; k >= 0; --k) acc = acc * x + Jet3{c[k]};
        return acc;
    }
    return x * reciprocal(-expm1(-x));
}

// Magnitude of tau_beta on the positive branch as a jet in u > 0, in the regular form
//   beta^{-1/2} * u^{p + 1/2} * sqrt(beta*u / (1 - e^{-beta*u})) * gtilde(u),
// whose only u = 0 behavior is the explicit power (analytic factors otherwise).
Jet3 magnitude_plus(const FormFactor& ff, double beta, double u) {
    const Jet3 x = Jet3::variable(u);
    const Jet3 w = sqrt(bose_regularizer(beta * x));
    return (1.0 / std::sqrt(beta)) * pow(x, ff.p + 0.5) * w * ff.profile_jet(u);
}

// Magnitude of tau_beta on the negative branch as a jet in s = -u > 0:
//   beta^{-1/2} * s^{p + 1/2} * sqrt(beta*s / (1 - e^{-beta*s})) * e^{-beta*s/2} * gtilde(s).
// This form never overflows; s / sqrt(e^{beta*s} - 1) does for beta*s > ~1400.
Jet3 magnitude_minus(const FormFactor& ff, double beta, double s) {
    const Jet3 x = Jet3::variable(s);
    const Jet3 w = sqrt(bose_regularizer(beta * x));
    return (1.0 / std::sqrt(beta)) * pow(x, ff.p + 0.5) * w * exp(-0.5 * beta * x) *
           ff.profile_jet(s);
}

complexd phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Upper integration limit beyond which the gaussian profile is negligible at double precision.
double profile_support(const FormFactor& ff) { return 14.0 * ff.cutoff + 1.0; }

double l2_norm_positive_axis(const std::function<double(double)>& density, double hi) {
    const auto body = integrate(density, 0.0, hi, 1e-10, 1e-16);
    const auto tail = integrate_to_infinity(density, hi, 1e-8, 1e-16);
    return std::sqrt(body.value + tail.value);
}

} // namespace

Jet3 FormFactor::profile_jet(double u) const {
    const Jet3 x = Jet3::variable(u);
    const Jet3 linear{1.0 + tilt * u, tilt, 0.0, 0.0};
    const double inv2 = 1.0 / (cutoff * cutoff);
    return amplitude * linear * exp(-inv2 * (x * x));
}

complexd FormFactor::g(double u) const {
    if (!(u > 0.0)) throw std::domain_error("FormFactor::g requires u > 0");
    return phase(phase0) * (std::pow(u, p) * profile_jet(u).value());
}

double glue_phase_rule(double p, double phase0) {
    return std::abs(p + 0.5) < 1e-12 ? 2.0 * phase0 : kPi + 2.0 * phase0;
}

double ModelSpec::glue_phase() const {
    if (glue_phase_override) return *glue_phase_override;
    if (couplings.empty()) return kPi;
    return glue_phase_rule(couplings.front().ff.p, couplings.front().ff.phase0);
}

void validate_spec(const ModelSpec& spec) {
    const int d = spec.atom.dim;
    if (d < 2) throw config_error("atom dimension must be >= 2, got " + std::to_string(d));
    if (static_cast<int>(spec.atom.energies.size()) != d)
        throw config_error("atom energy count " + std::to_string(spec.atom.energies.size()) +
                           " does not match dim " + std::to_string(d));
    for (int j = 0; j + 1 < d; ++j)
        if (!(spec.atom.energies[j] < spec.atom.energies[j + 1]))
            throw config_error("atom energies must be strictly increasing at index " +
                               std::to_string(j));
    if (!(spec.beta > 0.0)) throw config_error("beta must be positive");
    if (!std::isfinite(spec.lambda)) throw config_error("lambda must be finite");
    for (std::size_t a = 0; a < spec.couplings.size(); ++a) {
        const auto& term = spec.couplings[a];
        const std::string tag = "coupling " + std::to_string(a);
        if (term.G.rows() != d || term.G.cols() != d)
            throw config_error(tag + ": matrix must be " + std::to_string(d) + "x" +
                               std::to_string(d));
        if (!term.G.allFinite()) throw config_error(tag + ": matrix has non-finite entries");
        const double scale = std::max(1.0, term.G.cwiseAbs().maxCoeff());
        if ((term.G - term.G.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw config_error(tag + ": matrix is not Hermitian");
        if (!exponent_supported(term.ff.p))
            throw config_error(tag + ": unsupported infrared exponent p = " +
                               std::to_string(term.ff.p));
        if (!(term.ff.cutoff > 0.0)) throw config_error(tag + ": cutoff must be positive");
        if (!std::isfinite(term.ff.amplitude) || !std::isfinite(term.ff.tilt) ||
            !std::isfinite(term.ff.phase0))
            throw config_error(tag + ": non-finite profile parameter");
        if (!(term.ff.angular_factor > 0.0))
            throw config_error(tag + ": angular factor must be positive");
    }
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

complexd tau_beta(const FormFactor& ff, double beta, double phi, double u) {
    if (u == 0.0) throw std::domain_error("tau_beta is undefined at u = 0");
    if (u > 0.0) return phase(ff.phase0) * magnitude_plus(ff, beta, u).value();
    return phase(phi - ff.phase0) * magnitude_minus(ff, beta, -u).value();
}

complexd d_tau_beta(const FormFactor& ff, double beta, double phi, double u, int order) {
    if (u == 0.0) throw std::domain_error("d_tau_beta is undefined at u = 0");
    if (order < 1 || order > 3)
        throw unsupported_error("d_tau_beta supports orders 1..3, got " + std::to_string(order));
    if (u > 0.0) return phase(ff.phase0) * magnitude_plus(ff, beta, u).deriv(order);
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return phase(phi - ff.phase0) * (sign * magnitude_minus(ff, beta, -u).deriv(order));
}

complexd weighted_tau_beta(const FormFactor& ff, double beta, double phi, double u, int order) {
    if (order == 0) return phase(phi) * std::conj(tau_beta(ff, beta, phi, -u));
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return phase(phi) * (sign * std::conj(d_tau_beta(ff, beta, phi, -u, order)));
}

ValidationReport validate_a1(const ModelSpec& spec) {
    ValidationReport report;
    const double phi = spec.glue_phase();
    const double rule_phi =
        spec.couplings.empty()
            ? phi
            : glue_phase_rule(spec.couplings.front().ff.p, spec.couplings.front().ff.phase0);
    {
        CheckResult c;
        c.name = "glue_phase_consistent";
        c.value = std::abs(phase(phi) - phase(rule_phi));
        c.passed = c.value <= 1e-12;
        if (!c.passed) c.note = "glue phase deviates from the exponent rule";
        report.checks.push_back(c);
    }

    for (std::size_t a = 0; a < spec.couplings.size(); ++a) {
        const auto& ff = spec.couplings[a].ff;
        const std::string tag = "coupling" + std::to_string(a) + ".";
        const double hi = profile_support(ff);
        const double ang = ff.angular_factor;
        const bool infrared_class = std::abs(ff.p + 0.5) < 1e-12 || std::abs(ff.p - 0.5) < 1e-12;

        auto add_quadrature_check = [&report](const std::string& name,
                                              const std::function<double()>& eval) {
            CheckResult c;
            c.name = name;
            try {
                c.value = eval();
                c.passed = std::isfinite(c.value);
                if (!c.passed) c.note = "non-finite quadrature";
            } catch (const std::exception& e) {
                c.passed = false;
                c.value = std::numeric_limits<double>::quiet_NaN();
                c.note = e.what();
            }
            report.checks.push_back(c);
        };

        for (int j = 0; j <= 3; ++j) {
            add_quadrature_check(tag + "norm_profile_d" + std::to_string(j), [&, j] {
                auto density = [&, j](double u) {
                    const double v = ff.profile_jet(u).deriv(j);
                    return ang * v * v;
                };
                return l2_norm_positive_axis(density, hi);
            });
        }

        add_quadrature_check(tag + "norm_u2_g", [&] {
            auto density = [&](double u) {
                if (u <= 0.0) return 0.0;
                const double g = std::pow(u, ff.p) * ff.profile_jet(u).value();
                return ang * u * u * (u * u * g) * (u * u * g);
            };
            return l2_norm_positive_axis(density, hi);
        });

        for (int j = 0; j <= 3; ++j) {
            add_quadrature_check(tag + "norm_tau_d" + std::to_string(j), [&, j] {
                auto density = [&, j](double u) {
                    if (u == 0.0) return 0.0;
                    const double plus = magnitude_plus(ff, spec.beta, u).deriv(j);
                    const double minus = magnitude_minus(ff, spec.beta, u).deriv(j);
                    return ang * (plus * plus + minus * minus);
                };
                return l2_norm_positive_axis(density, hi);
            });
        }

        {
            CheckResult c;
            c.name = tag + "profile_flat_at_zero";
            c.value = std::abs(ff.profile_jet(0.0).deriv(1));
            c.passed = !infrared_class || c.value <= 1e-12;
            if (!c.passed) c.note = "d_u gtilde(0) must vanish for p in {-1/2, 1/2}";
            report.checks.push_back(c);
        }

        // One-sided limits of tau and d_u tau across the gluing point. The scale is the
        // plateau value beta^{-1/2} * gtilde(0) so the comparison is dimensionless.
        const double eps = 1e-7;
        const double scale =
            std::max(std::abs(ff.profile_jet(0.0).value()) / std::sqrt(spec.beta), 1e-30);
        {
            CheckResult c;
            c.name = tag + "tau_continuous_at_zero";
            c.value = std::abs(tau_beta(ff, spec.beta, phi, eps) -
                               tau_beta(ff, spec.beta, phi, -eps)) /
                      scale;
            c.passed = c.value <= 1e-5;
            if (!c.passed) c.note = "glued map jumps at u = 0";
            report.checks.push_back(c);
        }
        {
            CheckResult c;
            c.name = tag + "dtau_continuous_at_zero";
            c.value = std::abs(d_tau_beta(ff, spec.beta, phi, eps, 1) -
                               d_tau_beta(ff, spec.beta, phi, -eps, 1)) /
                      scale;
            // The derivative limit involves one cancellation of order eps; widen accordingly.
            c.passed = c.value <= 1e-4 * (1.0 + spec.beta);
            if (!c.passed) c.note = "derivative of the glued map jumps at u = 0";
            report.checks.push_back(c);
        }
    }
    return report;
}

double fgr_value(const ModelSpec& spec) {
    const int d = spec.atom.dim;
    if (d < 2) throw config_error("fgr_value requires at least two levels");
    const double ang =
        spec.couplings.empty() ? 4.0 * kPi : spec.couplings.front().ff.angular_factor;
    double min_weight = std::numeric_limits<double>::infinity();
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (m == n) continue;
            const double bohr = std::abs(spec.atom.energies[m] - spec.atom.energies[n]);
            if (bohr == 0.0) continue;
            complexd amp{0.0, 0.0};
            for (const auto& term : spec.couplings) amp += term.G(m, n) * term.ff.g(bohr);
            min_weight = std::min(min_weight, ang * std::norm(amp));
        }
    }
    if (!std::isfinite(min_weight)) return 0.0;
    return min_weight;
}

double c_p_beta(const ModelSpec& spec) {
    double total = 0.0;
    for (const auto& term : spec.couplings) {
        const auto& ff = term.ff;
        const double hi = profile_support(ff);
        auto density = [&](double u) {
            if (u == 0.0) return 0.0;
            const double plus = magnitude_plus(ff, spec.beta, u).deriv(1);
            const double minus = magnitude_minus(ff, spec.beta, u).deriv(1);
            return ff.angular_factor * (plus * plus + minus * minus);
        };
        const double norm = l2_norm_positive_axis(density, hi);
        if (!std::isfinite(norm))
            throw numerical_error("c_p_beta quadrature did not converge (partial value " +
                                  std::to_string(norm) + ")");
        total += operator_norm(term.G) * norm;
    }
    return 2.0 * total;
}

Eigen::MatrixXd gibbs_density(const AtomSpec& atom, double beta) {
    if (!(beta > 0.0)) throw config_error("gibbs_density requires beta > 0");
    const int d = atom.dim;
    Eigen::VectorXd w(d);
    for (int j = 0; j < d; ++j) w[j] = std::exp(-beta * (atom.energies[j] - atom.energies[0]));
    return (w / w.sum()).asDiagonal();
}

Eigen::VectorXd gibbs_vector(const AtomSpec& atom, double beta) {
    if (!(beta > 0.0)) throw config_error("gibbs_vector requires beta > 0");
    const int d = atom.dim;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d * d);
    for (int j = 0; j < d; ++j)
        v[j * d + j] = std::exp(-0.5 * beta * (atom.energies[j] - atom.energies[0]));
    v.normalize();
    return v;
}

double operator_norm(const Eigen::MatrixXcd& herm) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("operator_norm: eigenvalue computation failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace tfld::model
