// dyson.cpp: finite-volume shell tables, imaginary-time propagators, Wick pairing sums,
// segment-graph bounds, the Gamma row-sum constant with its frozen-envelope fit, the
// excited-weight series bound and dense-trace oracle, and the trace-inequality suite.

#include "thermofield/dyson.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include "thermofield/errors.hpp"
#include "thermofield/quadrature.hpp"

namespace tfld::dyson {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kShellTailTolerance = 1e-8;
constexpr long long kLatticeEnumerationBudget = 40'000'000;
constexpr int kPairingBudget = 12;
constexpr double kDenseOracleBudget = 4000.0;

// Frozen reference for the Gamma envelope fit: beta large enough that the thermal
// enhancement is flat and enough segments that an interior row sees both neighbors.
constexpr double kGammaReferenceBeta = 64.0;
constexpr int kGammaReferenceTwoM = 4;
constexpr double kGammaFitSafety = 1.5;

double bose_weight(double beta, double energy) {
    return 1.0 / (-std::expm1(-beta * energy));
}

// x / (1 - e^{-x}), smooth through x = 0.
double bose_regular(double x) {
    if (std::abs(x) < 1e-3) return 1.0 + x * (0.5 + x / 12.0) - x * x * x * x / 720.0;
    return x / (-std::expm1(-x));
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Deterministic pairwise tree reduction.
double tree_sum(const std::vector<double>& terms, std::size_t lo, std::size_t hi) {
    if (hi == lo) return 0.0;
    if (hi - lo == 1) return terms[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return tree_sum(terms, lo, mid) + tree_sum(terms, mid, hi);
}

double tree_sum(const std::vector<double>& terms) { return tree_sum(terms, 0, terms.size()); }

void check_alpha(const FiniteVolumeModel& fv, int alpha) {
    const int n_alpha =
        fv.shells.empty() ? 0 : static_cast<int>(fv.shells.front().g.size());
    if (alpha < 0 || alpha >= n_alpha)
        throw config_error("coupling index " + std::to_string(alpha) + " out of range [0, " +
                           std::to_string(n_alpha) + ")");
}

void check_times(const std::vector<double>& times, double beta) {
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (!(times[j] >= 0.0) || !(times[j] <= beta))
            throw config_error("insertion time " + format_double(times[j]) +
                               " outside [0, beta]");
        if (j > 0 && times[j] < times[j - 1])
            throw config_error("insertion times must be nondecreasing");
    }
}

double min_exponent(const model::ModelSpec& spec) {
    double p = std::numeric_limits<double>::infinity();
    for (const auto& term : spec.couplings) p = std::min(p, term.ff.p);
    return p;
}

double envelope_shape(double beta, int two_m, double p) {
    return 1.0 + 1.0 / beta + std::pow(beta / two_m, -2.0 - 2.0 * p) / (p + 1.0);
}

double bound_row_max(int two_m, const std::function<double(int, int)>& bound) {
    double best = 0.0;
    for (int l = 1; l <= two_m; ++l) {
        double row = 0.0;
        for (int r = 1; r <= two_m; ++r) row += bound(l, r);
        best = std::max(best, row);
    }
    return best;
}

GammaConstant gamma_from_bounds(const SegmentPartition& part, double p,
                                const std::function<double(int, int)>& bound,
                                const std::function<double(int, int)>& reference_bound) {
    if (!(p > -1.0))
        throw config_error("the row-sum envelope requires an infrared exponent p > -1");
    GammaConstant out;
    out.gamma_sum = bound_row_max(part.two_m, bound);
    const double ref_sum = bound_row_max(kGammaReferenceTwoM, reference_bound);
    const double c_fit = kGammaFitSafety * ref_sum /
                         envelope_shape(kGammaReferenceBeta, kGammaReferenceTwoM, p);
    out.gamma_formula = c_fit * envelope_shape(part.beta, part.two_m, p);
    return out;
}

void check_partition_beta(const SegmentPartition& part, double beta) {
    if (std::abs(part.beta - beta) > 1e-9 * std::max(1.0, beta))
        throw config_error("partition beta " + format_double(part.beta) +
                           " does not match the model beta " + format_double(beta));
}

// Effective per-shell coupling of the degeneracy-symmetric mode combination.
complexd shell_coupling(const RadialShell& shell, int alpha) {
    return std::sqrt(shell.degeneracy) * shell.g[alpha];
}

// Dense Hamiltonian on atom (x) truncated shell Fock space, every shell capped at
// n_max bosons; the caller owns the dimension budget.
Eigen::MatrixXcd dense_hamiltonian(const FiniteVolumeModel& fv, int n_max, double lambda) {
    const int d = fv.spec.atom.dim;
    const int levels = n_max + 1;
    const int n_shells = static_cast<int>(fv.shells.size());
    int fdim = 1;
    std::vector<int> stride(n_shells);
    for (int s = 0; s < n_shells; ++s) {
        stride[s] = fdim;
        fdim *= levels;
    }
    const int dim = d * fdim;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

    for (int f = 0; f < fdim; ++f) {
        double field_energy = 0.0;
        for (int s = 0; s < n_shells; ++s)
            field_energy += fv.shells[s].energy * ((f / stride[s]) % levels);
        for (int a = 0; a < d; ++a)
            h(a * fdim + f, a * fdim + f) = fv.spec.atom.energies[a] + field_energy;
    }

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const int n_alpha = static_cast<int>(fv.spec.couplings.size());
    for (int alpha = 0; alpha < n_alpha; ++alpha) {
        const Eigen::MatrixXcd& g_mat = fv.spec.couplings[alpha].G;
        for (int s = 0; s < n_shells; ++s) {
            const complexd c = shell_coupling(fv.shells[s], alpha);
            for (int f = 0; f < fdim; ++f) {
                const int occ = (f / stride[s]) % levels;
                if (occ == n_max) continue;
                const int f_up = f + stride[s];
                const double ladder = std::sqrt(occ + 1.0) * inv_sqrt2;
                for (int a = 0; a < d; ++a) {
                    for (int b = 0; b < d; ++b) {
                        const complexd v = lambda * g_mat(a, b) * ladder;
                        h(a * fdim + f_up, b * fdim + f) += v * c;
                        h(b * fdim + f, a * fdim + f_up) += std::conj(v * c);
                    }
                }
            }
        }
    }
    return h;
}

int dense_dimension(const FiniteVolumeModel& fv, int n_max) {
    if (n_max < 0) throw config_error("shell occupation cap must be >= 0");
    const double dim =
        fv.spec.atom.dim * std::pow(n_max + 1.0, static_cast<double>(fv.shells.size()));
    if (dim > kDenseOracleBudget)
        throw budget_error("dense oracle dimension " + format_double(dim) + " exceeds " +
                           format_double(kDenseOracleBudget));
    return static_cast<int>(std::lround(dim));
}

} // namespace

FiniteVolumeModel make_finite_volume(const model::ModelSpec& spec, double box_side,
                                     int mode_cutoff) {
    model::validate_spec(spec);
    if (!(box_side > 0.0) || !std::isfinite(box_side))
        throw config_error("box side must be positive and finite");
    if (mode_cutoff < 0)
        throw config_error("mode cutoff must be >= 0 (0 selects it automatically)");

    const double unit = kTwoPi / box_side;
    double cutoff_max = 1.0;
    for (const auto& term : spec.couplings) cutoff_max = std::max(cutoff_max, term.ff.cutoff);
    const bool automatic = (mode_cutoff == 0);
    int n_cap = automatic ? static_cast<int>(std::ceil(8.0 * cutoff_max / unit)) : mode_cutoff;
    n_cap = std::max(n_cap, 1);
    const long long span = 2LL * n_cap + 1;
    if (span * span * span > kLatticeEnumerationBudget)
        throw budget_error("lattice enumeration over |n| <= " + std::to_string(n_cap) +
                           " exceeds the mode budget");

    std::vector<double> degeneracy(static_cast<std::size_t>(n_cap) * n_cap + 1, 0.0);
    for (int n1 = -n_cap; n1 <= n_cap; ++n1) {
        for (int n2 = -n_cap; n2 <= n_cap; ++n2) {
            for (int n3 = -n_cap; n3 <= n_cap; ++n3) {
                const long long m =
                    1LL * n1 * n1 + 1LL * n2 * n2 + 1LL * n3 * n3;
                if (m >= 1 && m <= 1LL * n_cap * n_cap) degeneracy[m] += 1.0;
            }
        }
    }

    const std::size_t n_alpha = spec.couplings.size();
    std::vector<double> shell_weight(degeneracy.size(), 0.0);
    double total_weight = 0.0;
    for (std::size_t m = 1; m < degeneracy.size(); ++m) {
        if (degeneracy[m] == 0.0) continue;
        const double energy = unit * std::sqrt(static_cast<double>(m));
        double w = 0.0;
        for (const auto& term : spec.couplings) w += std::norm(term.ff.g(energy));
        shell_weight[m] = degeneracy[m] * w;
        total_weight += shell_weight[m];
    }

    int chosen = n_cap;
    if (automatic && total_weight > 0.0) {
        double kept = 0.0;
        std::vector<double> kept_by_cut(n_cap + 1, 0.0);
        std::size_t m = 1;
        for (int cut = 1; cut <= n_cap; ++cut) {
            for (; m <= static_cast<std::size_t>(cut) * cut; ++m) kept += shell_weight[m];
            kept_by_cut[cut] = kept;
        }
        for (int cut = 1; cut <= n_cap; ++cut) {
            if (total_weight - kept_by_cut[cut] <= kShellTailTolerance * total_weight) {
                chosen = cut;
                break;
            }
        }
    } else if (automatic) {
        chosen = 1;
    }

    FiniteVolumeModel fv;
    fv.spec = spec;
    fv.box_side = box_side;
    fv.mode_cutoff = chosen;
    const double volume_factor = std::pow(unit, 1.5);
    fv.shells.push_back({1.0, 1.0, std::vector<complexd>(n_alpha, volume_factor)});
    for (std::size_t m = 1; m <= static_cast<std::size_t>(chosen) * chosen; ++m) {
        if (degeneracy[m] == 0.0) continue;
        RadialShell shell;
        shell.energy = unit * std::sqrt(static_cast<double>(m));
        shell.degeneracy = degeneracy[m];
        shell.g.reserve(n_alpha);
        for (const auto& term : spec.couplings)
            shell.g.push_back(volume_factor * term.ff.g(shell.energy));
        fv.shells.push_back(std::move(shell));
    }
    return fv;
}

FiniteVolumeModel single_mode_model(double energy, complexd g, double beta) {
    if (!(energy > 0.0)) throw config_error("single-mode energy must be positive");
    if (!(beta > 0.0)) throw config_error("beta must be positive");
    model::ModelSpec spec;
    spec.atom.dim = 2;
    spec.atom.energies = {0.0, 1.0};
    model::CouplingTerm term;
    term.G = Eigen::MatrixXcd::Identity(2, 2);
    spec.couplings.push_back(std::move(term));
    spec.beta = beta;

    FiniteVolumeModel fv;
    fv.spec = std::move(spec);
    fv.box_side = kTwoPi;
    fv.mode_cutoff = 1;
    fv.shells.push_back({energy, 1.0, {g}});
    return fv;
}

int SegmentPartition::segment_of(double t) const {
    const int idx = static_cast<int>(std::floor(t / segment_length())) + 1;
    return std::clamp(idx, 1, two_m);
}

SegmentPartition make_partition(double beta, int two_m) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw config_error("beta must be positive");
    if (two_m < 2 || two_m % 2 != 0)
        throw config_error("segment count must be an even integer >= 2, got " +
                           std::to_string(two_m));
    return SegmentPartition{two_m, beta};
}

std::vector<Pairing> enumerate_pairings(int two_n) {
    if (two_n <= 0 || two_n % 2 != 0)
        throw config_error("pairings need a positive even insertion count, got " +
                           std::to_string(two_n));
    if (two_n > kPairingBudget)
        throw budget_error("pairing enumeration capped at " + std::to_string(kPairingBudget) +
                           " insertions, got " + std::to_string(two_n));

    std::vector<Pairing> out;
    std::vector<bool> used(two_n, false);
    std::vector<std::pair<int, int>> current;
    std::function<void()> recurse = [&]() {
        int l = 0;
        while (l < two_n && used[l]) ++l;
        if (l == two_n) {
            out.push_back(Pairing{current});
            return;
        }
        used[l] = true;
        for (int r = l + 1; r < two_n; ++r) {
            if (used[r]) continue;
            used[r] = true;
            current.emplace_back(l, r);
            recurse();
            current.pop_back();
            used[r] = false;
        }
        used[l] = false;
    };
    recurse();
    return out;
}

int Graph::total_multiplicity() const {
    int total = 0;
    for (const auto& [key, mult] : pair_multiplicity) total += mult;
    return total;
}

Graph make_graph(const SegmentPartition& part, const std::vector<double>& times,
                 const Pairing& pairing) {
    check_times(times, part.beta);
    Graph graph;
    for (const auto& [l, r] : pairing.pairs) {
        if (l < 0 || r < 0 || l >= static_cast<int>(times.size()) ||
            r >= static_cast<int>(times.size()) || l >= r)
            throw config_error("pairing indices out of range for the time sequence");
        const int seg_l = part.segment_of(times[l]);
        const int seg_r = part.segment_of(times[r]);
        graph.pair_multiplicity[{std::min(seg_l, seg_r), std::max(seg_l, seg_r)}] += 1;
    }
    return graph;
}

double propagator(const FiniteVolumeModel& fv, int alpha_l, int alpha_r, double t_l,
                  double t_r) {
    check_alpha(fv, alpha_l);
    check_alpha(fv, alpha_r);
    const double beta = fv.spec.beta;
    if (!(t_l >= 0.0) || !(t_r >= t_l) || !(t_r <= beta))
        throw config_error("propagator needs 0 <= t_l <= t_r <= beta");

    complexd acc = 0.0;
    for (const auto& shell : fv.shells) {
        const complexd gl = shell.g[alpha_l];
        const complexd gr = shell.g[alpha_r];
        const double weight = shell.degeneracy * bose_weight(beta, shell.energy);
        const double far = std::exp(-(beta + t_l - t_r) * shell.energy);
        const double near = std::exp(-(t_r - t_l) * shell.energy);
        acc += weight * (std::conj(gr) * gl * far + std::conj(gl) * gr * near);
    }
    return 0.5 * acc.real();
}

double wick_expectation(const FiniteVolumeModel& fv, const std::vector<int>& alphas,
                        const std::vector<double>& times) {
    if (alphas.size() != times.size())
        throw config_error("coupling indices and times must have equal length");
    const int two_n = static_cast<int>(times.size());
    if (two_n == 0 || two_n % 2 != 0)
        throw config_error("even number of field insertions required; odd moments vanish "
                           "identically and are rejected rather than silently zeroed");
    check_times(times, fv.spec.beta);
    for (int alpha : alphas) check_alpha(fv, alpha);

    const auto pairings = enumerate_pairings(two_n);
    std::vector<double> terms;
    terms.reserve(pairings.size());
    for (const auto& pairing : pairings) {
        double product = 1.0;
        for (const auto& [l, r] : pairing.pairs)
            product *= propagator(fv, alphas[l], alphas[r], times[l], times[r]);
        terms.push_back(product);
    }
    return tree_sum(terms);
}

SegmentDistance segment_distance(const SegmentPartition& part, int l, int r) {
    if (l < 1 || l > part.two_m || r < 1 || r > part.two_m)
        throw config_error("segment indices must lie in [1, " + std::to_string(part.two_m) +
                           "]");
    const double len = part.segment_length();
    const int sep = std::abs(l - r);
    SegmentDistance out;
    out.d_minus = len * std::max(sep - 1, 0);
    out.d_plus = part.beta - len * (sep + 1);
    out.d = std::min(out.d_minus, out.d_plus);
    return out;
}

double pair_bound(const FiniteVolumeModel& fv, const SegmentPartition& part, int l, int r) {
    check_partition_beta(part, fv.spec.beta);
    const double d = segment_distance(part, l, r).d;
    const double beta = fv.spec.beta;
    const std::size_t n_alpha =
        fv.shells.empty() ? 0 : fv.shells.front().g.size();
    double best = 0.0;
    for (std::size_t alpha = 0; alpha < n_alpha; ++alpha) {
        double sum = 0.0;
        for (const auto& shell : fv.shells)
            sum += shell.degeneracy * std::norm(shell.g[alpha]) *
                   std::exp(-d * shell.energy) * bose_weight(beta, shell.energy);
        best = std::max(best, sum);
    }
    return 4.0 * best;
}

double pair_bound(const model::ModelSpec& spec, const SegmentPartition& part, int l, int r) {
    model::validate_spec(spec);
    check_partition_beta(part, spec.beta);
    const double d = segment_distance(part, l, r).d;
    const double beta = spec.beta;
    double best = 0.0;
    for (const auto& term : spec.couplings) {
        const auto& ff = term.ff;
        // Bose-regularized radial integrand: the 1/(1 - e^{-beta u}) weight is split as
        // bose_regular(beta u)/(beta u), leaving a u^{1+2p}-regular integrand at u = 0.
        auto integrand = [&](double u) {
            const double profile = ff.profile_jet(u).value();
            return (ff.angular_factor / beta) * std::pow(u, 1.0 + 2.0 * ff.p) * profile *
                   profile * std::exp(-d * u) * bose_regular(beta * u);
        };
        const QuadResult q = integrate(integrand, 0.0, 8.0 * ff.cutoff);
        best = std::max(best, q.value);
    }
    return 4.0 * best;
}

GammaConstant gamma_constant(const SegmentPartition& part, const FiniteVolumeModel& fv) {
    check_partition_beta(part, fv.spec.beta);
    if (fv.spec.couplings.empty()) return GammaConstant{0.0, 0.0};
    FiniteVolumeModel reference = fv;
    reference.spec.beta = kGammaReferenceBeta;
    const SegmentPartition ref_part =
        make_partition(kGammaReferenceBeta, kGammaReferenceTwoM);
    return gamma_from_bounds(
        part, min_exponent(fv.spec),
        [&](int l, int r) { return pair_bound(fv, part, l, r); },
        [&](int l, int r) { return pair_bound(reference, ref_part, l, r); });
}

GammaConstant gamma_constant(const SegmentPartition& part, const model::ModelSpec& spec) {
    check_partition_beta(part, spec.beta);
    if (spec.couplings.empty()) return GammaConstant{0.0, 0.0};
    model::ModelSpec reference = spec;
    reference.beta = kGammaReferenceBeta;
    const SegmentPartition ref_part =
        make_partition(kGammaReferenceBeta, kGammaReferenceTwoM);
    return gamma_from_bounds(
        part, min_exponent(spec),
        [&](int l, int r) { return pair_bound(spec, part, l, r); },
        [&](int l, int r) { return pair_bound(reference, ref_part, l, r); });
}

double coupling_norm_sum(const model::ModelSpec& spec) {
    double sum = 0.0;
    for (const auto& term : spec.couplings) sum += model::operator_norm(term.G);
    return sum;
}

double graph_bound_term(const std::vector<int>& k_list, double lambda, double beta,
                        const SegmentPartition& part, double gamma, double c_prime) {
    if (k_list.empty()) throw config_error("graph term needs at least one insertion count");
    if (!(gamma >= 0.0) || !(c_prime >= 0.0))
        throw config_error("gamma and c_prime must be nonnegative");
    if (!(beta > 0.0)) throw config_error("beta must be positive");
    long long total = 0;
    for (int k : k_list) {
        if (k < 1)
            throw config_error("insertion counts must be >= 1, got " + std::to_string(k));
        total += k;
    }
    const double x = c_prime * std::abs(lambda) * gamma * beta / part.two_m;
    if (x == 0.0) return 0.0;
    double log_term = static_cast<double>(total) * std::log(x);
    for (int k : k_list)
        log_term += 0.5 * k * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0);
    return std::exp(log_term);
}

double series_bound(double x) {
    if (!(x >= 0.0)) throw config_error("series argument must be >= 0");
    if (x == 0.0) return 0.0;

    const double log_x = std::log(x);
    const double log_rel = std::log(1e-12);
    double log_sum = -std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200000; ++k) {
        const double log_term =
            k * log_x + 0.5 * (k + 1.0) * std::log(k + 1.0) - std::lgamma(k + 2.0);
        log_sum = std::max(log_sum, log_term) +
                  std::log1p(std::exp(std::min(log_sum, log_term) -
                                      std::max(log_sum, log_term)));
        if (log_term < log_sum + log_rel && log_term < prev) return std::exp(log_x + log_sum);
        prev = log_term;
    }
    throw numerical_error("series tail did not reach relative 1e-12");
}

double omega_q_bound(const FiniteVolumeModel& fv, const SegmentPartition& part, double tau) {
    const double beta = fv.spec.beta;
    if (beta < 1.0)
        throw config_error("the atomic tail bound is stated for beta >= 1");
    check_partition_beta(part, beta);
    if (std::abs(tau - part.tau()) > 1e-9 * std::max(1.0, beta))
        throw config_error("tau must equal beta / (2 * two_m)");
    if (fv.spec.atom.energies.size() < 2)
        throw config_error("the excited-weight bound needs at least two atomic levels");
    const double gap = fv.spec.atom.energies[1] - fv.spec.atom.energies[0];
    const double gamma = gamma_constant(part, fv).gamma_sum;
    const double x =
        coupling_norm_sum(fv.spec) * std::abs(fv.spec.lambda) * gamma * 2.0 * tau;
    return 2.0 * std::exp(-2.0 * tau * gap) + series_bound(x);
}

double omega_q_exact(const FiniteVolumeModel& fv, int n_max) {
    model::validate_spec(fv.spec);
    const int dim = dense_dimension(fv, n_max);
    const Eigen::MatrixXcd h = dense_hamiltonian(fv, n_max, fv.spec.lambda);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success)
        throw numerical_error("dense eigendecomposition failed in the excited-weight oracle");
    const Eigen::VectorXd& levels = solver.eigenvalues();
    const Eigen::MatrixXcd& vectors = solver.eigenvectors();

    const int fdim = dim / fv.spec.atom.dim;
    const double ground = levels.minCoeff();
    const double beta = fv.spec.beta;
    double numerator = 0.0;
    double denominator = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double weight = std::exp(-beta * (levels[i] - ground));
        const double ground_weight = vectors.col(i).head(fdim).squaredNorm();
        numerator += weight * (1.0 - ground_weight);
        denominator += weight;
    }
    return numerator / denominator;
}

double graph_value_bound(const FiniteVolumeModel& fv, const SegmentPartition& part,
                         const Graph& graph) {
    double product = 1.0;
    for (const auto& [key, mult] : graph.pair_multiplicity)
        product *= std::pow(pair_bound(fv, part, key.first, key.second), mult);
    return product;
}

double wick_domination_bound(const FiniteVolumeModel& fv, const SegmentPartition& part,
                             const std::vector<double>& times) {
    check_partition_beta(part, fv.spec.beta);
    const auto pairings = enumerate_pairings(static_cast<int>(times.size()));
    std::vector<double> terms;
    terms.reserve(pairings.size());
    for (const auto& pairing : pairings)
        terms.push_back(graph_value_bound(fv, part, make_graph(part, times, pairing)));
    return tree_sum(terms);
}

namespace {

Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = complexd(gauss(rng), gauss(rng));
    return 0.5 * (m + m.adjoint().eval());
}

Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    return solver.eigenvectors() *
           solver.eigenvalues().array().exp().matrix().asDiagonal() *
           solver.eigenvectors().adjoint();
}

double schatten_norm(const Eigen::MatrixXcd& m, double p) {
    const Eigen::VectorXd sigma = m.jacobiSvd().singularValues();
    if (std::isinf(p)) return sigma.size() == 0 ? 0.0 : sigma.maxCoeff();
    double sum = 0.0;
    for (int i = 0; i < sigma.size(); ++i) sum += std::pow(sigma[i], p);
    return std::pow(sum, 1.0 / p);
}

std::vector<double> sample_holder_exponents(std::mt19937_64& rng, int count) {
    const double inf = std::numeric_limits<double>::infinity();
    static const std::vector<std::vector<double>> presets = {
        {1.0},          {2.0, 2.0},      {4.0, 4.0 / 3.0}, {1.0, inf},
        {3.0, 3.0, 3.0}, {2.0, 4.0, 4.0}, {1.0, inf, inf},  {6.0, 3.0, 2.0}};
    std::vector<const std::vector<double>*> fitting;
    for (const auto& p : presets)
        if (static_cast<int>(p.size()) == count) fitting.push_back(&p);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (!fitting.empty() && uniform(rng) < 0.5)
        return *fitting[static_cast<std::size_t>(uniform(rng) * fitting.size()) %
                        fitting.size()];
    // Random tuple: exponential simplex weights w_j, p_j = 1/w_j, sum 1/p_j = 1.
    std::vector<double> weights(count);
    double total = 0.0;
    for (double& w : weights) {
        w = -std::log(uniform(rng) + 1e-300);
        total += w;
    }
    std::vector<double> exponents(count);
    for (int j = 0; j < count; ++j) exponents[j] = total / weights[j];
    return exponents;
}

} // namespace

TraceInequalityReport trace_inequality_checks(int samples, unsigned seed) {
    if (samples < 1) throw config_error("samples must be >= 1");
    std::mt19937_64 rng(seed);
    TraceInequalityReport report;
    report.samples = samples;
    report.min_holder_margin = std::numeric_limits<double>::infinity();
    report.min_peierls_margin = std::numeric_limits<double>::infinity();
    const double tolerance = 1e-9;

    auto record = [&](double margin, double& slot, const std::string& label) {
        slot = std::min(slot, margin);
        if (margin < -tolerance) {
            ++report.violations;
            if (report.first_violation.empty())
                report.first_violation = label + " margin " + format_double(margin);
        }
    };

    auto holder_check = [&](const std::vector<Eigen::MatrixXcd>& factors,
                            const std::vector<double>& exponents, const std::string& label) {
        Eigen::MatrixXcd product =
            Eigen::MatrixXcd::Identity(factors.front().rows(), factors.front().cols());
        double rhs = 1.0;
        for (std::size_t j = 0; j < factors.size(); ++j) {
            product = (product * factors[j]).eval();
            rhs *= schatten_norm(factors[j], exponents[j]);
        }
        const double lhs = schatten_norm(product, 1.0);
        const double scale = std::max({lhs, rhs, 1e-30});
        ++report.holder_checks;
        record((rhs - lhs) / scale, report.min_holder_margin, label);
    };

    auto peierls_check = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                             const std::string& label) {
        const Eigen::MatrixXcd exp_b = hermitian_exp(b);
        const double z_b = exp_b.trace().real();
        const double lhs = hermitian_exp(a + b).trace().real() / z_b;
        const double rhs = std::exp((a * exp_b).trace().real() / z_b);
        ++report.peierls_checks;
        record((lhs - rhs) / std::max(lhs, 1e-30), report.min_peierls_margin, label);
    };

    // Deterministic equality edges first.
    holder_check({random_hermitian(rng, 4)}, {1.0}, "holder single-factor equality");
    peierls_check(Eigen::MatrixXcd::Zero(4, 4), random_hermitian(rng, 4),
                  "peierls zero-perturbation equality");

    for (int s = 0; s < samples; ++s) {
        const int count = 1 + s % 3;
        std::vector<Eigen::MatrixXcd> factors;
        factors.reserve(count);
        for (int j = 0; j < count; ++j) factors.push_back(random_hermitian(rng, 4));
        holder_check(factors, sample_holder_exponents(rng, count),
                     "holder sample " + std::to_string(s));
        peierls_check(random_hermitian(rng, 4), random_hermitian(rng, 4),
                      "peierls sample " + std::to_string(s));
    }

    // Coupled vs uncoupled partition functions on a small finite-volume model; the
    // field operators are odd, so the first-order term vanishes and the ratio is <= 1.
    model::ModelSpec tiny;
    tiny.atom.dim = 2;
    tiny.atom.energies = {0.0, 1.0};
    model::CouplingTerm term;
    term.G = Eigen::MatrixXcd::Zero(2, 2);
    term.G(0, 1) = 1.0;
    term.G(1, 0) = 1.0;
    tiny.couplings.push_back(std::move(term));
    tiny.beta = 2.0;
    tiny.lambda = 0.1;
    const FiniteVolumeModel fv = make_finite_volume(tiny, 8.0, 1);
    const int n_max = 2;
    dense_dimension(fv, n_max);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> free_solver(
        dense_hamiltonian(fv, n_max, 0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> coupled_solver(
        dense_hamiltonian(fv, n_max, tiny.lambda));
    const double shift = coupled_solver.eigenvalues().minCoeff();
    double z_free = 0.0;
    double z_coupled = 0.0;
    for (int i = 0; i < free_solver.eigenvalues().size(); ++i)
        z_free += std::exp(-tiny.beta * (free_solver.eigenvalues()[i] - shift));
    for (int i = 0; i < coupled_solver.eigenvalues().size(); ++i)
        z_coupled += std::exp(-tiny.beta * (coupled_solver.eigenvalues()[i] - shift));
    report.finite_volume_ratio = z_free / z_coupled;
    if (report.finite_volume_ratio > 1.0 + tolerance) {
        ++report.violations;
        if (report.first_violation.empty())
            report.first_violation = "partition-function ratio " +
                                     format_double(report.finite_volume_ratio) +
                                     " exceeds 1";
    }
    return report;
}

} // namespace tfld::dyson
