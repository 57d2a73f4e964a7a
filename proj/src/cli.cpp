#include "thermofield/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <random>

#include <json.hpp>

#include "thermofield/cache.hpp"
#include "thermofield/dynamics.hpp"
#include "thermofield/dyson.hpp"
#include "thermofield/errors.hpp"
#include "thermofield/kms.hpp"
#include "thermofield/model.hpp"
#include "thermofield/spectral.hpp"

namespace tfld::cli {
namespace {

using json = nlohmann::json;
using complexd = std::complex<double>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_g17(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string format_g6(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.6g", value);
    return buffer;
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(trim(text.substr(start)));
            break;
        }
        parts.push_back(trim(text.substr(start, comma - start)));
        start = comma + 1;
    }
    if (parts.size() == 1 && parts.front().empty()) parts.clear();
    return parts;
}

bool lex_real(const std::string& text, double& value) {
    if (text.empty()) return false;
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size() && std::isfinite(value);
}

bool lex_int(const std::string& text, long long& value) {
    if (text.empty()) return false;
    char* end = nullptr;
    value = std::strtoll(text.c_str(), &end, 10);
    return end == text.c_str() + text.size();
}

bool lex_uint(const std::string& text, unsigned long long& value) {
    if (text.empty() || text.front() == '-') return false;
    char* end = nullptr;
    value = std::strtoull(text.c_str(), &end, 10);
    return end == text.c_str() + text.size();
}

const std::vector<std::string>& experiment_name_table() {
    static const std::vector<std::string> names = {
        "validate", "spectrum",    "kms",          "overlap-sweep",
        "fgr",      "lso",         "virial",       "evolve",
        "dyson-bound", "dyson-oracle", "wick-test", "pc-probe",
    };
    return names;
}

std::vector<SchemaEntry> build_schema() {
    std::vector<SchemaEntry> schema;
    const auto add = [&](const char* key, const char* kind, const char* value,
                         std::vector<std::string> choices, const char* help) {
        schema.push_back(SchemaEntry{key, kind, value, std::move(choices), help});
    };
    add("model.d", "int", "2", {}, "atomic dimension, >= 2");
    add("model.energies", "real-list", "0,1", {}, "strictly increasing atomic levels");
    add("model.beta", "real", "1", {}, "inverse temperature, > 0");
    add("model.lambda", "real", "0", {}, "coupling strength");
    add("model.glue_phase", "real", "", {}, "override of the gluing phase (unset: exponent rule)");
    add("coupling.matrix", "choice", "sx", {"sx", "sy", "sz", "sx+sz", "hopping", "number", "none"},
        "atomic coupling matrix family; none removes the coupling term");
    add("coupling.p", "real", "0.5", {}, "infrared exponent: -0.5, 0.5, 1.5 or > 2");
    add("coupling.amplitude", "real", "1", {}, "radial profile amplitude");
    add("coupling.cutoff", "real", "1", {}, "gaussian ultraviolet cutoff scale, > 0");
    add("coupling.tilt", "real", "0", {}, "linear profile tilt (nonzero fails the flatness check)");
    add("coupling.phase0", "real", "0", {}, "constant profile phase");
    add("coupling.angular", "real", "12.566370614359172", {}, "angular factor, 4 pi for s-waves");
    add("grid.kind", "choice", "uniform", {"uniform", "geometric"}, "frequency grid family");
    add("grid.modes", "int", "8", {}, "glued mode count, even and >= 2");
    add("grid.u_max", "real", "4", {}, "frequency window half-width, > 0");
    add("grid.u_min", "real", "0.05", {}, "smallest positive mode of the geometric grid");
    add("grid.refinement", "int", "0", {}, "mode count doublings applied on top of grid.modes");
    add("trunc.n_max", "int", "2", {}, "total boson occupation cutoff, >= 0");
    add("run.output", "string", "tfld_run", {}, "output path prefix");
    add("run.seed", "uint", "20250814", {}, "random seed echoed into the manifest");
    add("run.jobs", "int", "1", {}, "bounded worker count for independent sweep points");
    add("spectrum.count", "int", "6", {}, "eigenvalues nearest zero to report");
    add("spectrum.tol", "real", "1e-9", {}, "eigensolver residual tolerance");
    add("spectrum.dense_threshold", "int", "2000", {}, "dimension below which the dense solver runs");
    add("kms.tol", "real", "1e-10", {}, "Krylov propagation tolerance");
    add("sweep.betas", "real-list", "1,5,25", {}, "inverse temperatures of the overlap sweep");
    add("sweep.lambdas", "real-list", "0,0.05", {}, "coupling strengths of the overlap sweep");
    add("lso.epsilons", "real-list", "0.2,0.1,0.05", {}, "regularization ladder, decreasing");
    add("lso.modes", "int-list", "", {}, "per-rung grid.modes override (unset: grid.modes everywhere)");
    add("virial.theta", "real", "1", {}, "conjugate operator scale");
    add("virial.epsilon", "real", "1", {}, "resolvent regularization of the conjugate operator");
    add("evolve.horizon", "real", "10", {}, "evolution horizon T, > 0");
    add("evolve.observable", "choice", "population", {"population", "sx", "sz", "number"},
        "sampled observable; population is the excited-level projector");
    add("evolve.initial", "choice", "excited", {"reference", "excited"},
        "initial state: reference vector or the excited doubled-atom basis state");
    add("dyson.betas", "real-list", "", {}, "bound sweep betas (unset: model.beta)");
    add("dyson.lambdas", "real-list", "", {}, "bound sweep lambdas (unset: model.lambda)");
    add("dyson.two_m", "int-list", "2,4", {}, "segment counts 2M of the partition");
    add("dyson.box", "real", "8", {}, "finite-volume box side L");
    add("dyson.cutoff", "int", "1", {}, "lattice mode cutoff |n| <= n_cut; 0 selects automatically");
    add("dyson.n_max", "int", "3", {}, "per-shell occupation cutoff of the dense oracle");
    add("dyson.exact", "bool", "true", {}, "also evaluate the dense-trace oracle per row");
    add("wick.energy", "real", "1", {}, "single-mode energy of the Wick test");
    add("wick.amplitude", "real", "1", {}, "coupling amplitude of the Wick test");
    add("wick.phase", "real", "0", {}, "coupling phase of the Wick test");
    add("wick.n_max", "int", "40", {}, "occupation cutoff of the brute-force trace oracle");
    add("wick.points", "int", "4", {}, "correlation order: 2, 4 or 6");
    add("wick.samples", "int", "4", {}, "random time configurations to compare");
    add("pc.window", "real", "0.5", {}, "spectral window around zero for the probe subspace");
    add("pc.nu", "real", "1.5", {}, "number-operator ball radius, >= 1");
    add("pc.e", "real", "0.6", {}, "epsilon exponent of the parameter rule");
    add("pc.t", "real", "0.1", {}, "theta exponent of the parameter rule");
    add("pc.theta", "real", "", {}, "explicit theta (unset: parameter rule)");
    add("pc.epsilon", "real", "", {}, "explicit epsilon, required with pc.theta");
    add("pc.delta", "real", "", {}, "explicit kernel shift (unset: 0 with pc.theta)");
    return schema;
}

const SchemaEntry* find_entry(const std::string& key) {
    for (const auto& entry : config_schema())
        if (entry.key == key) return &entry;
    return nullptr;
}

[[noreturn]] void lexical_error(const std::string& context, const std::string& key,
                                const std::string& expected, const std::string& value) {
    throw config_error(context + ": " + key + ": expected " + expected + ", got '" +
                       value + "'");
}

std::string check_lexical(const SchemaEntry& entry, const std::string& raw,
                          const std::string& context) {
    const std::string value = trim(raw);
    if (value.empty()) return "";
    if (entry.kind == "string") return value;
    if (entry.kind == "int") {
        long long parsed = 0;
        if (!lex_int(value, parsed)) lexical_error(context, entry.key, "an integer", value);
        return std::to_string(parsed);
    }
    if (entry.kind == "uint") {
        unsigned long long parsed = 0;
        if (!lex_uint(value, parsed))
            lexical_error(context, entry.key, "a nonnegative integer", value);
        return std::to_string(parsed);
    }
    if (entry.kind == "real") {
        double parsed = 0.0;
        if (!lex_real(value, parsed)) lexical_error(context, entry.key, "a real number", value);
        return value;
    }
    if (entry.kind == "bool") {
        std::string lower = value;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return "true";
        if (lower == "false" || lower == "0" || lower == "no" || lower == "off")
            return "false";
        lexical_error(context, entry.key, "a boolean", value);
    }
    if (entry.kind == "choice") {
        for (const auto& choice : entry.choices)
            if (value == choice) return value;
        std::string expected = "one of {";
        for (std::size_t k = 0; k < entry.choices.size(); ++k)
            expected += (k == 0 ? "" : ", ") + entry.choices[k];
        expected += "}";
        lexical_error(context, entry.key, expected, value);
    }
    if (entry.kind == "real-list" || entry.kind == "int-list") {
        const bool want_int = entry.kind == "int-list";
        std::string canonical;
        for (const auto& part : split_list(value)) {
            double real_parsed = 0.0;
            long long int_parsed = 0;
            if (part.empty() ||
                (want_int ? !lex_int(part, int_parsed) : !lex_real(part, real_parsed)))
                lexical_error(context, entry.key,
                              want_int ? "a comma list of integers" : "a comma list of reals",
                              value);
            if (!canonical.empty()) canonical += ",";
            canonical += want_int ? std::to_string(int_parsed) : part;
        }
        return canonical;
    }
    throw config_error("schema entry '" + entry.key + "' carries unknown kind '" +
                       entry.kind + "'");
}

const std::string& lookup(const RunConfig& config, const std::string& key) {
    const auto found = config.values.find(key);
    if (found == config.values.end())
        throw config_error("configuration key '" + key + "' is missing from the run");
    return found->second;
}

double get_real(const RunConfig& config, const std::string& key) {
    const std::string& text = lookup(config, key);
    double value = 0.0;
    if (!lex_real(text, value))
        throw config_error("configuration key '" + key + "' is unset");
    return value;
}

std::optional<double> get_optional_real(const RunConfig& config, const std::string& key) {
    const std::string& text = lookup(config, key);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    lex_real(text, value);
    return value;
}

int get_int(const RunConfig& config, const std::string& key) {
    const std::string& text = lookup(config, key);
    long long value = 0;
    if (!lex_int(text, value))
        throw config_error("configuration key '" + key + "' is unset");
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
        throw config_error("configuration key '" + key + "' is out of the int range");
    return static_cast<int>(value);
}

std::uint64_t get_uint(const RunConfig& config, const std::string& key) {
    const std::string& text = lookup(config, key);
    unsigned long long value = 0;
    if (!lex_uint(text, value))
        throw config_error("configuration key '" + key + "' is unset");
    return value;
}

bool get_bool(const RunConfig& config, const std::string& key) {
    return lookup(config, key) == "true";
}

std::vector<double> get_real_list(const RunConfig& config, const std::string& key) {
    std::vector<double> values;
    for (const auto& part : split_list(lookup(config, key))) {
        double value = 0.0;
        lex_real(part, value);
        values.push_back(value);
    }
    return values;
}

std::vector<int> get_int_list(const RunConfig& config, const std::string& key) {
    std::vector<int> values;
    for (const auto& part : split_list(lookup(config, key))) {
        long long value = 0;
        lex_int(part, value);
        values.push_back(static_cast<int>(value));
    }
    return values;
}

Eigen::MatrixXcd coupling_matrix_by_name(const std::string& name, int dim) {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
    if (name == "hopping") {
        for (int j = 0; j + 1 < dim; ++j) {
            g(j, j + 1) = 1.0;
            g(j + 1, j) = 1.0;
        }
        return g;
    }
    if (name == "number") {
        for (int j = 0; j < dim; ++j) g(j, j) = static_cast<double>(j);
        return g;
    }
    if (dim != 2)
        throw config_error("coupling.matrix '" + name + "' requires model.d = 2");
    if (name == "sx") {
        g(0, 1) = 1.0;
        g(1, 0) = 1.0;
    } else if (name == "sy") {
        g(0, 1) = complexd(0.0, -1.0);
        g(1, 0) = complexd(0.0, 1.0);
    } else if (name == "sz") {
        g(0, 0) = 1.0;
        g(1, 1) = -1.0;
    } else if (name == "sx+sz") {
        g(0, 0) = 1.0;
        g(0, 1) = 1.0;
        g(1, 0) = 1.0;
        g(1, 1) = -1.0;
    } else {
        throw config_error("unhandled coupling.matrix '" + name + "'");
    }
    return g;
}

model::ModelSpec build_spec(const RunConfig& config) {
    model::ModelSpec spec;
    spec.atom.dim = get_int(config, "model.d");
    spec.atom.energies = get_real_list(config, "model.energies");
    spec.beta = get_real(config, "model.beta");
    spec.lambda = get_real(config, "model.lambda");
    spec.glue_phase_override = get_optional_real(config, "model.glue_phase");
    const std::string matrix_name = lookup(config, "coupling.matrix");
    if (matrix_name != "none") {
        model::CouplingTerm term;
        term.G = coupling_matrix_by_name(matrix_name, spec.atom.dim);
        term.ff.p = get_real(config, "coupling.p");
        term.ff.amplitude = get_real(config, "coupling.amplitude");
        term.ff.cutoff = get_real(config, "coupling.cutoff");
        term.ff.tilt = get_real(config, "coupling.tilt");
        term.ff.phase0 = get_real(config, "coupling.phase0");
        term.ff.angular_factor = get_real(config, "coupling.angular");
        spec.couplings.push_back(std::move(term));
    }
    model::validate_spec(spec);
    return spec;
}

int effective_modes(const RunConfig& config) {
    const int modes = get_int(config, "grid.modes");
    const int refinement = get_int(config, "grid.refinement");
    if (modes < 2 || modes % 2 != 0)
        throw config_error("grid.modes must be even and >= 2, got " + std::to_string(modes));
    if (refinement < 0 || refinement > 20)
        throw config_error("grid.refinement must lie in [0, 20], got " +
                           std::to_string(refinement));
    return modes << refinement;
}

fock::BathGrid build_grid(const RunConfig& config) {
    const int modes = effective_modes(config);
    const double u_max = get_real(config, "grid.u_max");
    if (lookup(config, "grid.kind") == "geometric")
        return fock::make_geometric_grid(modes, get_real(config, "grid.u_min"), u_max);
    return fock::make_uniform_grid(modes, u_max);
}

struct Timings {
    double assemble{0.0};
    double compute{0.0};
};

liouvillian::LiouvillianBundle assemble_bundle(const RunConfig& config, json& manifest,
                                               Timings& timings) {
    const auto spec = build_spec(config);
    manifest["glue_phase"] = spec.glue_phase();
    const auto grid = build_grid(config);
    const int n_total_max = get_int(config, "trunc.n_max");
    const auto start = Clock::now();
    const auto basis = fock::enumerate_basis(grid.size(), n_total_max);
    std::string cache_status;
    auto bundle = cache::assemble_cached(spec, basis, grid, &cache_status);
    timings.assemble += seconds_since(start);
    if (!manifest.contains("cache")) manifest["cache"] = json::array();
    manifest["cache"].push_back(cache_status);
    return bundle;
}

void ensure_parent_directory(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_text_file(const std::string& path, const std::string& content) {
    ensure_parent_directory(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot open output file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw config_error("write failed: " + path);
}

struct RunContext {
    const RunConfig& config;
    json& manifest;
    Timings& timings;
    RunResult& result;
    std::string prefix;

    void emit(const std::string& suffix, const std::string& content) {
        const std::string path = prefix + suffix;
        write_text_file(path, content);
        result.outputs.push_back(path);
    }

    void emit_json(const std::string& suffix, json payload) {
        payload["schema_version"] = kOutputSchemaVersion;
        emit(suffix, payload.dump(2) + "\n");
    }
};

json complex_json(complexd value) {
    return json::array({value.real(), value.imag()});
}

json matrix_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) row += ",";
        row += format_g17(values[k]);
    }
    row += "\n";
    return row;
}

template <typename Row, typename Fn>
std::vector<Row> run_rows(std::size_t count, int jobs, Fn&& fn) {
    std::vector<Row> rows(count);
    if (jobs <= 1) {
        for (std::size_t k = 0; k < count; ++k) rows[k] = fn(k);
        return rows;
    }
    std::size_t next = 0;
    while (next < count) {
        const std::size_t wave =
            std::min(static_cast<std::size_t>(jobs), count - next);
        std::vector<std::future<Row>> futures;
        futures.reserve(wave);
        for (std::size_t k = 0; k < wave; ++k)
            futures.push_back(std::async(std::launch::async, fn, next + k));
        for (std::size_t k = 0; k < wave; ++k) rows[next + k] = futures[k].get();
        next += wave;
    }
    return rows;
}

double expectation(const Eigen::VectorXcd& psi, const SparseCd& op) {
    return psi.dot(Eigen::VectorXcd(op * psi)).real();
}

// Dense Gibbs-trace oracle for a single-mode 2N-point function, truncated at n_max.
double single_mode_trace_oracle(double energy, double beta, complexd g,
                                const std::vector<double>& times, int n_max) {
    const int dim = n_max + 1;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd product = Eigen::MatrixXcd::Identity(dim, dim);
    for (double t : times) {
        Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(dim, dim);
        for (int n = 1; n <= n_max; ++n) {
            const double root = std::sqrt(static_cast<double>(n)) * inv_sqrt2;
            phi(n, n - 1) = g * root * std::exp(-t * energy);
            phi(n - 1, n) = std::conj(g) * root * std::exp(t * energy);
        }
        product = (product * phi).eval();
    }
    double numerator = 0.0;
    double partition = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double weight = std::exp(-beta * energy * n);
        numerator += (weight * product(n, n)).real();
        partition += weight;
    }
    return numerator / partition;
}

void run_validate(RunContext& ctx) {
    const auto spec = build_spec(ctx.config);
    ctx.manifest["glue_phase"] = spec.glue_phase();
    const auto start = Clock::now();
    const auto report = model::validate_a1(spec);
    const double fgr = model::fgr_value(spec);
    const double commutator_constant = model::c_p_beta(spec);
    ctx.timings.compute += seconds_since(start);

    json payload;
    payload["experiment"] = "validate";
    json checks = json::array();
    int passed = 0;
    for (const auto& check : report.checks) {
        checks.push_back(json{{"name", check.name},
                              {"passed", check.passed},
                              {"value", check.value},
                              {"note", check.note}});
        passed += check.passed ? 1 : 0;
    }
    payload["checks"] = checks;
    payload["all_passed"] = report.all_passed();
    payload["fgr_value"] = fgr;
    payload["c_p_beta"] = commutator_constant;
    payload["glue_phase"] = spec.glue_phase();
    ctx.emit_json(".report.json", payload);

    ctx.manifest["result"] = {{"all_passed", report.all_passed()}, {"fgr_value", fgr}};
    ctx.result.summary = std::string("validate: ") +
                         (report.all_passed() ? "PASS" : "FAIL") + " (" +
                         std::to_string(passed) + "/" + std::to_string(report.checks.size()) +
                         " checks), fgr=" + format_g6(fgr);
}

void run_spectrum(RunContext& ctx) {
    auto bundle = assemble_bundle(ctx.config, ctx.manifest, ctx.timings);
    const int count = get_int(ctx.config, "spectrum.count");
    const double tol = get_real(ctx.config, "spectrum.tol");
    const int dense_threshold = get_int(ctx.config, "spectrum.dense_threshold");
    if (count < 1) throw config_error("spectrum.count must be >= 1");
    if (dense_threshold < 0) throw config_error("spectrum.dense_threshold must be >= 0");

    const auto start = Clock::now();
    const auto result = spectral::low_spectrum(bundle.L_lambda, count, tol,
                                               static_cast<std::size_t>(dense_threshold));
    ctx.timings.compute += seconds_since(start);

    json payload;
    payload["experiment"] = "spectrum";
    payload["dim"] = bundle.L_lambda.dim;
    payload["eigenvalues"] = result.eigenvalues;
    payload["residuals"] = result.residuals;
    ctx.emit_json(".spectrum.json", payload);

    const double smallest =
        result.eigenvalues.empty() ? 0.0 : std::abs(result.eigenvalues.front());
    ctx.manifest["result"] = {{"count", result.eigenvalues.size()},
                              {"smallest_magnitude", smallest}};
    ctx.result.summary = "spectrum: " + std::to_string(result.eigenvalues.size()) +
                         " eigenvalues near zero on dim " +
                         std::to_string(bundle.L_lambda.dim) +
                         ", |value|_min=" + format_g6(smallest);
}

void run_kms(RunContext& ctx) {
    auto bundle = assemble_bundle(ctx.config, ctx.manifest, ctx.timings);
    kms::KrylovSettings settings;
    settings.tol = get_real(ctx.config, "kms.tol");

    const auto start = Clock::now();
    const auto reference = kms::reference_vector(bundle.spec, bundle.basis);
    std::string method = "krylov";
    std::string fallback_note;
    kms::StateVector psi;
    try {
        psi = kms::interacting_kms_vector(bundle, settings);
    } catch (const numerical_error& error) {
        method = "kernel-cluster";
        fallback_note = error.what();
        psi = kms::make_state(
            spectral::kernel_cluster_projection(bundle.L_lambda.entries, reference.coeffs));
    }
    const double residual = kms::kernel_residual(bundle, psi);
    const double distance = kms::projection_distance(psi, reference);
    const double n_expectation = expectation(psi.coeffs, bundle.N.entries);
    const auto decomposition = kms::overlap_decomposition_check(bundle, psi);
    ctx.timings.compute += seconds_since(start);

    json payload;
    payload["experiment"] = "kms";
    payload["dim"] = bundle.L_lambda.dim;
    payload["method"] = method;
    if (!fallback_note.empty()) payload["fallback_reason"] = fallback_note;
    payload["kernel_residual"] = residual;
    payload["overlap_distance"] = distance;
    payload["n_expectation"] = n_expectation;
    payload["decomposition"] = {{"lhs", decomposition.lhs},
                                {"q_term", decomposition.q_term},
                                {"middle_term", decomposition.middle_term},
                                {"n_term", decomposition.n_term},
                                {"rhs", decomposition.rhs}};
    ctx.emit_json(".kms.json", payload);

    ctx.manifest["result"] = {{"kernel_residual", residual},
                              {"overlap_distance", distance},
                              {"method", method}};
    ctx.result.summary = "kms: overlap_distance=" + format_g6(distance) +
                         ", kernel_residual=" + format_g6(residual) + ", method=" + method;
}

void run_overlap_sweep(RunContext& ctx) {
    const auto spec = build_spec(ctx.config);
    ctx.manifest["glue_phase"] = spec.glue_phase();
    const auto betas = get_real_list(ctx.config, "sweep.betas");
    const auto lambdas = get_real_list(ctx.config, "sweep.lambdas");
    if (betas.empty()) throw config_error("sweep.betas must be nonempty");
    if (lambdas.empty()) throw config_error("sweep.lambdas must be nonempty");

    kms::SweepResources resources;
    resources.mode_count = effective_modes(ctx.config);
    resources.u_max = get_real(ctx.config, "grid.u_max");
    resources.n_total_max = get_int(ctx.config, "trunc.n_max");
    resources.u_min = get_real(ctx.config, "grid.u_min");

    const auto start = Clock::now();
    const auto records = kms::overlap_sweep(spec, betas, lambdas, resources);
    ctx.timings.compute += seconds_since(start);

    std::string csv = "beta,lambda,overlap_distance,kernel_residual,n_expectation\n";
    int failed = 0;
    for (const auto& record : records) {
        csv += csv_row({record.beta, record.lambda, record.overlap_distance,
                        record.kernel_residual, record.n_expectation});
        failed += record.extras.count("failed") > 0 ? 1 : 0;
    }
    ctx.emit(".sweep.csv", csv);

    ctx.manifest["result"] = {{"rows", records.size()}, {"failed", failed}};
    ctx.result.summary = "overlap-sweep: " + std::to_string(records.size()) + " rows (" +
                         std::to_string(betas.size()) + " betas x " +
                         std::to_string(lambdas.size()) + " lambdas), failed=" +
                         std::to_string(failed);
}

void run_fgr(RunContext& ctx) {
    const auto spec = build_spec(ctx.config);
    ctx.manifest["glue_phase"] = spec.glue_phase();
    const auto start = Clock::now();
    const double fgr = model::fgr_value(spec);
    const double commutator_constant = model::c_p_beta(spec);
    ctx.timings.compute += seconds_since(start);

    json payload;
    payload["experiment"] = "fgr";
    payload["fgr_value"] = fgr;
    payload["golden_rule_holds"] = fgr > 0.0;
    payload["c_p_beta"] = commutator_constant;
    payload["beta"] = spec.beta;
    payload["lambda"] = spec.lambda;
    payload["glue_phase"] = spec.glue_phase();
    ctx.emit_json(".fgr.json", payload);

    ctx.manifest["result"] = {{"fgr_value", fgr}, {"c_p_beta", commutator_constant}};
    ctx.result.summary = "fgr: value=" + format_g6(fgr) +
                         ", c_p_beta=" + format_g6(commutator_constant);
}

void run_lso(RunContext& ctx) {
    const auto spec = build_spec(ctx.config);
    ctx.manifest["glue_phase"] = spec.glue_phase();
    const auto epsilons = get_real_list(ctx.config, "lso.epsilons");
    if (epsilons.empty()) throw config_error("lso.epsilons must be nonempty");
    for (double epsilon : epsilons)
        if (epsilon <= 0.0) throw config_error("lso.epsilons must be positive");
    const auto modes_list = get_int_list(ctx.config, "lso.modes");
    if (!modes_list.empty() && modes_list.size() != epsilons.size())
        throw config_error("lso.modes must pair with lso.epsilons (" +
                           std::to_string(epsilons.size()) + " entries)");

    const auto gamma = spectral::gamma0_matrix(spec);
    const double gamma_scale = std::max(gamma.matrix.cwiseAbs().maxCoeff(), 1e-300);

    struct Rung {
        double epsilon{0.0};
        int modes{0};
        std::size_t dim{0};
        double rel_error{0.0};
        Eigen::MatrixXcd matrix;
    };
    std::vector<Rung> rungs;
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        RunConfig local = ctx.config;
        if (!modes_list.empty())
            local.values["grid.modes"] = std::to_string(modes_list[k]);
        auto bundle = assemble_bundle(local, ctx.manifest, ctx.timings);
        const auto start = Clock::now();
        Rung rung;
        rung.epsilon = epsilons[k];
        rung.modes = effective_modes(local);
        rung.dim = bundle.L_lambda.dim;
        rung.matrix = spectral::regularized_lso(bundle, epsilons[k]);
        rung.rel_error =
            (rung.matrix - gamma.matrix).cwiseAbs().maxCoeff() / gamma_scale;
        ctx.timings.compute += seconds_since(start);
        rungs.push_back(std::move(rung));
    }

    std::vector<const Rung*> ordered;
    for (const auto& rung : rungs) ordered.push_back(&rung);
    std::sort(ordered.begin(), ordered.end(),
              [](const Rung* a, const Rung* b) { return a->epsilon > b->epsilon; });
    json extrapolated_rel = nullptr;
    if (ordered.size() >= 3) {
        const Rung* last3[3] = {ordered[ordered.size() - 3], ordered[ordered.size() - 2],
                                ordered[ordered.size() - 1]};
        Eigen::MatrixXcd extrapolated = Eigen::MatrixXcd::Zero(
            gamma.matrix.rows(), gamma.matrix.cols());
        for (int i = 0; i < 3; ++i) {
            double weight = 1.0;
            for (int j = 0; j < 3; ++j)
                if (j != i)
                    weight *= (0.0 - last3[j]->epsilon) /
                              (last3[i]->epsilon - last3[j]->epsilon);
            extrapolated += weight * last3[i]->matrix;
        }
        extrapolated_rel =
            (extrapolated - gamma.matrix).cwiseAbs().maxCoeff() / gamma_scale;
    }

    json payload;
    payload["experiment"] = "lso";
    payload["gamma0"] = {{"matrix", matrix_json(gamma.matrix)},
                         {"gap", gamma.gap},
                         {"explicit_bound", gamma.explicit_bound},
                         {"golden_rule_holds", gamma.golden_rule_holds}};
    json ladder = json::array();
    for (const auto& rung : rungs)
        ladder.push_back(json{{"epsilon", rung.epsilon},
                              {"modes", rung.modes},
                              {"dim", rung.dim},
                              {"rel_error", rung.rel_error},
                              {"matrix", matrix_json(rung.matrix)}});
    payload["ladder"] = ladder;
    payload["extrapolated_rel_error"] = extrapolated_rel;
    ctx.emit_json(".lso.json", payload);

    ctx.manifest["result"] = {{"gamma0_gap", gamma.gap},
                              {"extrapolated_rel_error", extrapolated_rel}};
    ctx.result.summary =
        "lso: gamma0 gap=" + format_g6(gamma.gap) + ", ladder of " +
        std::to_string(rungs.size()) +
        (extrapolated_rel.is_null()
             ? std::string(" rungs")
             : " rungs, extrapolated rel error=" +
                   format_g6(extrapolated_rel.get<double>()));
}

void run_virial(RunContext& ctx) {
    auto bundle = assemble_bundle(ctx.config, ctx.manifest, ctx.timings);
    spectral::PCParameters params;
    params.theta = get_real(ctx.config, "virial.theta");
    params.epsilon = get_real(ctx.config, "virial.epsilon");

    const auto start = Clock::now();
    const auto reference = kms::reference_vector(bundle.spec, bundle.basis);
    const Eigen::VectorXcd psi =
        spectral::kernel_cluster_projection(bundle.L_lambda.entries, reference.coeffs);
    const auto report = spectral::virial_check(bundle, params, psi);
    const double eigen_residual = (bundle.L_lambda.entries * psi).norm();
    const double n_half_norm = std::sqrt(std::max(0.0, expectation(psi, bundle.N.entries)));
    const double commutator_constant = model::c_p_beta(bundle.spec);
    ctx.timings.compute += seconds_since(start);

    json payload;
    payload["experiment"] = "virial";
    payload["dim"] = bundle.L_lambda.dim;
    payload["b_expectation"] = report.b_expectation;
    payload["n_bound_ratio"] = report.n_bound_ratio;
    payload["eigen_residual"] = eigen_residual;
    payload["n_half_norm"] = n_half_norm;
    payload["c_p_beta"] = commutator_constant;
    payload["theta"] = params.theta;
    payload["epsilon"] = params.epsilon;
    ctx.emit_json(".virial.json", payload);

    ctx.manifest["result"] = {{"b_expectation", report.b_expectation},
                              {"n_bound_ratio", report.n_bound_ratio}};
    ctx.result.summary = "virial: <B>=" + format_g6(report.b_expectation) +
                         ", n_bound_ratio=" + format_g6(report.n_bound_ratio) +
                         ", eigen_residual=" + format_g6(eigen_residual);
}

void run_evolve(RunContext& ctx) {
    auto bundle = assemble_bundle(ctx.config, ctx.manifest, ctx.timings);
    const int dim = bundle.spec.atom.dim;
    const std::string observable = lookup(ctx.config, "evolve.observable");

    OperatorMatrix a;
    if (observable == "number") {
        a = bundle.N;
    } else {
        Eigen::MatrixXcd atomic = Eigen::MatrixXcd::Zero(dim, dim);
        if (observable == "population") {
            atomic(dim - 1, dim - 1) = 1.0;
        } else {
            if (dim != 2)
                throw config_error("evolve.observable '" + observable +
                                   "' requires model.d = 2");
            atomic = coupling_matrix_by_name(observable, 2);
        }
        a = dynamics::atomic_observable(bundle, atomic);
    }

    kms::StateVector initial;
    if (lookup(ctx.config, "evolve.initial") == "reference") {
        initial = kms::reference_vector(bundle.spec, bundle.basis);
    } else {
        Eigen::VectorXcd coeffs =
            Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(bundle.L_lambda.dim));
        coeffs[liouvillian::flat_index(dim, bundle.basis.dim(), dim - 1, dim - 1, 0)] = 1.0;
        initial = kms::make_state(std::move(coeffs));
    }

    kms::KrylovSettings settings;
    settings.tol = get_real(ctx.config, "kms.tol");
    const double horizon = get_real(ctx.config, "evolve.horizon");

    const auto start = Clock::now();
    const auto report = dynamics::rte_diagnostic(bundle, initial, a, horizon, settings);
    ctx.timings.compute += seconds_since(start);

    std::string csv = "time,value,cesaro\n";
    for (std::size_t k = 0; k < report.trajectory.times.size(); ++k)
        csv += csv_row({report.trajectory.times[k], report.trajectory.values[k],
                        report.trajectory.cesaro[k]});
    ctx.emit(".evolve.csv", csv);

    ctx.manifest["result"] = {{"deviation", report.deviation},
                              {"initial_deviation", report.initial_deviation},
                              {"equilibrium_value", report.equilibrium_value},
                              {"recurrence_time", report.recurrence_time},
                              {"trend", report.trend}};
    ctx.result.summary =
        "evolve: cesaro deviation " + format_g6(report.deviation) + " (initial " +
        format_g6(report.initial_deviation) + ") at T=" + format_g6(horizon) +
        ", recurrence=" + format_g6(report.recurrence_time);
}

void run_dyson_bound(RunContext& ctx) {
    const auto spec = build_spec(ctx.config);
    ctx.manifest["glue_phase"] = spec.glue_phase();
    auto betas = get_real_list(ctx.config, "dyson.betas");
    auto lambdas = get_real_list(ctx.config, "dyson.lambdas");
    if (betas.empty()) betas = {spec.beta};
    if (lambdas.empty()) lambdas = {spec.lambda};
    const auto two_m_list = get_int_list(ctx.config, "dyson.two_m");
    if (two_m_list.empty()) throw config_error("dyson.two_m must be nonempty");
    const double box = get_real(ctx.config, "dyson.box");
    const int cutoff = get_int(ctx.config, "dyson.cutoff");
    const int n_max = get_int(ctx.config, "dyson.n_max");
    const bool want_exact = get_bool(ctx.config, "dyson.exact");
    const int jobs = std::max(1, get_int(ctx.config, "run.jobs"));

    struct Point {
        double beta{0.0};
        double lambda{0.0};
        int two_m{0};
    };
    std::vector<Point> points;
    for (double beta : betas)
        for (double lambda : lambdas)
            for (int two_m : two_m_list) points.push_back({beta, lambda, two_m});

    struct Row {
        double tau{0.0};
        double bound{0.0};
        double exact{0.0};
    };
    const auto start = Clock::now();
    const auto rows = run_rows<Row>(points.size(), jobs, [&](std::size_t k) {
        const Point& point = points[k];
        model::ModelSpec local = spec;
        local.beta = point.beta;
        local.lambda = point.lambda;
        const auto fv = dyson::make_finite_volume(local, box, cutoff);
        const auto part = dyson::make_partition(point.beta, point.two_m);
        Row row;
        row.tau = part.tau();
        row.bound = dyson::omega_q_bound(fv, part, row.tau);
        row.exact = want_exact ? dyson::omega_q_exact(fv, n_max)
                               : std::numeric_limits<double>::quiet_NaN();
        return row;
    });
    ctx.timings.compute += seconds_since(start);

    std::string csv = "beta,lambda,two_m,tau,bound,exact,margin\n";
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double margin = rows[k].bound - rows[k].exact;
        csv += csv_row({points[k].beta, points[k].lambda,
                        static_cast<double>(points[k].two_m), rows[k].tau, rows[k].bound,
                        rows[k].exact, margin});
        if (want_exact) min_margin = std::min(min_margin, margin);
    }
    ctx.emit(".dyson.csv", csv);

    ctx.manifest["result"] = {{"rows", rows.size()}};
    if (want_exact) ctx.manifest["result"]["min_margin"] = min_margin;
    ctx.result.summary = "dyson-bound: " + std::to_string(rows.size()) + " rows" +
                         (want_exact ? ", min margin=" + format_g6(min_margin) : "");
}

void run_dyson_oracle(RunContext& ctx) {
    const auto spec = build_spec(ctx.config);
    ctx.manifest["glue_phase"] = spec.glue_phase();
    const double box = get_real(ctx.config, "dyson.box");
    const int cutoff = get_int(ctx.config, "dyson.cutoff");
    const int n_max = get_int(ctx.config, "dyson.n_max");
    const auto two_m_list = get_int_list(ctx.config, "dyson.two_m");
    if (two_m_list.empty()) throw config_error("dyson.two_m must be nonempty");
    const int two_m = two_m_list.front();

    const auto start = Clock::now();
    const auto fv = dyson::make_finite_volume(spec, box, cutoff);
    const double exact = dyson::omega_q_exact(fv, n_max);
    const auto part = dyson::make_partition(spec.beta, two_m);
    const double tau = part.tau();
    json bound = nullptr;
    if (spec.beta >= 1.0) bound = dyson::omega_q_bound(fv, part, tau);
    ctx.timings.compute += seconds_since(start);

    const double gap = spec.atom.energies[1] - spec.atom.energies[0];
    json closed_form = nullptr;
    if (spec.lambda == 0.0) {
        double excited = 0.0;
        double partition = 0.0;
        for (std::size_t j = 0; j < spec.atom.energies.size(); ++j) {
            const double weight =
                std::exp(-spec.beta * (spec.atom.energies[j] - spec.atom.energies[0]));
            partition += weight;
            if (j > 0) excited += weight;
        }
        closed_form = excited / partition;
    }

    json payload;
    payload["experiment"] = "dyson-oracle";
    payload["exact"] = exact;
    payload["closed_form_lambda0"] = closed_form;
    payload["tail_bound_beta"] = 2.0 * std::exp(-spec.beta * gap) / spec.beta;
    payload["tail_bound_tau"] = 2.0 * std::exp(-2.0 * tau * gap);
    payload["bound"] = bound;
    payload["two_m"] = two_m;
    payload["tau"] = tau;
    payload["n_max"] = n_max;
    json shells = json::array();
    for (const auto& shell : fv.shells)
        shells.push_back(json{{"energy", shell.energy}, {"degeneracy", shell.degeneracy}});
    payload["shells"] = shells;
    ctx.emit_json(".dyson_oracle.json", payload);

    ctx.manifest["result"] = {{"exact", exact}};
    ctx.result.summary = "dyson-oracle: exact excited weight=" + format_g6(exact) + " over " +
                         std::to_string(fv.shells.size()) + " shells";
}

void run_wick_test(RunContext& ctx) {
    const double beta = get_real(ctx.config, "model.beta");
    if (beta <= 0.0) throw config_error("model.beta must be positive");
    const double energy = get_real(ctx.config, "wick.energy");
    const double amplitude = get_real(ctx.config, "wick.amplitude");
    const double phase = get_real(ctx.config, "wick.phase");
    const int n_max = get_int(ctx.config, "wick.n_max");
    const int points = get_int(ctx.config, "wick.points");
    const int samples = get_int(ctx.config, "wick.samples");
    if (points != 2 && points != 4 && points != 6)
        throw config_error("wick.points must be 2, 4 or 6, got " + std::to_string(points));
    if (samples < 1) throw config_error("wick.samples must be >= 1");
    if (n_max < 1) throw config_error("wick.n_max must be >= 1");
    ctx.manifest["glue_phase"] = nullptr;

    const complexd g = amplitude * std::exp(complexd(0.0, phase));
    const auto fv = dyson::single_mode_model(energy, g, beta);
    std::mt19937_64 rng(get_uint(ctx.config, "run.seed"));
    std::uniform_real_distribution<double> uniform(0.0, beta);

    const auto start = Clock::now();
    json cases = json::array();
    double max_rel_error = 0.0;
    const std::vector<int> alphas(static_cast<std::size_t>(points), 0);
    for (int s = 0; s < samples; ++s) {
        std::vector<double> times(static_cast<std::size_t>(points));
        for (double& t : times) t = uniform(rng);
        std::sort(times.begin(), times.end());
        const double wick = dyson::wick_expectation(fv, alphas, times);
        const double oracle = single_mode_trace_oracle(energy, beta, g, times, n_max);
        const double rel_error =
            std::abs(wick - oracle) / std::max(std::abs(oracle), 1e-300);
        max_rel_error = std::max(max_rel_error, rel_error);
        cases.push_back(json{{"times", times},
                             {"wick", wick},
                             {"oracle", oracle},
                             {"rel_error", rel_error}});
    }
    ctx.timings.compute += seconds_since(start);

    const double tolerance = 1e-6;
    const bool passed = max_rel_error <= tolerance;
    json payload;
    payload["experiment"] = "wick-test";
    payload["points"] = points;
    payload["n_max"] = n_max;
    payload["cases"] = cases;
    payload["max_rel_error"] = max_rel_error;
    payload["tolerance"] = tolerance;
    payload["passed"] = passed;
    ctx.emit_json(".wick.json", payload);

    ctx.manifest["result"] = {{"max_rel_error", max_rel_error}, {"passed", passed}};
    ctx.result.summary = std::string("wick-test: ") + (passed ? "PASS" : "FAIL") +
                         ", max rel error=" + format_g6(max_rel_error) + " over " +
                         std::to_string(samples) + " samples";
}

void run_pc_probe(RunContext& ctx) {
    auto bundle = assemble_bundle(ctx.config, ctx.manifest, ctx.timings);
    const auto gamma = spectral::gamma0_matrix(bundle.spec);

    spectral::PCParameters params;
    const auto theta = get_optional_real(ctx.config, "pc.theta");
    if (theta) {
        const auto epsilon = get_optional_real(ctx.config, "pc.epsilon");
        if (!epsilon)
            throw config_error("pc.epsilon must be set when pc.theta is given");
        params.theta = *theta;
        params.epsilon = *epsilon;
        params.delta = get_optional_real(ctx.config, "pc.delta").value_or(0.0);
        params.nu = get_real(ctx.config, "pc.nu");
        params.e = get_real(ctx.config, "pc.e");
        params.t = get_real(ctx.config, "pc.t");
    } else {
        params = spectral::choose_pc_parameters(
            bundle.spec.lambda, get_real(ctx.config, "pc.nu"), get_real(ctx.config, "pc.e"),
            get_real(ctx.config, "pc.t"), gamma.gap);
    }
    const double window = get_real(ctx.config, "pc.window");

    const auto start = Clock::now();
    const auto report = spectral::pc_positivity_probe(bundle, params, window);
    ctx.timings.compute += seconds_since(start);

    json payload;
    payload["experiment"] = "pc-probe";
    payload["dim"] = bundle.L_lambda.dim;
    payload["min_quadratic_form"] = report.min_quadratic_form;
    payload["gap_prediction"] = report.gap_prediction;
    payload["gap_prediction_pc"] = report.gap_prediction_pc;
    payload["subspace_dim"] = report.subspace_dim;
    payload["kernel_n_expectation"] = report.kernel_n_expectation;
    payload["gamma0_gap"] = gamma.gap;
    payload["window"] = window;
    payload["params"] = {{"theta", params.theta}, {"epsilon", params.epsilon},
                         {"delta", params.delta}, {"nu", params.nu},
                         {"e", params.e},         {"t", params.t}};
    ctx.emit_json(".pc.json", payload);

    ctx.manifest["result"] = {{"min_quadratic_form", report.min_quadratic_form},
                              {"gap_prediction", report.gap_prediction},
                              {"subspace_dim", report.subspace_dim}};
    ctx.result.summary = "pc-probe: min quadratic form=" +
                         format_g6(report.min_quadratic_form) + " on subspace dim " +
                         std::to_string(report.subspace_dim) + ", prediction=" +
                         format_g6(report.gap_prediction);
}

std::string eigen_version_string() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
           "." + std::to_string(EIGEN_MINOR_VERSION);
}

} // namespace

Experiment experiment_from_name(const std::string& name) {
    const auto& names = experiment_name_table();
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return static_cast<Experiment>(k);
    std::string known;
    for (const auto& candidate : names) known += (known.empty() ? "" : ", ") + candidate;
    throw config_error("unknown experiment '" + name + "'; expected one of: " + known);
}

std::string experiment_name(Experiment experiment) {
    return experiment_name_table().at(static_cast<std::size_t>(experiment));
}

const std::vector<std::string>& experiment_names() { return experiment_name_table(); }

const std::vector<SchemaEntry>& config_schema() {
    static const std::vector<SchemaEntry> schema = build_schema();
    return schema;
}

RunConfig default_config(Experiment experiment) {
    RunConfig config;
    config.experiment = experiment;
    for (const auto& entry : config_schema()) config.values[entry.key] = entry.default_value;
    return config;
}

void apply_assignment(RunConfig& config, const std::string& key, const std::string& value,
                      const std::string& context) {
    const std::string trimmed_key = trim(key);
    const SchemaEntry* entry = find_entry(trimmed_key);
    if (entry == nullptr)
        throw config_error(context + ": unknown configuration key '" + trimmed_key + "'");
    config.values[trimmed_key] = check_lexical(*entry, value, context);
}

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::string line;
    std::string prefix;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        const std::string context = path + ":" + std::to_string(line_no);
        if (text.empty() || text.front() == '#' || text.front() == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3)
                throw config_error(context + ": malformed section header '" + text + "'");
            prefix = trim(text.substr(1, text.size() - 2));
            if (prefix.empty())
                throw config_error(context + ": empty section name");
            continue;
        }
        const auto equals = text.find('=');
        if (equals == std::string::npos)
            throw config_error(context + ": expected key = value, got '" + text + "'");
        std::string key = trim(text.substr(0, equals));
        if (key.empty()) throw config_error(context + ": empty key");
        if (!prefix.empty()) key = prefix + "." + key;
        apply_assignment(config, key, text.substr(equals + 1), context);
    }
}

RunResult run(const RunConfig& config) {
    const auto start = Clock::now();
    json manifest;
    manifest["schema_version"] = kOutputSchemaVersion;
    manifest["experiment"] = experiment_name(config.experiment);
    manifest["config"] = json(config.values);
    manifest["versions"] = {{"thermofield", kToolVersion},
                            {"eigen", eigen_version_string()},
                            {"compiler", __VERSION__}};
    manifest["seed"] = get_uint(config, "run.seed");

    RunResult result;
    Timings timings;
    RunContext ctx{config, manifest, timings, result, lookup(config, "run.output")};
    switch (config.experiment) {
        case Experiment::validate: run_validate(ctx); break;
        case Experiment::spectrum: run_spectrum(ctx); break;
        case Experiment::kms: run_kms(ctx); break;
        case Experiment::overlap_sweep: run_overlap_sweep(ctx); break;
        case Experiment::fgr: run_fgr(ctx); break;
        case Experiment::lso: run_lso(ctx); break;
        case Experiment::virial: run_virial(ctx); break;
        case Experiment::evolve: run_evolve(ctx); break;
        case Experiment::dyson_bound: run_dyson_bound(ctx); break;
        case Experiment::dyson_oracle: run_dyson_oracle(ctx); break;
        case Experiment::wick_test: run_wick_test(ctx); break;
        case Experiment::pc_probe: run_pc_probe(ctx); break;
    }

    manifest["timings_s"] = {{"assemble", timings.assemble},
                             {"compute", timings.compute},
                             {"total", seconds_since(start)}};
    manifest["outputs"] = result.outputs;
    const std::string manifest_path = ctx.prefix + ".manifest.json";
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    result.outputs.push_back(manifest_path);
    return result;
}

} // namespace tfld::cli
