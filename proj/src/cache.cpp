#include "thermofield/cache.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <zlib.h>

#include "thermofield/errors.hpp"

namespace tfld::cache {
namespace {

static_assert(std::endian::native == std::endian::little,
              "cache serialization assumes a little-endian host");

constexpr char kMagic[4] = {'T', 'F', 'L', 'D'};
constexpr const char* kMatrixNames[6] = {"L0", "I", "I_ell", "I1", "N", "L_lambda"};

std::uint32_t crc_bytes(std::uint32_t seed, const void* data, std::size_t size) {
    return static_cast<std::uint32_t>(
        ::crc32(seed, static_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

void put_bytes(std::string& out, const void* data, std::size_t size) {
    out.append(static_cast<const char*>(data), size);
}

template <typename T>
void put(std::string& out, T value) {
    put_bytes(out, &value, sizeof value);
}

struct Reader {
    const std::string& buffer;
    std::size_t pos{0};
    bool failed{false};

    template <typename T>
    T get() {
        T value{};
        if (pos + sizeof value > buffer.size()) {
            failed = true;
            return value;
        }
        std::memcpy(&value, buffer.data() + pos, sizeof value);
        pos += sizeof value;
        return value;
    }

    bool take(void* dest, std::size_t size) {
        if (pos + size > buffer.size()) {
            failed = true;
            return false;
        }
        std::memcpy(dest, buffer.data() + pos, size);
        pos += size;
        return true;
    }
};

std::string format_g17(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

const OperatorMatrix* bundle_matrix(const liouvillian::LiouvillianBundle& bundle,
                                    int index) {
    switch (index) {
        case 0: return &bundle.L0;
        case 1: return &bundle.I;
        case 2: return &bundle.I_ell;
        case 3: return &bundle.I1;
        case 4: return &bundle.N;
        default: return &bundle.L_lambda;
    }
}

void append_matrix(std::string& out, const char* name, const OperatorMatrix& op) {
    SparseCd m = op.entries;
    m.makeCompressed();
    const std::uint32_t name_len = static_cast<std::uint32_t>(std::strlen(name));
    put(out, name_len);
    put_bytes(out, name, name_len);
    put(out, static_cast<std::uint64_t>(m.rows()));
    put(out, static_cast<std::uint64_t>(m.cols()));
    const std::uint64_t nnz = static_cast<std::uint64_t>(m.nonZeros());
    put(out, nnz);
    put(out, static_cast<std::uint8_t>(op.hermitian_flag ? 1 : 0));
    for (Eigen::Index r = 0; r <= m.rows(); ++r)
        put(out, static_cast<std::int64_t>(m.outerIndexPtr()[r]));
    for (std::uint64_t k = 0; k < nnz; ++k)
        put(out, static_cast<std::int64_t>(m.innerIndexPtr()[k]));
    put_bytes(out, m.valuePtr(), nnz * sizeof(std::complex<double>));
}

bool read_matrix(Reader& reader, const char* expected_name, std::size_t expected_dim,
                 OperatorMatrix& op, std::string& detail) {
    const std::uint32_t name_len = reader.get<std::uint32_t>();
    if (reader.failed || name_len > 64) {
        detail = "truncated matrix record";
        return false;
    }
    std::string name(name_len, '\0');
    if (!reader.take(name.data(), name_len)) {
        detail = "truncated matrix name";
        return false;
    }
    if (name != expected_name) {
        detail = "matrix record '" + name + "' where '" + expected_name +
                 "' was expected";
        return false;
    }
    const std::uint64_t rows = reader.get<std::uint64_t>();
    const std::uint64_t cols = reader.get<std::uint64_t>();
    const std::uint64_t nnz = reader.get<std::uint64_t>();
    const std::uint8_t hermitian = reader.get<std::uint8_t>();
    if (reader.failed) {
        detail = "truncated matrix header";
        return false;
    }
    if (rows != expected_dim || cols != expected_dim) {
        detail = "matrix '" + name + "' has dimension " + std::to_string(rows) + "x" +
                 std::to_string(cols) + ", expected " + std::to_string(expected_dim);
        return false;
    }
    SparseCd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.makeCompressed();
    m.resizeNonZeros(static_cast<Eigen::Index>(nnz));
    for (std::uint64_t r = 0; r <= rows; ++r) {
        const std::int64_t entry = reader.get<std::int64_t>();
        if (entry < 0 || static_cast<std::uint64_t>(entry) > nnz) {
            detail = "outer index out of range in matrix '" + name + "'";
            return false;
        }
        m.outerIndexPtr()[r] = static_cast<SparseCd::StorageIndex>(entry);
    }
    for (std::uint64_t k = 0; k < nnz; ++k) {
        const std::int64_t entry = reader.get<std::int64_t>();
        if (entry < 0 || static_cast<std::uint64_t>(entry) >= cols) {
            detail = "inner index out of range in matrix '" + name + "'";
            return false;
        }
        m.innerIndexPtr()[k] = static_cast<SparseCd::StorageIndex>(entry);
    }
    if (!reader.take(m.valuePtr(), nnz * sizeof(std::complex<double>))) {
        detail = "truncated matrix values";
        return false;
    }
    if (reader.failed) {
        detail = "truncated matrix payload";
        return false;
    }
    op.dim = expected_dim;
    op.entries = std::move(m);
    op.hermitian_flag = hermitian != 0;
    return true;
}

bool matrices_bitwise_equal(const OperatorMatrix& a, const OperatorMatrix& b) {
    SparseCd ma = a.entries;
    SparseCd mb = b.entries;
    ma.makeCompressed();
    mb.makeCompressed();
    if (a.hermitian_flag != b.hermitian_flag) return false;
    if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) return false;
    if (ma.nonZeros() != mb.nonZeros()) return false;
    const std::size_t outer_bytes =
        static_cast<std::size_t>(ma.rows() + 1) * sizeof(SparseCd::StorageIndex);
    const std::size_t inner_bytes =
        static_cast<std::size_t>(ma.nonZeros()) * sizeof(SparseCd::StorageIndex);
    const std::size_t value_bytes =
        static_cast<std::size_t>(ma.nonZeros()) * sizeof(std::complex<double>);
    return std::memcmp(ma.outerIndexPtr(), mb.outerIndexPtr(), outer_bytes) == 0 &&
           std::memcmp(ma.innerIndexPtr(), mb.innerIndexPtr(), inner_bytes) == 0 &&
           std::memcmp(ma.valuePtr(), mb.valuePtr(), value_bytes) == 0;
}

void append_spec_description(std::string& text, const model::ModelSpec& spec) {
    text += "d=" + std::to_string(spec.atom.dim) + ";E=";
    for (double e : spec.atom.energies) text += format_g17(e) + ",";
    text += ";beta=" + format_g17(spec.beta) + ";lambda=" + format_g17(spec.lambda);
    text += ";phi=" + format_g17(spec.glue_phase());
    for (const auto& coupling : spec.couplings) {
        text += ";ff=" + format_g17(coupling.ff.p) + "," +
                format_g17(coupling.ff.amplitude) + "," + format_g17(coupling.ff.cutoff) +
                "," + format_g17(coupling.ff.tilt) + "," + format_g17(coupling.ff.phase0) +
                "," + format_g17(coupling.ff.angular_factor) + ";G=";
        for (Eigen::Index r = 0; r < coupling.G.rows(); ++r)
            for (Eigen::Index c = 0; c < coupling.G.cols(); ++c)
                text += format_g17(coupling.G(r, c).real()) + "," +
                        format_g17(coupling.G(r, c).imag()) + ",";
    }
}

} // namespace

std::uint32_t grid_hash(const fock::BathGrid& grid, int n_total_max) {
    std::string text = "n_max=" + std::to_string(n_total_max) + ";modes=";
    for (double u : grid.modes) text += format_g17(u) + ",";
    text += ";weights=";
    for (double w : grid.weights) text += format_g17(w) + ",";
    return crc_bytes(0, text.data(), text.size());
}

std::string bundle_key(const model::ModelSpec& spec, const fock::BathGrid& grid,
                       int n_total_max) {
    std::string text;
    append_spec_description(text, spec);
    text += ";grid=" + std::to_string(grid_hash(grid, n_total_max));
    const std::uint32_t low = crc_bytes(0, text.data(), text.size());
    const std::uint32_t high = crc_bytes(0x9e3779b9u, text.data(), text.size());
    char buffer[20];
    std::snprintf(buffer, sizeof buffer, "%08x%08x", high, low);
    return buffer;
}

std::optional<std::string> cache_directory() {
    const char* dir = std::getenv(kCacheDirVariable);
    if (dir == nullptr || dir[0] == '\0') return std::nullopt;
    return std::string(dir);
}

void save_bundle(const liouvillian::LiouvillianBundle& bundle, const std::string& path) {
    std::string payload;
    put(payload, kFormatVersion);
    put(payload, static_cast<std::uint32_t>(bundle.spec.atom.dim));
    put(payload, static_cast<std::uint64_t>(bundle.basis.dim()));
    put(payload, bundle.spec.beta);
    put(payload, bundle.spec.lambda);
    put(payload, grid_hash(bundle.grid, bundle.basis.n_total_max));
    put(payload, static_cast<std::uint32_t>(6));
    for (int k = 0; k < 6; ++k)
        append_matrix(payload, kMatrixNames[k], *bundle_matrix(bundle, k));
    const std::uint32_t checksum = crc_bytes(0, payload.data(), payload.size());

    const std::string temp_path = path + ".tmp";
    {
        std::ofstream out(temp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open cache file for writing: " + temp_path);
        out.write(kMagic, sizeof kMagic);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        out.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
        if (!out) throw config_error("cache write failed: " + temp_path);
    }
    std::error_code ec;
    std::filesystem::rename(temp_path, path, ec);
    if (ec) throw config_error("cache rename failed: " + path + " (" + ec.message() + ")");
}

CacheProbe try_load_bundle(const std::string& path, const model::ModelSpec& spec,
                           const fock::FockBasis& basis, const fock::BathGrid& grid) {
    CacheProbe probe;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        probe.status = CacheProbe::Status::missing;
        probe.detail = "no cache file at " + path;
        return probe;
    }
    std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::size_t min_size = sizeof kMagic + sizeof(std::uint32_t);
    if (file.size() < min_size || std::memcmp(file.data(), kMagic, sizeof kMagic) != 0) {
        probe.status = CacheProbe::Status::corrupt;
        probe.detail = "cache file lacks the TFLD magic: " + path;
        return probe;
    }
    std::uint32_t stored_checksum = 0;
    std::memcpy(&stored_checksum, file.data() + file.size() - sizeof stored_checksum,
                sizeof stored_checksum);
    const std::string payload =
        file.substr(sizeof kMagic, file.size() - sizeof kMagic - sizeof stored_checksum);
    const std::uint32_t computed = crc_bytes(0, payload.data(), payload.size());
    if (computed != stored_checksum) {
        char buffer[96];
        std::snprintf(buffer, sizeof buffer,
                      "cache checksum mismatch: stored %08x, computed %08x",
                      stored_checksum, computed);
        probe.status = CacheProbe::Status::corrupt;
        probe.detail = std::string(buffer) + " (" + path + ")";
        return probe;
    }

    Reader reader{payload};
    const std::uint32_t version = reader.get<std::uint32_t>();
    if (version != kFormatVersion) {
        probe.status = CacheProbe::Status::version_mismatch;
        probe.detail = "cache format version " + std::to_string(version) +
                       " does not match the supported version " +
                       std::to_string(kFormatVersion) + "; regenerate " + path;
        return probe;
    }
    const std::uint32_t atom_dim = reader.get<std::uint32_t>();
    const std::uint64_t fock_dim = reader.get<std::uint64_t>();
    const double beta = reader.get<double>();
    const double lambda = reader.get<double>();
    const std::uint32_t stored_grid = reader.get<std::uint32_t>();
    const std::uint32_t matrix_count = reader.get<std::uint32_t>();
    if (reader.failed) {
        probe.status = CacheProbe::Status::corrupt;
        probe.detail = "truncated cache header: " + path;
        return probe;
    }

    const auto key_mismatch = [&](const std::string& field) {
        probe.status = CacheProbe::Status::key_mismatch;
        probe.detail = "cache key mismatch on " + field + ": " + path;
        return probe;
    };
    if (atom_dim != static_cast<std::uint32_t>(spec.atom.dim)) return key_mismatch("atom dimension");
    if (fock_dim != basis.dim()) return key_mismatch("Fock dimension");
    if (beta != spec.beta) return key_mismatch("beta");
    if (lambda != spec.lambda) return key_mismatch("lambda");
    if (stored_grid != grid_hash(grid, basis.n_total_max)) return key_mismatch("grid hash");
    if (matrix_count != 6) {
        probe.status = CacheProbe::Status::corrupt;
        probe.detail = "cache holds " + std::to_string(matrix_count) +
                       " matrices, expected 6: " + path;
        return probe;
    }

    const std::size_t dim = static_cast<std::size_t>(atom_dim) * atom_dim * fock_dim;
    liouvillian::LiouvillianBundle bundle;
    bundle.spec = spec;
    bundle.basis = basis;
    bundle.grid = grid;
    OperatorMatrix* slots[6] = {&bundle.L0,  &bundle.I, &bundle.I_ell,
                                &bundle.I1, &bundle.N, &bundle.L_lambda};
    for (int k = 0; k < 6; ++k) {
        std::string detail;
        if (!read_matrix(reader, kMatrixNames[k], dim, *slots[k], detail)) {
            probe.status = CacheProbe::Status::corrupt;
            probe.detail = detail + " (" + path + ")";
            return probe;
        }
    }
    if (reader.pos != payload.size()) {
        probe.status = CacheProbe::Status::corrupt;
        probe.detail = "trailing bytes after the matrix payload: " + path;
        return probe;
    }
    probe.status = CacheProbe::Status::loaded;
    probe.bundle = std::move(bundle);
    return probe;
}

bool cache_roundtrip(const liouvillian::LiouvillianBundle& bundle,
                     const std::string& path) {
    if (!std::filesystem::exists(path)) save_bundle(bundle, path);
    const CacheProbe probe =
        try_load_bundle(path, bundle.spec, bundle.basis, bundle.grid);
    if (probe.status != CacheProbe::Status::loaded) {
        std::fprintf(stderr, "cache roundtrip: %s\n", probe.detail.c_str());
        return false;
    }
    for (int k = 0; k < 6; ++k) {
        if (!matrices_bitwise_equal(*bundle_matrix(bundle, k),
                                    *bundle_matrix(*probe.bundle, k))) {
            std::fprintf(stderr, "cache roundtrip: matrix %s differs after reload (%s)\n",
                         kMatrixNames[k], path.c_str());
            return false;
        }
    }
    return true;
}

liouvillian::LiouvillianBundle assemble_cached(const model::ModelSpec& spec,
                                               const fock::FockBasis& basis,
                                               const fock::BathGrid& grid,
                                               std::string* status_out) {
    const auto set_status = [&](const char* status) {
        if (status_out != nullptr) *status_out = status;
    };
    const auto dir = cache_directory();
    if (!dir) {
        set_status("disabled");
        return liouvillian::assemble(spec, basis, grid);
    }
    std::filesystem::create_directories(*dir);
    const std::string path =
        *dir + "/tfld_" + bundle_key(spec, grid, basis.n_total_max) + ".cache";

    CacheProbe probe = try_load_bundle(path, spec, basis, grid);
    switch (probe.status) {
        case CacheProbe::Status::loaded:
            set_status("hit");
            return std::move(*probe.bundle);
        case CacheProbe::Status::version_mismatch:
            throw config_error(probe.detail);
        case CacheProbe::Status::corrupt:
            std::fprintf(stderr, "cache: %s; rebuilding\n", probe.detail.c_str());
            break;
        case CacheProbe::Status::missing:
        case CacheProbe::Status::key_mismatch:
            break;
    }
    liouvillian::LiouvillianBundle bundle = liouvillian::assemble(spec, basis, grid);
    save_bundle(bundle, path);
    set_status(probe.status == CacheProbe::Status::missing ? "saved" : "rebuilt");
    return bundle;
}

} // namespace tfld::cache
