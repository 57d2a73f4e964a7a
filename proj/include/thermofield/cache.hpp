// cache.hpp: binary on-disk cache for assembled operator bundles, keyed by the
// model, grid and truncation data; versioned, checksummed, bit-exact round trips.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "thermofield/liouvillian.hpp"

namespace tfld::cache {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr char kCacheDirVariable[] = "THERMOFIELD_CACHE_DIR";

// CRC32 of the grid modes and weights together with the truncation level.
std::uint32_t grid_hash(const fock::BathGrid& grid, int n_total_max);

// Hex key of everything that determines the assembled matrices: atom energies,
// coupling data, beta, lambda, glue phase, grid modes and weights, truncation.
std::string bundle_key(const model::ModelSpec& spec, const fock::BathGrid& grid,
                       int n_total_max);

// Cache directory from the environment; unset means caching is disabled.
std::optional<std::string> cache_directory();

// Serializes the six assembled operators behind a header (magic, format version,
// dimensions, beta, lambda, grid hash) with a trailing CRC32 of the payload.
// Index words are 8 bytes, matrix entries 16-byte complex, all little-endian.
// Writes through a temporary file and renames into place.
void save_bundle(const liouvillian::LiouvillianBundle& bundle, const std::string& path);

struct CacheProbe {
    enum class Status { loaded, missing, key_mismatch, version_mismatch, corrupt };
    Status status{Status::missing};
    std::string detail;
    std::optional<liouvillian::LiouvillianBundle> bundle;
};

// Reads a cache file and rebuilds the operator bundle over the given spec, basis
// and grid. Bad files never throw: the status names the failure class and the
// detail carries the diagnostic (stored vs computed checksum, version numbers,
// the header field that disagreed).
CacheProbe try_load_bundle(const std::string& path, const model::ModelSpec& spec,
                           const fock::FockBasis& basis, const fock::BathGrid& grid);

// Saves the bundle to path when no file is there yet, loads the file back and
// compares every dimension, index and entry bitwise. Returns false with the
// diagnostic on stderr for checksum, version, key or content mismatches.
bool cache_roundtrip(const liouvillian::LiouvillianBundle& bundle,
                     const std::string& path);

// Assembly with transparent caching: a verifying cache file for this key is
// loaded instead of assembling, otherwise the bundle is built and the cache
// refreshed. A version mismatch raises a config error naming both versions
// instead of silently rebuilding; a corrupt file is rebuilt with a warning.
// status_out (when given) receives one of disabled/hit/saved/rebuilt.
liouvillian::LiouvillianBundle assemble_cached(const model::ModelSpec& spec,
                                               const fock::FockBasis& basis,
                                               const fock::BathGrid& grid,
                                               std::string* status_out = nullptr);

} // namespace tfld::cache
