#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mf/espectrum.hpp"
#include "mf/observables.hpp"

namespace mf {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Run metadata repeated at the top of every output file.
struct Provenance {
    int dim = 0;
    int length = 0;
    double gamma = 0;
    double dt = 0;
    std::string geometry;
    std::uint64_t seed = 0;
    std::string config_hash;

    std::string header() const;  // '#'-prefixed key=value lines
};

void write_series_csv(const std::filesystem::path& path, const ObservableSeries& series,
                      const Provenance& prov);

/// Flat table (trajectory, t, alpha, eps, saturated).
void write_spectra_csv(const std::filesystem::path& path,
                       const std::vector<EntanglementSpectrum>& spectra, const Provenance& prov);
std::vector<EntanglementSpectrum> read_spectra_csv(const std::filesystem::path& path);

/// Eigenfunction probability blocks |psi_a(l)|^2, fixed little-endian binary:
/// magic "MFEV", u32 count, then per spectrum u64 trajectory, f64 t, u32 m,
/// m f64 energies, m*m f64 amplitudes (column-major).
void write_amplitudes_bin(const std::filesystem::path& path,
                          const std::vector<EntanglementSpectrum>& spectra);
std::vector<EntanglementSpectrum> read_amplitudes_bin(const std::filesystem::path& path);

/// Flat key = value configuration with [section] headers; keys are stored
/// as "section.key". '#' starts a comment.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::filesystem::path& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;  // comma separated
    std::vector<std::string> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    /// Order-independent content hash, hex.
    std::string hash() const;

  private:
    std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a_file(const std::filesystem::path& path);

/// Writes manifest.json listing every output file with its checksum.
void write_manifest(const std::filesystem::path& dir, const std::string& config_hash,
                    std::uint64_t master_seed, const std::vector<std::filesystem::path>& files,
                    bool complete);
bool manifest_complete(const std::filesystem::path& dir);

}  // namespace mf
