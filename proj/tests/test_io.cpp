#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mf/espectrum.hpp"
#include "mf/io.hpp"

using namespace mf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mf_io_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

EntanglementSpectrum random_spectrum(std::uint64_t traj, double t, long m, unsigned seed,
                                     bool with_amps) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    EntanglementSpectrum s;
    s.trajectory_id = traj;
    s.time = t;
    s.energies.resize(m);
    for (long a = 0; a < m; ++a) s.energies(a) = u(rng);
    std::sort(s.energies.begin(), s.energies.end());
    s.occupations.resize(m);
    for (long a = 0; a < m; ++a) s.occupations(a) = 1.0 / (std::exp(s.energies(a)) + 1.0);
    s.saturated.assign(m, false);
    if (with_amps) {
        s.amplitudes.resize(m, m);
        std::uniform_real_distribution<double> v(0.01, 1.0);
        for (long j = 0; j < m; ++j) {
            for (long i = 0; i < m; ++i) s.amplitudes(i, j) = v(rng);
            s.amplitudes.col(j) /= s.amplitudes.col(j).sum();
        }
    }
    return s;
}

Provenance test_prov() {
    Provenance p;
    p.dim = 2;
    p.length = 16;
    p.gamma = 5.2;
    p.dt = 0.05;
    p.geometry = "checkerboard";
    p.seed = 99;
    p.config_hash = "deadbeef";
    return p;
}

}  // namespace

TEST_CASE("provenance header carries the run metadata") {
    const std::string h = test_prov().header();
    CHECK(h.find("# L=16") != std::string::npos);
    CHECK(h.find("# gamma=5.2") != std::string::npos);
    CHECK(h.find("# geometry=checkerboard") != std::string::npos);
    CHECK(h.find("# config_hash=deadbeef") != std::string::npos);
    for (size_t pos = 0; pos < h.size(); pos = h.find('\n', pos) + 1)
        CHECK(h[pos] == '#');
}

TEST_CASE("series csv round trip by eye") {
    TempDir tmp;
    ObservableSeries s;
    s.abscissa = "gamma";
    s.points = {{4.8, 0.51, 0.002, 120}, {5.2, 0.44, 0.003, 120}};
    const auto path = tmp.path / "series.csv";
    write_series_csv(path, s, test_prov());
    std::ifstream f(path);
    std::string line;
    int data_rows = 0;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.rfind("gamma,mean,stderr,n_samples", 0) == 0) header_seen = true;
        else if (!line.empty() && line[0] != '#') ++data_rows;
    }
    CHECK(header_seen);
    CHECK(data_rows == 2);
}

TEST_CASE("spectra csv round trip") {
    TempDir tmp;
    std::vector<EntanglementSpectrum> spectra;
    spectra.push_back(random_spectrum(0, 64.0, 9, 1, false));
    spectra.push_back(random_spectrum(1, 64.0, 9, 2, false));
    spectra[1].saturated[0] = true;
    const auto path = tmp.path / "spectra.csv";
    write_spectra_csv(path, spectra, test_prov());
    const auto back = read_spectra_csv(path);
    REQUIRE(back.size() == 2);
    for (size_t k = 0; k < 2; ++k) {
        CHECK(back[k].trajectory_id == spectra[k].trajectory_id);
        CHECK(back[k].time == doctest::Approx(spectra[k].time));
        REQUIRE(back[k].size() == spectra[k].size());
        for (long a = 0; a < back[k].size(); ++a) {
            CHECK(back[k].energies(a) == doctest::Approx(spectra[k].energies(a)).epsilon(1e-15));
            CHECK(back[k].saturated[a] == spectra[k].saturated[a]);
        }
    }
}

TEST_CASE("amplitude binary round trip is exact") {
    TempDir tmp;
    std::vector<EntanglementSpectrum> spectra;
    spectra.push_back(random_spectrum(3, 80.0, 7, 5, true));
    spectra.push_back(random_spectrum(4, 80.0, 7, 6, true));
    const auto path = tmp.path / "amps.bin";
    write_amplitudes_bin(path, spectra);
    const auto back = read_amplitudes_bin(path);
    REQUIRE(back.size() == 2);
    for (size_t k = 0; k < 2; ++k) {
        CHECK(back[k].trajectory_id == spectra[k].trajectory_id);
        CHECK((back[k].energies - spectra[k].energies).norm() == 0.0);
        CHECK((back[k].amplitudes - spectra[k].amplitudes).norm() == 0.0);
    }
    // missing amplitudes refuse to serialize
    std::vector<EntanglementSpectrum> bare{random_spectrum(0, 1.0, 5, 9, false)};
    CHECK_THROWS(write_amplitudes_bin(tmp.path / "bad.bin", bare));
    CHECK_THROWS(read_amplitudes_bin(tmp.path / "missing.bin"));
}

TEST_CASE("key=value config parsing") {
    const std::string text =
        "# run configuration\n"
        "[lattice]\n"
        "d = 2\n"
        "L = 16   # linear size\n"
        "[evolution]\n"
        "gamma_list = 4.8, 5.0, 5.2\n"
        "dt = 0.05\n"
        "seed = 12345\n"
        "init = neel\n";
    const auto cfg = KeyValueConfig::parse_string(text);
    CHECK(cfg.get_long("lattice.d", 0) == 2);
    CHECK(cfg.get_long("lattice.L", 0) == 16);
    CHECK(cfg.get_double("evolution.dt", 0) == doctest::Approx(0.05));
    CHECK(cfg.get("evolution.init", "") == "neel");
    CHECK(cfg.get("evolution.missing", "fallback") == "fallback");
    CHECK(cfg.has("evolution.seed"));
    CHECK(!cfg.has("seed"));
    const auto gammas = cfg.get_double_list("evolution.gamma_list");
    REQUIRE(gammas.size() == 3);
    CHECK(gammas[1] == doctest::Approx(5.0));
    CHECK_THROWS(KeyValueConfig::parse_string("just a bare line\n"));
}

TEST_CASE("config hash is content-defined and order-independent") {
    const auto a = KeyValueConfig::parse_string("x = 1\ny = 2\n");
    const auto b = KeyValueConfig::parse_string("y = 2\nx = 1\n");
    const auto c = KeyValueConfig::parse_string("x = 1\ny = 3\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    CHECK(a.hash().size() == 16);
}

TEST_CASE("manifest lifecycle") {
    TempDir tmp;
    const auto data = tmp.path / "out.csv";
    {
        std::ofstream f(data);
        f << "payload\n";
    }
    CHECK(!manifest_complete(tmp.path));
    write_manifest(tmp.path, "cafe", 7, {data}, false);
    CHECK(!manifest_complete(tmp.path));
    write_manifest(tmp.path, "cafe", 7, {data}, true);
    CHECK(manifest_complete(tmp.path));
    // checksum helper is stable
    CHECK(fnv1a_file(data) == fnv1a_file(data));
}
