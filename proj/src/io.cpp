#include "mf/io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mf {

namespace {

std::uint64_t fnv1a(const char* data, size_t n, std::uint64_t h = 1469598103934665603ull) {
    for (size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

}  // namespace

std::string Provenance::header() const {
    std::ostringstream os;
    os << "# d=" << dim << "\n# L=" << length << "\n# gamma=" << gamma << "\n# dt=" << dt
       << "\n# geometry=" << geometry << "\n# seed=" << seed << "\n# version=" << kCodeVersion
       << "\n# config_hash=" << config_hash << "\n";
    return os.str();
}

void write_series_csv(const std::filesystem::path& path, const ObservableSeries& series,
                      const Provenance& prov) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << prov.header();
    f << series.abscissa << ",mean,stderr,n_samples\n";
    f << std::setprecision(17);
    for (const auto& p : series.points)
        f << p.x << ',' << p.mean << ',' << p.stderr_ << ',' << p.count << '\n';
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_spectra_csv(const std::filesystem::path& path,
                       const std::vector<EntanglementSpectrum>& spectra, const Provenance& prov) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << prov.header();
    f << "trajectory,t,alpha,eps,saturated\n";
    f << std::setprecision(17);
    for (const auto& spec : spectra)
        for (long a = 0; a < spec.size(); ++a)
            f << spec.trajectory_id << ',' << spec.time << ',' << a << ',' << spec.energies(a)
              << ',' << (spec.saturated[a] ? 1 : 0) << '\n';
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EntanglementSpectrum> read_spectra_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    struct Key {
        std::uint64_t traj;
        double t;
        bool operator<(const Key& o) const { return traj != o.traj ? traj < o.traj : t < o.t; }
    };
    std::map<Key, std::vector<std::pair<double, bool>>> groups;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::istringstream is(line);
        std::uint64_t traj;
        double t, eps;
        long alpha;
        int sat;
        char c;
        if (!(is >> traj >> c >> t >> c >> alpha >> c >> eps >> c >> sat)) continue;
        groups[{traj, t}].emplace_back(eps, sat != 0);
    }
    std::vector<EntanglementSpectrum> out;
    for (auto& [key, levels] : groups) {
        EntanglementSpectrum spec;
        spec.trajectory_id = key.traj;
        spec.time = key.t;
        const long m = static_cast<long>(levels.size());
        spec.energies.resize(m);
        spec.occupations.resize(m);
        spec.saturated.resize(m);
        for (long a = 0; a < m; ++a) {
            spec.energies(a) = levels[a].first;
            spec.occupations(a) = 1.0 / (std::exp(levels[a].first) + 1.0);
            spec.saturated[a] = levels[a].second;
        }
        out.push_back(std::move(spec));
    }
    return out;
}

void write_amplitudes_bin(const std::filesystem::path& path,
                          const std::vector<EntanglementSpectrum>& spectra) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f.write("MFEV", 4);
    const std::uint32_t count = static_cast<std::uint32_t>(spectra.size());
    f.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& spec : spectra) {
        if (spec.amplitudes.size() == 0) throw std::invalid_argument("spectrum has no amplitude block");
        const std::uint64_t traj = spec.trajectory_id;
        const double t = spec.time;
        const std::uint32_t m = static_cast<std::uint32_t>(spec.size());
        f.write(reinterpret_cast<const char*>(&traj), 8);
        f.write(reinterpret_cast<const char*>(&t), 8);
        f.write(reinterpret_cast<const char*>(&m), 4);
        f.write(reinterpret_cast<const char*>(spec.energies.data()), 8l * m);
        f.write(reinterpret_cast<const char*>(spec.amplitudes.data()), 8l * m * m);
    }
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EntanglementSpectrum> read_amplitudes_bin(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (std::string(magic, 4) != "MFEV") throw std::runtime_error("bad amplitude file: " + path.string());
    std::uint32_t count;
    f.read(reinterpret_cast<char*>(&count), 4);
    std::vector<EntanglementSpectrum> out(count);
    for (auto& spec : out) {
        std::uint64_t traj;
        double t;
        std::uint32_t m;
        f.read(reinterpret_cast<char*>(&traj), 8);
        f.read(reinterpret_cast<char*>(&t), 8);
        f.read(reinterpret_cast<char*>(&m), 4);
        spec.trajectory_id = traj;
        spec.time = t;
        spec.energies.resize(m);
        spec.amplitudes.resize(m, m);
        f.read(reinterpret_cast<char*>(spec.energies.data()), 8l * m);
        f.read(reinterpret_cast<char*>(spec.amplitudes.data()), 8l * m * m);
        spec.occupations.resize(m);
        spec.saturated.resize(m);
        static const double eps_max = std::log((1.0 - kSaturationClamp) / kSaturationClamp);
        for (std::uint32_t a = 0; a < m; ++a) {
            spec.occupations(a) = 1.0 / (std::exp(spec.energies(a)) + 1.0);
            spec.saturated[a] = std::abs(spec.energies(a)) >= eps_max - 1e-9;
        }
        if (!f) throw std::runtime_error("truncated amplitude file: " + path.string());
    }
    return out;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad config line: " + line);
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stod(it->second);
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stol(it->second);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream is(get(key, ""));
    std::string item;
    while (std::getline(is, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) out.push_back(std::stod(s));
    return out;
}

std::string KeyValueConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [k, v] : values_) {
        h = fnv1a(k.data(), k.size(), h);
        h = fnv1a("=", 1, h);
        h = fnv1a(v.data(), v.size(), h);
        h = fnv1a("\n", 1, h);
    }
    return hex64(h);
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0)
        h = fnv1a(buf, static_cast<size_t>(f.gcount()), h);
    return h;
}

void write_manifest(const std::filesystem::path& dir, const std::string& config_hash,
                    std::uint64_t master_seed, const std::vector<std::filesystem::path>& files,
                    bool complete) {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["master_seed"] = master_seed;
    j["version"] = kCodeVersion;
    j["complete"] = complete;
    j["files"] = nlohmann::json::array();
    for (const auto& f : files) {
        nlohmann::json entry;
        entry["name"] = f.filename().string();
        entry["checksum"] = hex64(fnv1a_file(f));
        j["files"].push_back(entry);
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
}

bool manifest_complete(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) return false;
    nlohmann::json j;
    in >> j;
    return j.value("complete", false);
}

}  // namespace mf
