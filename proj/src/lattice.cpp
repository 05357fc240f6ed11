#include "mf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mf {

Lattice Lattice::make(int dim, int length) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
    if (length < 2 || length % 2 != 0) throw std::invalid_argument("lattice size must be even and >= 2");
    // L=2 in d>=2 would create doubled bonds under the periodic wrap.
    if (dim >= 2 && length < 4) throw std::invalid_argument("lattice size must be >= 4 for dim >= 2");
    Lattice lat;
    lat.dim = dim;
    lat.length = length;
    lat.sites = 1;
    for (int i = 0; i < dim; ++i) lat.sites *= length;
    return lat;
}

std::array<int, 3> Lattice::coords(long site) const {
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
        c[i] = static_cast<int>(site % length);
        site /= length;
    }
    return c;
}

long Lattice::site_at(const std::array<int, 3>& c) const {
    long s = 0;
    for (int i = dim - 1; i >= 0; --i) {
        int x = ((c[i] % length) + length) % length;
        s = s * length + x;
    }
    return s;
}

std::vector<long> Lattice::neighbours(long site) const {
    std::vector<long> out;
    out.reserve(2 * dim);
    auto c = coords(site);
    for (int i = 0; i < dim; ++i) {
        for (int step : {-1, +1}) {
            auto n = c;
            n[i] = ((n[i] + step) % length + length) % length;
            out.push_back(site_at(n));
        }
    }
    return out;
}

Eigen::MatrixXd Lattice::hopping_matrix() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(sites, sites);
    for (long s = 0; s < sites; ++s)
        for (long n : neighbours(s)) h(s, n) = -1.0;
    return h;
}

double Lattice::hopping_eigenvalue(const std::array<int, 3>& k) const {
    double e = 0.0;
    for (int i = 0; i < dim; ++i)
        e += -2.0 * std::cos(2.0 * std::numbers::pi * k[i] / length);
    return e;
}

std::string Lattice::descriptor() const {
    std::ostringstream os;
    os << "lattice d=" << dim << " L=" << length << " boundary=periodic";
    return os.str();
}

std::string geometry_name(Geometry g) {
    switch (g) {
        case Geometry::strip: return "strip";
        case Geometry::half_cut: return "half_cut";
        case Geometry::checkerboard: return "checkerboard";
        case Geometry::custom: return "custom";
    }
    return "custom";
}

Geometry geometry_from_name(const std::string& name) {
    if (name == "strip") return Geometry::strip;
    if (name == "half_cut") return Geometry::half_cut;
    if (name == "checkerboard") return Geometry::checkerboard;
    if (name == "custom") return Geometry::custom;
    throw std::invalid_argument("unknown geometry: " + name);
}

std::string SubsystemMask::descriptor() const {
    std::ostringstream os;
    os << "geometry=" << geometry_name(geometry);
    if (geometry == Geometry::strip) os << " width=" << strip_width;
    os << " sites=" << sites.size();
    return os.str();
}

static void validate_mask(const Lattice& lat, const std::vector<long>& sites) {
    if (sites.empty()) throw std::invalid_argument("empty mask");
    for (size_t i = 0; i < sites.size(); ++i) {
        if (sites[i] < 0 || sites[i] >= lat.sites)
            throw std::invalid_argument("mask site out of range");
        if (i > 0 && sites[i] <= sites[i - 1])
            throw std::invalid_argument("mask sites must be strictly increasing");
    }
}

SubsystemMask make_strip_mask(const Lattice& lat, int width) {
    if (width < 1 || width >= lat.length)
        throw std::invalid_argument("strip width must be in [1, L-1]");
    SubsystemMask m;
    m.geometry = Geometry::strip;
    m.strip_width = width;
    // Hyperplanes of constant last coordinate; in 1D a segment of `width` sites.
    long plane = lat.sites / lat.length;
    for (long s = 0; s < lat.sites; ++s) {
        long last = s / plane;
        if (last < width) m.sites.push_back(s);
    }
    validate_mask(lat, m.sites);
    return m;
}

SubsystemMask make_half_cut_mask(const Lattice& lat) {
    SubsystemMask m = make_strip_mask(lat, lat.length / 2);
    m.geometry = Geometry::half_cut;
    return m;
}

SubsystemMask make_checkerboard_mask(const Lattice& lat) {
    SubsystemMask m;
    m.geometry = Geometry::checkerboard;
    for (long s = 0; s < lat.sites; ++s) {
        auto c = lat.coords(s);
        int parity = 0;
        for (int i = 0; i < lat.dim; ++i) parity += c[i];
        if (parity % 2 == 1) m.sites.push_back(s);
    }
    validate_mask(lat, m.sites);
    return m;
}

SubsystemMask make_custom_mask(const Lattice& lat, std::vector<long> sites) {
    std::sort(sites.begin(), sites.end());
    validate_mask(lat, sites);
    SubsystemMask m;
    m.geometry = Geometry::custom;
    m.sites = std::move(sites);
    return m;
}

SubsystemMask make_mask(const Lattice& lat, Geometry g, int param) {
    switch (g) {
        case Geometry::strip: return make_strip_mask(lat, param);
        case Geometry::half_cut: return make_half_cut_mask(lat);
        case Geometry::checkerboard: return make_checkerboard_mask(lat);
        case Geometry::custom: throw std::invalid_argument("custom mask needs an explicit site list");
    }
    throw std::invalid_argument("invalid geometry");
}

SubsystemMask mask_complement(const Lattice& lat, const SubsystemMask& mask) {
    std::set<long> in(mask.sites.begin(), mask.sites.end());
    SubsystemMask m;
    m.geometry = Geometry::custom;
    for (long s = 0; s < lat.sites; ++s)
        if (!in.count(s)) m.sites.push_back(s);
    if (m.sites.empty()) throw std::invalid_argument("complement of full mask is empty");
    return m;
}

SubsystemMask mask_union(const SubsystemMask& a, const SubsystemMask& b) {
    SubsystemMask m;
    m.geometry = Geometry::custom;
    m.sites.resize(a.sites.size() + b.sites.size());
    std::merge(a.sites.begin(), a.sites.end(), b.sites.begin(), b.sites.end(), m.sites.begin());
    for (size_t i = 1; i < m.sites.size(); ++i)
        if (m.sites[i] == m.sites[i - 1]) throw std::invalid_argument("masks overlap");
    return m;
}

}  // namespace mf
