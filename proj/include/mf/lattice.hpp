#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace mf {

/// Hypercubic lattice with periodic boundaries. Site indexing is row-major
/// with x fastest: index = x + L*y + L^2*z. Fixed so that masks and output
/// files are reproducible bit-for-bit.
struct Lattice {
    int dim = 1;        // spatial dimension, 1..3
    int length = 2;     // linear size L, even
    long sites = 2;     // V = L^dim

    static Lattice make(int dim, int length);

    std::array<int, 3> coords(long site) const;
    long site_at(const std::array<int, 3>& c) const;
    std::vector<long> neighbours(long site) const;

    /// Nearest-neighbour hopping matrix: h(l,m) = -1 for neighbours under
    /// periodic wrap, 0 otherwise. Row sums are -2*dim.
    Eigen::MatrixXd hopping_matrix() const;

    /// Hopping eigenvalue for wavevector k (integer components in [0,L)):
    /// -2 * sum_i cos(2 pi k_i / L).
    double hopping_eigenvalue(const std::array<int, 3>& k) const;

    std::string descriptor() const;
};

enum class Geometry { strip, half_cut, checkerboard, custom };

std::string geometry_name(Geometry g);
Geometry geometry_from_name(const std::string& name);

/// Ordered site list defining a subsystem A. Indices strictly increasing.
struct SubsystemMask {
    Geometry geometry = Geometry::custom;
    int strip_width = 0;  // l_A for strip geometry, 0 otherwise
    std::vector<long> sites;

    std::string descriptor() const;
};

/// strip(l_A): l_A consecutive hyperplanes of constant last coordinate
/// (columns in 2D), each of L^(d-1) sites. half_cut = strip(L/2).
SubsystemMask make_strip_mask(const Lattice& lat, int width);
SubsystemMask make_half_cut_mask(const Lattice& lat);

/// Parity-(x+y+z) sublattice; in 2D this is "even columns in odd rows and
/// odd columns in even rows". Selects exactly V/2 sites.
SubsystemMask make_checkerboard_mask(const Lattice& lat);

SubsystemMask make_custom_mask(const Lattice& lat, std::vector<long> sites);

SubsystemMask make_mask(const Lattice& lat, Geometry g, int param = 0);

/// Complement of a mask within the lattice.
SubsystemMask mask_complement(const Lattice& lat, const SubsystemMask& mask);

/// Union of two disjoint masks (throws if they overlap).
SubsystemMask mask_union(const SubsystemMask& a, const SubsystemMask& b);

}  // namespace mf
