#pragma once
#include <complex>
#include <cstdint>
#include <vector>

#include "bogo/mat2.hpp"

namespace bogo {

// Point on the torus-cross-interval domain. z is the torus coordinate reduced
// mod the period lattice, t in [0,1].
struct GridPoint {
    cplx z;
    double t = 0;
};

struct GridSpec {
    int n_sigma = 0;          // nodes per torus direction; even, factors in {2,3,5}
    int n_t = 0;              // interior t-intervals (n_t+1 node planes)
    double period = 1.0;      // torus side length
    std::vector<double> rho;  // conformal factor samples, n_sigma^2, t-independent;
                              // empty means rho == 1/4 (unit flat metric)
};

// Validated grid handle. Node (jx,jy,jt) sits at z = (jx + i·jy)·h_sigma,
// t = jt·h_t, stored t-major: node = (jt*n + jy)*n + jx.
struct Grid {
    int n = 0;      // n_sigma
    int nt = 0;     // n_t (intervals); nt+1 planes
    double period = 1.0;
    double h = 0;   // h_sigma
    double ht = 0;  // h_t
    std::vector<double> rho;  // n^2 samples

    std::int64_t slice_nodes() const { return std::int64_t(n) * n; }
    std::int64_t total_nodes() const { return slice_nodes() * (nt + 1); }
    std::int64_t node(int jx, int jy, int jt) const {
        return (std::int64_t(jt) * n + jy) * n + jx;
    }
    double rho_at(int jx, int jy) const { return rho[std::size_t(jy) * n + jx]; }
    double x_of(int jx) const { return jx * h; }
    double y_of(int jy) const { return jy * h; }
    double t_of(int jt) const { return jt * ht; }
    GridPoint point(int jx, int jy, int jt) const {
        return GridPoint{cplx(x_of(jx), y_of(jy)), t_of(jt)};
    }
    // rho at the nearest node to an arbitrary point
    double rho_near(const GridPoint &p) const;
};

Grid build_grid(const GridSpec &spec);

// Shortest signed representative of d modulo the period.
double min_image(double d, double period);

// Riemannian distance sqrt(4·rho(p)·|Δz|²_min-image + Δt²). For varying rho the
// factor is frozen at p; the only consumers are asymptotic fits near p where
// the error is O(r²).
double min_image_distance(const Grid &g, const GridPoint &p, const GridPoint &q);

}  // namespace bogo
