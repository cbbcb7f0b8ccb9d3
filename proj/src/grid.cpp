#include "bogo/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace bogo {

// even sizes with prime factors {2,3,5} keep the spectral path exact and fast
// and admit the 24/48 grids the nonabelian checks run on
static bool fft_friendly(int n) {
    if (n <= 0 || n % 2 != 0) return false;
    for (int p : {2, 3, 5})
        while (n % p == 0) n /= p;
    return n == 1;
}

double Grid::rho_near(const GridPoint &p) const {
    auto wrap = [&](double x) {
        double w = std::fmod(x, period);
        if (w < 0) w += period;
        return w;
    };
    int jx = int(std::lround(wrap(p.z.real()) / h)) % n;
    int jy = int(std::lround(wrap(p.z.imag()) / h)) % n;
    return rho_at(jx, jy);
}

Grid build_grid(const GridSpec &spec) {
    if (!fft_friendly(spec.n_sigma)) throw std::invalid_argument("n_sigma not power of two");
    if (spec.n_sigma < 8) throw std::invalid_argument("n_sigma too small (need >= 8)");
    if (spec.n_t < 8) throw std::invalid_argument("n_t too small (need >= 8)");
    if (!(spec.period > 0)) throw std::invalid_argument("period not positive");

    Grid g;
    g.n = spec.n_sigma;
    g.nt = spec.n_t;
    g.period = spec.period;
    g.h = spec.period / spec.n_sigma;
    g.ht = 1.0 / spec.n_t;
    if (spec.rho.empty()) {
        g.rho.assign(std::size_t(g.n) * g.n, 0.25);
    } else {
        if (spec.rho.size() != std::size_t(g.n) * g.n)
            throw std::invalid_argument("rho sample count != n_sigma^2");
        for (double r : spec.rho)
            if (!(r > 0)) throw std::invalid_argument("rho not positive");
        g.rho = spec.rho;
    }
    return g;
}

double min_image(double d, double period) {
    double w = std::remainder(d, period);
    return w;
}

double min_image_distance(const Grid &g, const GridPoint &p, const GridPoint &q) {
    double dx = min_image(p.z.real() - q.z.real(), g.period);
    double dy = min_image(p.z.imag() - q.z.imag(), g.period);
    double dt = p.t - q.t;
    double rho = g.rho_near(p);
    return std::sqrt(4 * rho * (dx * dx + dy * dy) + dt * dt);
}

}  // namespace bogo
