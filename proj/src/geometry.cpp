#include "bogo/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bogo/fft.hpp"
#include "bogo/parallel.hpp"

namespace bogo {

namespace {

// per-component complex view pitch for a field kind
int complex_components(FieldKind k) {
    switch (k) {
        case FieldKind::real_scalar: return 1;  // promoted on the fly
        case FieldKind::complex_scalar: return 1;
        case FieldKind::matrix2: return 4;
    }
    return 0;
}

void gather_slice(const LatticeField &f, int comp, int jt, std::vector<cplx> &buf) {
    std::int64_t sn = f.slice_nodes();
    const double *base = f.data.data();
    if (f.kind == FieldKind::real_scalar) {
        for (std::int64_t i = 0; i < sn; ++i) buf[i] = cplx(base[jt * sn + i], 0.0);
    } else {
        int nc = complex_components(f.kind);
        for (std::int64_t i = 0; i < sn; ++i) {
            const double *p = base + 2 * (nc * (jt * sn + i) + comp);
            buf[i] = cplx(p[0], p[1]);
        }
    }
}

void scatter_slice(LatticeField &f, int comp, int jt, const std::vector<cplx> &buf) {
    std::int64_t sn = f.slice_nodes();
    double *base = f.data.data();
    int nc = complex_components(f.kind);
    for (std::int64_t i = 0; i < sn; ++i) {
        double *p = base + 2 * (nc * (jt * sn + i) + comp);
        p[0] = buf[i].real();
        p[1] = buf[i].imag();
    }
}

// sigma-spectral multiplier tables for dz / dzbar, Nyquist zeroed
void spectral_sigma(const Grid &g, const LatticeField &f, LatticeField &out, Deriv which) {
    int n = g.n;
    double k0 = 2.0 * M_PI / g.period;
    int nc = complex_components(f.kind);
    std::vector<cplx> mult(std::size_t(n) * n);
    for (int jy = 0; jy < n; ++jy) {
        int fy = fft_freq(jy, n);
        double ky = (fy == n / 2) ? 0.0 : k0 * fy;
        for (int jx = 0; jx < n; ++jx) {
            int fx = fft_freq(jx, n);
            double kx = (fx == n / 2) ? 0.0 : k0 * fx;
            // dz = (ikx + ky)/2,  dzbar = (ikx - ky)/2
            mult[std::size_t(jy) * n + jx] =
                which == Deriv::dz ? cplx(ky / 2, kx / 2) : cplx(-ky / 2, kx / 2);
        }
    }
    parallel_for(0, std::int64_t(g.nt + 1) * nc, [&](std::int64_t job) {
        int jt = int(job / nc), comp = int(job % nc);
        std::vector<cplx> buf(std::size_t(n) * n), hat(std::size_t(n) * n);
        gather_slice(f, comp, jt, buf);
        fft2(n, buf.data(), hat.data(), -1);
        double inv = 1.0 / (double(n) * n);
        for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= mult[i] * inv;
        fft2(n, hat.data(), buf.data(), +1);
        scatter_slice(out, comp, jt, buf);
    });
}

void fd_sigma(const Grid &g, const LatticeField &f, LatticeField &out, Deriv which) {
    int n = g.n;
    int nc = complex_components(f.kind);
    double ih2 = 1.0 / (2 * g.h);
    parallel_for(0, std::int64_t(g.nt + 1) * nc, [&](std::int64_t job) {
        int jt = int(job / nc), comp = int(job % nc);
        std::vector<cplx> buf(std::size_t(n) * n), dx(std::size_t(n) * n), dy(std::size_t(n) * n);
        gather_slice(f, comp, jt, buf);
        for (int jy = 0; jy < n; ++jy) {
            int yp = (jy + 1) % n, ym = (jy + n - 1) % n;
            for (int jx = 0; jx < n; ++jx) {
                int xp = (jx + 1) % n, xm = (jx + n - 1) % n;
                std::size_t i = std::size_t(jy) * n + jx;
                dx[i] = (buf[std::size_t(jy) * n + xp] - buf[std::size_t(jy) * n + xm]) * ih2;
                dy[i] = (buf[std::size_t(yp) * n + jx] - buf[std::size_t(ym) * n + jx]) * ih2;
            }
        }
        for (std::size_t i = 0; i < buf.size(); ++i)
            buf[i] = which == Deriv::dz ? (dx[i] - cplx(0, 1) * dy[i]) * 0.5
                                        : (dx[i] + cplx(0, 1) * dy[i]) * 0.5;
        scatter_slice(out, comp, jt, buf);
    });
}

void dt_fd(const Grid &g, const LatticeField &f, LatticeField &out) {
    std::int64_t sn = f.slice_nodes();
    int nt = g.nt;
    int ncomp = components_of(f.kind);
    double iht2 = 1.0 / (2 * g.ht);
    parallel_for(0, nt + 1, [&](std::int64_t jt) {
        const double *d = f.data.data();
        double *o = out.data.data();
        auto at = [&](std::int64_t plane, std::int64_t i) -> const double & {
            return d[(plane * sn + i / ncomp) * ncomp + i % ncomp];
        };
        for (std::int64_t i = 0; i < sn * ncomp; ++i) {
            double v;
            if (jt == 0)
                v = (-3 * at(0, i) + 4 * at(1, i) - at(2, i)) * iht2;
            else if (jt == nt)
                v = (3 * at(nt, i) - 4 * at(nt - 1, i) + at(nt - 2, i)) * iht2;
            else
                v = (at(jt + 1, i) - at(jt - 1, i)) * iht2;
            o[(jt * sn + i / ncomp) * ncomp + i % ncomp] = v;
        }
    });
}

}  // namespace

LatticeField derivative(const Grid &g, const LatticeField &f, Deriv which) {
    if (which == Deriv::dt) {
        LatticeField out(g, f.kind);
        dt_fd(g, f, out);
        return out;
    }
    FieldKind ok = f.kind == FieldKind::real_scalar ? FieldKind::complex_scalar : f.kind;
    LatticeField out(g, ok);
    spectral_sigma(g, f, out, which);
    return out;
}

LatticeField derivative_fd(const Grid &g, const LatticeField &f, Deriv which) {
    if (which == Deriv::dt) {
        LatticeField out(g, f.kind);
        dt_fd(g, f, out);
        return out;
    }
    FieldKind ok = f.kind == FieldKind::real_scalar ? FieldKind::complex_scalar : f.kind;
    LatticeField out(g, ok);
    fd_sigma(g, f, out, which);
    return out;
}

LatticeField laplacian(const Grid &g, const LatticeField &f) {
    if (f.kind == FieldKind::matrix2)
        throw std::invalid_argument("laplacian expects a scalar field");
    int n = g.n;
    double k0 = 2.0 * M_PI / g.period;
    bool complex_in = f.kind == FieldKind::complex_scalar;
    LatticeField out(g, f.kind);

    // sigma part: spectral dzbar∘dz = -(kx²+ky²)/4 with the Nyquist convention
    // of derivative(), then scaled by 1/rho per node
    std::vector<double> mult(std::size_t(n) * n);
    for (int jy = 0; jy < n; ++jy) {
        int fy = fft_freq(jy, n);
        double ky = (fy == n / 2) ? 0.0 : k0 * fy;
        for (int jx = 0; jx < n; ++jx) {
            int fx = fft_freq(jx, n);
            double kx = (fx == n / 2) ? 0.0 : k0 * fx;
            mult[std::size_t(jy) * n + jx] = -(kx * kx + ky * ky) / 4;
        }
    }
    parallel_for(0, g.nt + 1, [&](std::int64_t jt) {
        std::vector<cplx> buf(std::size_t(n) * n), hat(std::size_t(n) * n);
        gather_slice(f, 0, jt, buf);
        fft2(n, buf.data(), hat.data(), -1);
        double inv = 1.0 / (double(n) * n);
        for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= mult[i] * inv;
        fft2(n, hat.data(), buf.data(), +1);
        std::int64_t sn = g.slice_nodes();
        for (std::int64_t i = 0; i < sn; ++i) {
            cplx v = buf[i] / g.rho[i];
            if (complex_in)
                out.set_c(jt * sn + i, v);
            else
                out.re(jt * sn + i) = v.real();
        }
    });

    // t part: direct second difference
    std::int64_t sn = g.slice_nodes();
    int nt = g.nt;
    int ncomp = components_of(f.kind);
    double iht2 = 1.0 / (g.ht * g.ht);
    parallel_for(0, nt + 1, [&](std::int64_t jt) {
        const double *d = f.data.data();
        double *o = out.data.data();
        auto at = [&](std::int64_t plane, std::int64_t i) -> const double & {
            return d[(plane * sn) * ncomp + i];
        };
        for (std::int64_t i = 0; i < sn * ncomp; ++i) {
            double v;
            if (jt == 0)
                v = (2 * at(0, i) - 5 * at(1, i) + 4 * at(2, i) - at(3, i)) * iht2;
            else if (jt == nt)
                v = (2 * at(nt, i) - 5 * at(nt - 1, i) + 4 * at(nt - 2, i) - at(nt - 3, i)) * iht2;
            else
                v = (at(jt + 1, i) - 2 * at(jt, i) + at(jt - 1, i)) * iht2;
            o[(jt * sn) * ncomp + i] += v;
        }
    });
    return out;
}

LatticeField poisson_solve_mixed(const Grid &g, const LatticeField &source, EndCondition lo,
                                 EndCondition hi) {
    if (source.kind == FieldKind::matrix2)
        throw std::invalid_argument("poisson_solve_mixed expects a scalar source");
    double rho0 = g.rho[0];
    for (double r : g.rho)
        if (std::abs(r - rho0) > 1e-14)
            throw std::invalid_argument("poisson solver requires constant rho");

    int n = g.n, nt = g.nt;
    std::int64_t sn = g.slice_nodes();
    double ht = g.ht, ht2 = ht * ht;
    double k0 = 2.0 * M_PI / g.period;

    // forward transform every t-plane, then reshuffle to per-mode t-vectors
    std::vector<cplx> shat(std::size_t(sn) * (nt + 1));
    parallel_for(0, nt + 1, [&](std::int64_t jt) {
        std::vector<cplx> buf(std::size_t(n) * n);
        gather_slice(source, 0, jt, buf);
        fft2(n, buf.data(), shat.data() + jt * sn, -1);
    });

    // boundary data in mode space (uniform data lands in the k=0 bin only)
    auto transform_bc = [&](const EndCondition &ec) {
        std::vector<cplx> hat(sn, cplx(0));
        if (ec.data.empty()) {
            hat[0] = cplx(ec.value * double(sn));
        } else {
            if (std::int64_t(ec.data.size()) != sn)
                throw std::invalid_argument("end-condition data size must match the sigma slice");
            std::vector<cplx> buf(sn);
            for (std::int64_t i = 0; i < sn; ++i) buf[i] = cplx(ec.data[i], 0.0);
            fft2(n, buf.data(), hat.data(), -1);
        }
        return hat;
    };
    std::vector<cplx> lo_hat = transform_bc(lo), hi_hat = transform_bc(hi);

    // pure-Neumann solvability on the k=0 mode: trapezoid of the source mean
    // must match the end fluxes
    bool both_neumann = lo.kind == EndCondition::neumann && hi.kind == EndCondition::neumann;
    if (both_neumann) {
        cplx s_int = 0;
        for (int jt = 0; jt <= nt; ++jt)
            s_int += shat[std::size_t(jt) * sn] * ((jt == 0 || jt == nt) ? ht / 2 : ht);
        cplx hi0 = hi_hat[0] / double(sn), lo0 = lo_hat[0] / double(sn);
        double defect = std::abs(s_int / double(sn) - (hi0 - lo0)) / (1 + std::abs(hi0) + std::abs(lo0));
        if (defect > 1e-8) throw std::invalid_argument("incompatible pure-Neumann problem");
    }

    std::vector<cplx> uhat(std::size_t(sn) * (nt + 1));
    parallel_for(0, sn, [&](std::int64_t mode) {
        int jx = int(mode % n), jy = int(mode / n);
        int fx = fft_freq(jx, n), fy = fft_freq(jy, n);
        double kx = (fx == n / 2) ? 0.0 : k0 * fx;
        double ky = (fy == n / 2) ? 0.0 : k0 * fy;
        double kap2 = (kx * kx + ky * ky) / (4 * rho0);
        double beta = -2.0 - kap2 * ht2;
        bool zero_mode = (fx == 0 && fy == 0) || kap2 == 0.0;

        // tridiagonal rows 0..nt over uhat_0..uhat_nt for this mode
        std::vector<cplx> dl(nt + 1, cplx(0)), dd(nt + 1, cplx(0)), du(nt + 1, cplx(0)),
            rhs(nt + 1, cplx(0));
        auto src = [&](int jt) { return shat[std::size_t(jt) * sn + mode]; };
        cplx lo_val = lo_hat[mode], hi_val = hi_hat[mode];

        for (int jt = 1; jt < nt; ++jt) {
            dl[jt] = 1;
            dd[jt] = beta;
            du[jt] = 1;
            rhs[jt] = src(jt) * ht2;
        }
        if (lo.kind == EndCondition::dirichlet) {
            dd[0] = 1;
            rhs[0] = lo_val;
        } else {
            // one-sided derivative row (-3u0+4u1-u2)/(2ht)=val combined with the
            // PDE row at jt=1 to stay tridiagonal
            dd[0] = -2;
            du[0] = 4.0 + beta;
            rhs[0] = 2.0 * ht * lo_val + src(1) * ht2;
        }
        if (hi.kind == EndCondition::dirichlet) {
            dd[nt] = 1;
            rhs[nt] = hi_val;
        } else {
            dl[nt] = -4.0 - beta;
            dd[nt] = 2;
            rhs[nt] = 2.0 * ht * hi_val - src(nt - 1) * ht2;
        }
        if (both_neumann && zero_mode) {
            // rank deficiency: pin the value at t=0
            dd[0] = 1;
            du[0] = 0;
            rhs[0] = 0;
        }

        // Thomas sweep
        for (int jt = 1; jt <= nt; ++jt) {
            cplx w = dl[jt] / dd[jt - 1];
            dd[jt] -= w * du[jt - 1];
            rhs[jt] -= w * rhs[jt - 1];
        }
        std::vector<cplx> u(nt + 1);
        u[nt] = rhs[nt] / dd[nt];
        for (int jt = nt - 1; jt >= 0; --jt) u[jt] = (rhs[jt] - du[jt] * u[jt + 1]) / dd[jt];
        for (int jt = 0; jt <= nt; ++jt) uhat[std::size_t(jt) * sn + mode] = u[jt];
    });

    LatticeField out(g, source.kind);
    parallel_for(0, nt + 1, [&](std::int64_t jt) {
        std::vector<cplx> buf(std::size_t(n) * n);
        fft2(n, uhat.data() + jt * sn, buf.data(), +1);
        double inv = 1.0 / double(sn);
        for (std::int64_t i = 0; i < sn; ++i) {
            cplx v = buf[i] * inv;
            if (source.kind == FieldKind::complex_scalar)
                out.set_c(jt * sn + i, v);
            else
                out.re(jt * sn + i) = v.real();
        }
    });
    return out;
}

double poisson_residual(const Grid &g, const LatticeField &u, const LatticeField &source) {
    LatticeField lap = laplacian(g, u);
    std::int64_t sn = g.slice_nodes();
    int ncomp = components_of(u.kind);
    double worst = 0;
    for (int jt = 1; jt < g.nt; ++jt)
        for (std::int64_t i = 0; i < sn * ncomp; ++i) {
            double d = std::abs(lap.data[(std::int64_t(jt) * sn) * ncomp + i] -
                                source.data[(std::int64_t(jt) * sn) * ncomp + i]);
            worst = std::max(worst, d);
        }
    return worst;
}

}  // namespace bogo
