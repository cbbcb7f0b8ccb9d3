#include "bogo/abelian.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bogo/fft.hpp"
#include "bogo/parallel.hpp"

namespace bogo {

namespace {

double constant_rho(const Grid &g) {
    double rho0 = g.rho[0];
    for (double r : g.rho)
        if (std::abs(r - rho0) > 1e-14)
            throw std::invalid_argument("abelian potentials require constant rho");
    return rho0;
}

// C2 quintic: 1 below r0, 0 above r1
double chi_cut(double r, double r0, double r1) {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    double s = (r - r0) / (r1 - r0);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double chi_cut_dd(double r, double r0, double r1) {
    if (r <= r0 || r >= r1) return 0.0;
    double w = r1 - r0, s = (r - r0) / w;
    return -(60.0 * s - 180.0 * s * s + 120.0 * s * s * s) / (w * w);
}

double dist3(const Grid &g, double rho0, double x, double y, double t, const GridPoint &p) {
    double dx = min_image(x - p.z.real(), g.period);
    double dy = min_image(y - p.z.imag(), g.period);
    double dt = t - p.t;
    return std::sqrt(4 * rho0 * (dx * dx + dy * dy) + dt * dt);
}

// exp restricted to nonpositive arguments (overflow-safe profile evaluation)
double E(double x) { return std::exp(std::min(x, 0.0)); }

// t-profile of the exact mode solution: continuity at ti, unit-jump response,
// variant end conditions. s=min(t,ti), S=max(t,ti); returns G with V = J*G.
double mode_profile(GreensVariant variant, double kap, double t, double ti) {
    double s = std::min(t, ti), S = std::max(t, ti);
    if (kap == 0.0) return variant == GreensVariant::monopole ? -(1.0 - S) : -s;
    double den = 2.0 * (1.0 + E(-2.0 * kap));
    double ratio =
        variant == GreensVariant::monopole
            ? (E(kap * (s - S)) - E(kap * (s + S - 2)) + E(-kap * (s + S)) - E(-kap * (2 + s - S)))
            : (E(kap * (s - S)) + E(kap * (s + S - 2)) - E(-kap * (s + S)) - E(-kap * (2 + s - S)));
    return -ratio / (den * kap);
}

// t-profile of the antiderivative of the monopole-variant mode solution:
// returns U with u = J*U, U(0)=0
double mode_profile_integral(double kap, double t, double ti) {
    if (kap == 0.0) {
        if (t <= ti) return -(1.0 - ti) * t;
        double tau = t - ti;
        return -((1.0 - ti) * t - 0.5 * tau * tau);
    }
    double den = 2.0 * (1.0 + E(-2.0 * kap));
    // sinh(k(1-ti))*sinh(k*t)/cosh(k), scaled stable (t <= ti branch)
    auto below = [&](double tt) {
        return (E(kap * (tt - ti)) - E(-kap * (tt + ti)) - E(kap * (tt + ti - 2)) +
                E(kap * (ti - tt - 2))) /
               den;
    };
    // cosh(k*ti)*cosh(k(1-x))/cosh(k), scaled stable (x >= ti branch)
    auto cc = [&](double x) {
        return (E(kap * (ti - x)) + E(kap * (ti + x - 2)) + E(-kap * (ti + x)) +
                E(kap * (x - ti - 2))) /
               den;
    };
    if (t <= ti) return -below(t) / (kap * kap);
    return -below(ti) / (kap * kap) - (cc(ti) - cc(t)) / (kap * kap);
}

// per-charge delta-source mode coefficient
cplx mode_source(const Grid &g, double rho0, const Charge &c, double kx, double ky) {
    double m = c.m();
    double phase = -(kx * c.location.z.real() + ky * c.location.z.imag());
    double amp = -2.0 * M_PI * m / (4.0 * rho0 * g.period * g.period);
    return amp * std::exp(cplx(0.0, phase));
}

LatticeField modal_sum(const Grid &g, const std::vector<Charge> &charges, GreensVariant variant,
                       bool antiderivative) {
    double rho0 = constant_rho(g);
    int n = g.n, nt = g.nt;
    std::int64_t sn = g.slice_nodes();
    double k0 = 2.0 * M_PI / g.period;
    std::vector<cplx> hat(std::size_t(nt + 1) * sn, cplx(0));
    parallel_for(0, sn, [&](std::int64_t mode) {
        int jx = int(mode % n), jy = int(mode / n);
        int fx = fft_freq(jx, n), fy = fft_freq(jy, n);
        if (fx == n / 2 || fy == n / 2) return;  // Nyquist zeroed, as in derivative()
        double kx = k0 * fx, ky = k0 * fy;
        double kap = std::sqrt((kx * kx + ky * ky) / (4.0 * rho0));
        for (const Charge &c : charges) {
            cplx J = mode_source(g, rho0, c, kx, ky);
            double ti = c.location.t;
            for (int jt = 0; jt <= nt; ++jt) {
                double t = g.t_of(jt);
                double P = antiderivative ? mode_profile_integral(kap, t, ti)
                                          : mode_profile(variant, kap, t, ti);
                hat[std::size_t(jt) * sn + mode] += J * P;
            }
        }
    });
    LatticeField out(g, FieldKind::real_scalar);
    parallel_for(0, nt + 1, [&](std::int64_t jt) {
        std::vector<cplx> buf(sn);
        fft2(n, hat.data() + jt * sn, buf.data(), +1);
        for (std::int64_t i = 0; i < sn; ++i) out.re(jt * sn + i) = buf[i].real();
    });
    return out;
}

}  // namespace

void validate_charges(const Grid &g, const std::vector<Charge> &charges) {
    for (const Charge &c : charges) {
        if (c.two_m < 1) throw std::invalid_argument("charge weight must satisfy 2m >= 1");
        if (!(c.location.t > 0.0 && c.location.t < 1.0))
            throw std::invalid_argument("charge must lie strictly inside the interval");
    }
    for (std::size_t i = 0; i < charges.size(); ++i)
        for (std::size_t j = i + 1; j < charges.size(); ++j)
            if (min_image_distance(g, charges[i].location, charges[j].location) < 6.0 * g.h)
                throw std::invalid_argument("charges too close to each other");
    if (!charges.empty()) {
        double rc = cutoff_radius(g, charges);
        for (const Charge &c : charges)
            if (c.location.t <= rc || c.location.t >= 1.0 - rc)
                throw std::invalid_argument("charge too close to the boundary");
    }
}

double cutoff_radius(const Grid &g, const std::vector<Charge> &charges) {
    double rc = 0.1 * g.period;
    for (std::size_t i = 0; i < charges.size(); ++i)
        for (std::size_t j = i + 1; j < charges.size(); ++j)
            rc = std::min(rc,
                          0.5 * min_image_distance(g, charges[i].location, charges[j].location));
    return rc;
}

LatticeField greens_modal_exact(const Grid &g, const std::vector<Charge> &charges,
                                GreensVariant variant) {
    validate_charges(g, charges);
    return modal_sum(g, charges, variant, false);
}

LatticeField greens_modal_antiderivative(const Grid &g, const std::vector<Charge> &charges) {
    validate_charges(g, charges);
    return modal_sum(g, charges, GreensVariant::monopole, true);
}

LatticeField greens_mixed(const Grid &g, const std::vector<Charge> &charges, GreensVariant variant,
                          GreensDiagnostics *diag) {
    validate_charges(g, charges);
    double rho0 = constant_rho(g);
    int n = g.n, nt = g.nt;
    std::int64_t sn = g.slice_nodes();
    LatticeField V(g, FieldKind::real_scalar);
    GreensDiagnostics local;
    if (charges.empty()) {
        if (diag) *diag = local;
        return V;
    }
    double r1 = cutoff_radius(g, charges);
    // inner plateau clamped so the transition annulus keeps positive width on
    // coarse grids (r_cut can drop below 3h when 0.1*period does)
    double r0 = std::min(3.0 * g.h, 0.5 * r1);
    local.r_cut = r1;

    // band-limited synthesis of the annulus source m*chi''/(2r) per charge,
    // with the discrete mass repaired to the exact continuum value
    LatticeField src(g, FieldKind::real_scalar);
    int M = 8 * n;
    double hf = g.period / M;
    for (const Charge &c : charges) {
        double m = c.m(), ti = c.location.t;
        double xi = c.location.z.real(), yi = c.location.z.imag();
        std::vector<std::vector<double>> layers;
        std::vector<int> layer_jt;
        for (int jt = 0; jt <= nt; ++jt) {
            double dt_ = g.t_of(jt) - ti;
            if (std::abs(dt_) >= r1) continue;
            layer_jt.push_back(jt);
            layers.emplace_back(sn, 0.0);
        }
        double mass = 0.0;
        parallel_for(0, std::int64_t(layer_jt.size()), [&](std::int64_t li) {
            int jt = layer_jt[li];
            double dt_ = g.t_of(jt) - ti;
            double dmax = std::sqrt(std::max(r1 * r1 - dt_ * dt_, 0.0) / (4.0 * rho0));
            std::vector<cplx> fine(std::size_t(M) * M, cplx(0));
            int bx0 = int(std::floor((xi - dmax) / hf)), bx1 = int(std::ceil((xi + dmax) / hf));
            int by0 = int(std::floor((yi - dmax) / hf)), by1 = int(std::ceil((yi + dmax) / hf));
            for (int fy = by0; fy <= by1; ++fy)
                for (int fx = bx0; fx <= bx1; ++fx) {
                    double dx = min_image(fx * hf - xi, g.period);
                    double dy = min_image(fy * hf - yi, g.period);
                    double r = std::sqrt(4 * rho0 * (dx * dx + dy * dy) + dt_ * dt_);
                    double cdd = chi_cut_dd(r, r0, r1);
                    if (cdd != 0.0) {
                        int ix = ((fx % M) + M) % M, iy = ((fy % M) + M) % M;
                        fine[std::size_t(iy) * M + ix] = cplx(m * cdd / (2.0 * r), 0.0);
                    }
                }
            std::vector<cplx> fhat(std::size_t(M) * M);
            fft2(M, fine.data(), fhat.data(), -1);
            // fold the coarse band out of the fine spectrum (Nyquist zeroed)
            std::vector<cplx> chat(std::size_t(n) * n, cplx(0));
            double inv = 1.0 / (double(M) * M);
            for (int gy = 0; gy < n; ++gy) {
                int fy2 = fft_freq(gy, n);
                if (fy2 == n / 2) continue;
                int sy = (fy2 + M) % M;
                for (int gx = 0; gx < n; ++gx) {
                    int fx2 = fft_freq(gx, n);
                    if (fx2 == n / 2) continue;
                    int sx = (fx2 + M) % M;
                    chat[std::size_t(gy) * n + gx] = fhat[std::size_t(sy) * M + sx] * inv;
                }
            }
            std::vector<cplx> cbuf(std::size_t(n) * n);
            fft2(n, chat.data(), cbuf.data(), +1);
            for (std::int64_t i = 0; i < sn; ++i) layers[li][i] = cbuf[i].real();
        });
        for (std::size_t li = 0; li < layers.size(); ++li)
            for (std::int64_t i = 0; i < sn; ++i) mass += layers[li][i];
        mass *= g.h * g.h * g.ht;
        double target = 2.0 * M_PI * m / (4.0 * rho0);
        double scale = mass != 0.0 ? target / mass : 1.0;
        local.mass_repair.push_back(scale);
        for (std::size_t li = 0; li < layers.size(); ++li) {
            std::int64_t off = std::int64_t(layer_jt[li]) * sn;
            // v_reg absorbs the negated annulus source
            for (std::int64_t i = 0; i < sn; ++i) src.re(off + i) -= scale * layers[li][i];
        }
    }

    EndCondition en{EndCondition::neumann, 0.0}, ed{EndCondition::dirichlet, 0.0};
    LatticeField vreg = variant == GreensVariant::monopole ? poisson_solve_mixed(g, src, en, ed)
                                                           : poisson_solve_mixed(g, src, ed, en);

    // direct sampled singular part on top of the regular solve
    parallel_for(0, nt + 1, [&](std::int64_t jt) {
        for (int jy = 0; jy < n; ++jy)
            for (int jx = 0; jx < n; ++jx) {
                double s = 0.0;
                for (const Charge &c : charges) {
                    double r = dist3(g, rho0, g.x_of(jx), g.y_of(jy), g.t_of(int(jt)), c.location);
                    if (r < r1)
                        s += chi_cut(r, r0, r1) * c.m() / (2.0 * std::max(r, 0.5 * g.h));
                }
                std::int64_t idx = jt * sn + std::int64_t(jy) * n + jx;
                V.re(idx) = s + vreg.re(idx);
            }
    });

    // positivity diagnostic over the nodes not pinned by the Dirichlet end
    std::int64_t lo = variant == GreensVariant::monopole ? 0 : sn;
    std::int64_t hi = variant == GreensVariant::monopole ? sn * nt : sn * (nt + 1);
    local.min_V = *std::min_element(V.data.begin() + lo, V.data.begin() + hi);
    if (diag) *diag = local;
    return V;
}

DiracMonopole dirac_monopole(const Grid &g, const LatticeField &V,
                             const std::vector<Charge> &charges) {
    if (V.kind != FieldKind::real_scalar)
        throw std::invalid_argument("dirac_monopole expects a real potential");
    validate_charges(g, charges);
    LatticeField Vzb = derivative(g, V, Deriv::dzbar);
    DiracMonopole mono{V, LatticeField(g, FieldKind::complex_scalar),
                       LatticeField(g, FieldKind::complex_scalar),
                       LatticeField(g, FieldKind::complex_scalar), charges};
    std::int64_t sn = g.slice_nodes();
    for (std::int64_t i = 0; i < V.total_nodes(); ++i) mono.Phi.set_c(i, cplx(0.0, V.re(i)));
    for (int jt = 1; jt <= g.nt; ++jt) {
        std::int64_t off = std::int64_t(jt) * sn, prev = off - sn;
        for (std::int64_t i = 0; i < sn; ++i) {
            cplx inc = cplx(0, -0.5 * g.ht) * (Vzb.get_c(prev + i) + Vzb.get_c(off + i));
            mono.A_zbar.set_c(off + i, mono.A_zbar.get_c(prev + i) + inc);
        }
    }
    return mono;
}

std::vector<char> off_string_mask(const Grid &g, const std::vector<Charge> &charges, double r_tube,
                                  double r_ball) {
    double rho0 = constant_rho(g);
    std::vector<char> mask(g.total_nodes(), 1);
    std::int64_t sn = g.slice_nodes();
    for (const Charge &c : charges)
        for (int jt = 0; jt <= g.nt; ++jt)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    double dx = min_image(g.x_of(jx) - c.location.z.real(), g.period);
                    double dy = min_image(g.y_of(jy) - c.location.z.imag(), g.period);
                    double dsig = std::sqrt(4 * rho0 * (dx * dx + dy * dy));
                    double dt = g.t_of(jt) - c.location.t;
                    bool in_ball = std::sqrt(dsig * dsig + dt * dt) < r_ball;
                    bool in_tube = dsig < r_tube && g.t_of(jt) > c.location.t - r_tube;
                    if (in_ball || in_tube)
                        mask[std::size_t(jt) * sn + std::int64_t(jy) * g.n + jx] = 0;
                }
    return mask;
}

double dirac_residual(const Grid &g, const DiracMonopole &mono, const std::vector<char> &mask) {
    std::int64_t sn = g.slice_nodes();
    LatticeField Az(g, FieldKind::complex_scalar);
    for (std::int64_t i = 0; i < Az.total_nodes(); ++i)
        Az.set_c(i, std::conj(mono.A_zbar.get_c(i)));
    LatticeField dAzb_z = derivative(g, mono.A_zbar, Deriv::dz);
    LatticeField dAz_zb = derivative(g, Az, Deriv::dzbar);
    LatticeField dAz_t = derivative(g, Az, Deriv::dt);
    LatticeField dAzb_t = derivative(g, mono.A_zbar, Deriv::dt);
    LatticeField dAt_z = derivative(g, mono.A_t, Deriv::dz);
    LatticeField dAt_zb = derivative(g, mono.A_t, Deriv::dzbar);
    LatticeField Vz = derivative(g, mono.V, Deriv::dz);
    LatticeField Vzb = derivative(g, mono.V, Deriv::dzbar);
    LatticeField Vt = derivative(g, mono.V, Deriv::dt);
    double worst = 0.0;
    for (int jt = 0; jt <= g.nt; ++jt)
        for (std::int64_t i = 0; i < sn; ++i) {
            std::int64_t idx = std::int64_t(jt) * sn + i;
            if (!mask[idx]) continue;
            double rho = g.rho[std::size_t(i)];
            // dz^dzbar, dz^dt, dzbar^dt components of dA - *dV
            cplx czz = dAzb_z.get_c(idx) - dAz_zb.get_c(idx) -
                       cplx(0, 2 * rho) * cplx(Vt.re(idx), 0);
            cplx czt = dAt_z.get_c(idx) - dAz_t.get_c(idx) + cplx(0, 1) * Vz.get_c(idx);
            cplx cbt = dAt_zb.get_c(idx) - dAzb_t.get_c(idx) - cplx(0, 1) * Vzb.get_c(idx);
            worst = std::max({worst, std::abs(czz), std::abs(czt), std::abs(cbt)});
        }
    return worst;
}

double flux_through_slice(const Grid &g, const DiracMonopole &mono, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("slice level outside [0,1]");
    for (const Charge &c : mono.charges)
        if (std::abs(t - c.location.t) < g.ht)
            throw std::invalid_argument("t collides with a singular level");
    double rho0 = constant_rho(g);
    // nearest node interval on t's side of every singular level; the cutoff
    // construction smears each source over |t-t_i| < r_cut, so prefer an
    // interval clear of those bands (there the slope is the exact plateau)
    double band = mono.charges.empty() ? 0.0 : cutoff_radius(g, mono.charges);
    auto on_plateau = [&](int j) {
        if (j < 0 || j + 1 > g.nt) return false;
        double lo = std::min(g.t_of(j), t), hi = std::max(g.t_of(j + 1), t);
        for (const Charge &c : mono.charges)
            if (c.location.t >= lo && c.location.t <= hi) return false;
        return true;
    };
    auto out_of_band = [&](int j) {
        if (!on_plateau(j)) return false;
        for (const Charge &c : mono.charges)
            for (int e = 0; e <= 1; ++e)
                if (std::abs(g.t_of(j + e) - c.location.t) < band) return false;
        return true;
    };
    int ja = std::clamp(int(std::floor(t / g.ht)), 0, g.nt - 1);
    int pick = -1;
    for (int d = 0; d <= g.nt && pick < 0; ++d) {
        if (out_of_band(ja - d))
            pick = ja - d;
        else if (out_of_band(ja + d))
            pick = ja + d;
    }
    for (int d = 0; d <= g.nt && pick < 0; ++d) {
        if (on_plateau(ja - d))
            pick = ja - d;
        else if (on_plateau(ja + d))
            pick = ja + d;
    }
    if (pick < 0) throw std::invalid_argument("no singularity-free slice pair near t");
    std::int64_t sn = g.slice_nodes();
    double sum = 0.0;
    for (std::int64_t i = 0; i < sn; ++i)
        sum += mono.V.re(std::int64_t(pick + 1) * sn + i) - mono.V.re(std::int64_t(pick) * sn + i);
    return 4.0 * rho0 * g.h * g.h * sum / g.ht;
}

PeriodsReport periods_check(const Grid &g, const OneForm &a) {
    LatticeField azb_z = derivative(g, a.zbar, Deriv::dz);
    LatticeField az_zb = derivative(g, a.z, Deriv::dzbar);
    LatticeField az_t = derivative(g, a.z, Deriv::dt);
    LatticeField azb_t = derivative(g, a.zbar, Deriv::dt);
    LatticeField at_z = derivative(g, a.t, Deriv::dz);
    LatticeField at_zb = derivative(g, a.t, Deriv::dzbar);
    PeriodsReport rep;
    for (std::int64_t i = 0; i < a.z.total_nodes(); ++i) {
        double r = std::max({std::abs(azb_z.get_c(i) - az_zb.get_c(i)),
                             std::abs(at_z.get_c(i) - az_t.get_c(i)),
                             std::abs(at_zb.get_c(i) - azb_t.get_c(i))});
        rep.d_residual = std::max(rep.d_residual, r);
    }
    auto period_x = [&](int jt) {
        cplx s = 0;
        for (int jx = 0; jx < g.n; ++jx) {
            std::int64_t i = g.node(jx, 0, jt);
            s += a.z.get_c(i) + a.zbar.get_c(i);
        }
        return s * g.h;
    };
    auto period_y = [&](int jt) {
        cplx s = 0;
        for (int jy = 0; jy < g.n; ++jy) {
            std::int64_t i = g.node(0, jy, jt);
            s += cplx(0, 1) * (a.z.get_c(i) - a.zbar.get_c(i));
        }
        return s * g.h;
    };
    rep.px0 = period_x(0);
    rep.py0 = period_y(0);
    rep.px1 = period_x(g.nt);
    rep.py1 = period_y(g.nt);
    return rep;
}

double shell_average_rV(const Grid &g, const LatticeField &V, const Charge &c, double r_lo,
                        double r_hi) {
    double rho0 = constant_rho(g);
    double acc = 0.0;
    std::int64_t count = 0;
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                double r = dist3(g, rho0, g.x_of(jx), g.y_of(jy), g.t_of(jt), c.location);
                if (r < r_lo || r > r_hi) continue;
                acc += r * V.re(g.node(jx, jy, jt));
                ++count;
            }
    if (count == 0) throw std::invalid_argument("empty shell");
    return acc / double(count);
}

double kato_sup(const Grid &g, const LatticeField &V, const std::vector<Charge> &charges,
                double r_min) {
    double rho0 = constant_rho(g);
    double worst = 0.0;
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                double r = std::numeric_limits<double>::infinity();
                for (const Charge &c : charges)
                    r = std::min(r,
                                 dist3(g, rho0, g.x_of(jx), g.y_of(jy), g.t_of(jt), c.location));
                if (r <= r_min || !std::isfinite(r)) continue;
                worst = std::max(worst, r * std::abs(V.re(g.node(jx, jy, jt))));
            }
    return worst;
}

void save_monopole(const std::string &dir, const Grid &g, const DiracMonopole &mono) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_field(mono.V, dir + "/V.field");
    save_field(mono.A_zbar, dir + "/A_zbar.field");
    save_field(mono.A_t, dir + "/A_t.field");
    save_field(mono.Phi, dir + "/Phi.field");

    nlohmann::json j;
    j["format"] = "dirac-monopole/1";
    j["n_sigma"] = g.n;
    j["n_t"] = g.nt;
    j["period"] = g.period;
    j["rho"] = g.rho[0];
    j["charges"] = nlohmann::json::array();
    for (const Charge &c : mono.charges)
        j["charges"].push_back({{"x", c.location.z.real()},
                                {"y", c.location.z.imag()},
                                {"t", c.location.t},
                                {"two_m", c.two_m}});

    nlohmann::json diag;
    if (!mono.charges.empty()) {
        auto mask = off_string_mask(g, mono.charges, 3 * g.h, 5 * g.h);
        diag["residual_off_strings"] = dirac_residual(g, mono, mask);
        // flux staircase at plateau midpoints plus the per-level jumps; the
        // jump normalization per unit weight is measured, not assumed
        std::vector<double> levels{0.0, 1.0};
        for (const Charge &c : mono.charges) levels.push_back(c.location.t);
        std::sort(levels.begin(), levels.end());
        nlohmann::json stair = nlohmann::json::array();
        std::vector<double> plateau;
        for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
            double tm = 0.5 * (levels[i] + levels[i + 1]);
            if (levels[i + 1] - levels[i] < 3 * g.ht) continue;
            double f = flux_through_slice(g, mono, tm);
            stair.push_back({{"t", tm}, {"flux", f}});
            plateau.push_back(f);
        }
        diag["flux_staircase"] = stair;
        if (plateau.size() >= 2 && !mono.charges.empty()) {
            double total_m = 0.0;
            for (const Charge &c : mono.charges) total_m += c.m();
            diag["flux_jump_per_unit_m"] = (plateau.back() - plateau.front()) / total_m;
        }
    }
    std::int64_t sn = g.slice_nodes();
    diag["min_V_interior"] =
        *std::min_element(mono.V.data.begin(), mono.V.data.begin() + sn * g.nt);
    j["diagnostics"] = diag;

    std::ofstream out(dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

DiracMonopole load_monopole(const std::string &dir, Grid &g_out) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw std::runtime_error("cannot open " + dir + "/manifest.json");
    nlohmann::json j = nlohmann::json::parse(in);
    GridSpec spec;
    spec.n_sigma = j.at("n_sigma").get<int>();
    spec.n_t = j.at("n_t").get<int>();
    spec.period = j.at("period").get<double>();
    spec.rho.assign(std::size_t(spec.n_sigma) * spec.n_sigma, j.at("rho").get<double>());
    g_out = build_grid(spec);
    DiracMonopole mono{load_field(dir + "/V.field"), load_field(dir + "/A_zbar.field"),
                       load_field(dir + "/A_t.field"), load_field(dir + "/Phi.field"), {}};
    for (const auto &c : j.at("charges")) {
        Charge ch;
        ch.location.z = cplx(c.at("x").get<double>(), c.at("y").get<double>());
        ch.location.t = c.at("t").get<double>();
        ch.two_m = c.at("two_m").get<int>();
        mono.charges.push_back(ch);
    }
    return mono;
}

}  // namespace bogo
