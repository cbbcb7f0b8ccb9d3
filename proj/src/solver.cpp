#include "bogo/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bogo/parallel.hpp"

namespace bogo {

namespace {

struct NodeIdx {
    int jx, jy, jt;
};

inline NodeIdx split(const Grid &g, std::int64_t id) {
    int jt = int(id / g.slice_nodes());
    int r = int(id % g.slice_nodes());
    return {r % g.n, r / g.n, jt};
}

inline int parity(const NodeIdx &p) { return (p.jx + p.jy + p.jt) & 1; }

struct NodeOp {
    Mat2 R;  // flux residual
    Mat2 X;  // unconstrained local solve
};

// Conservative flux form of dzbar(H^-1 dz H) + rho dt(H^-1 dt H) with
// arithmetic-midpoint inverses, plus the central-difference commutator term
// (i/4)[H^-1 dxH, H^-1 dyH]. The midpoint inverse makes every flux term
// exactly traceless against equal-determinant neighbors
// (tr ((A+D)/2)^-1 (D-A) = 0 when det A = det D), so the det-1 projection of
// the sweep never competes with driving this residual to zero.
inline NodeOp node_op(const Grid &g, const LatticeField &H, int jx, int jy, int jt) {
    int n = g.n;
    int xp = jx + 1 == n ? 0 : jx + 1, xm = jx == 0 ? n - 1 : jx - 1;
    int yp = jy + 1 == n ? 0 : jy + 1, ym = jy == 0 ? n - 1 : jy - 1;
    Mat2 Hc = H.get_m(g.node(jx, jy, jt));
    Mat2 Hxp = H.get_m(g.node(xp, jy, jt)), Hxm = H.get_m(g.node(xm, jy, jt));
    Mat2 Hyp = H.get_m(g.node(jx, yp, jt)), Hym = H.get_m(g.node(jx, ym, jt));
    // reflected ghost above the top plane: the Neumann condition d_t H = 0 is
    // built into the stencil, so the plane relaxes like any interior node
    Mat2 Htm = H.get_m(g.node(jx, jy, jt - 1));
    Mat2 Htp = jt == g.nt ? Htm : H.get_m(g.node(jx, jy, jt + 1));

    Mat2 Bxp = ((Hc + Hxp) * 0.5).inverse(), Bxm = ((Hc + Hxm) * 0.5).inverse();
    Mat2 Byp = ((Hc + Hyp) * 0.5).inverse(), Bym = ((Hc + Hym) * 0.5).inverse();
    Mat2 Btp = ((Hc + Htp) * 0.5).inverse(), Btm = ((Hc + Htm) * 0.5).inverse();

    double ws = 1.0 / (4 * g.h * g.h);
    double wt = g.rho_at(jx, jy) / (g.ht * g.ht);

    Mat2 Hinv = Hc.inverse();
    Mat2 Px = Hinv * ((Hxp - Hxm) * (1.0 / (2 * g.h)));
    Mat2 Py = Hinv * ((Hyp - Hym) * (1.0 / (2 * g.h)));
    Mat2 K = cplx(0, 0.25) * commutator(Px, Py);

    Mat2 M = (Bxp + Bxm + Byp + Bym) * ws + (Btp + Btm) * wt;
    Mat2 S = (Bxp * Hxp + Bxm * Hxm + Byp * Hyp + Bym * Hym) * ws +
             (Btp * Htp + Btm * Htm) * wt + K;
    NodeOp op;
    op.R = S - M * Hc;
    op.X = M.inverse() * S;
    return op;
}

// flux residual of the scalar metric e^psi; exact tanh telescoping of the
// midpoint form, odd in psi
inline double scalar_flux(const Grid &g, int jx, int jy, int jt,
                          const std::function<double(int, int, int)> &psi) {
    int n = g.n;
    int xp = jx + 1 == n ? 0 : jx + 1, xm = jx == 0 ? n - 1 : jx - 1;
    int yp = jy + 1 == n ? 0 : jy + 1, ym = jy == 0 ? n - 1 : jy - 1;
    int jtp = jt == g.nt ? g.nt - 1 : jt + 1;  // reflected top ghost
    double pc = psi(jx, jy, jt);
    double ws = 1.0 / (4 * g.h * g.h);
    double wt = g.rho_at(jx, jy) / (g.ht * g.ht);
    double s = ws * 2 *
                   (std::tanh((psi(xp, jy, jt) - pc) / 2) + std::tanh((psi(xm, jy, jt) - pc) / 2) +
                    std::tanh((psi(jx, yp, jt) - pc) / 2) + std::tanh((psi(jx, ym, jt) - pc) / 2)) +
               wt * 2 *
                   (std::tanh((psi(jx, jy, jtp) - pc) / 2) +
                    std::tanh((psi(jx, jy, jt - 1) - pc) / 2));
    return s;
}

inline Mat2 transport(const Mat2 &gm, const Mat2 &h) { return (gm.adjoint() * h * gm).hermitize(); }

// spectral function of a hermitian 2x2: f applied to both eigenvalues
template <class F>
inline Mat2 spectral_map(const Mat2 &w, F f) {
    cplx tr = w.trace();
    double mean = 0.5 * tr.real();
    double det = w.det().real();
    double disc = std::max(mean * mean - det, 0.0);
    double r = std::sqrt(disc);
    double l1 = mean + r, l2 = mean - r;
    if (r < 1e-14 * (std::abs(l1) + 1)) {
        return Mat2::identity() * f(mean);
    }
    // f(W) = f(l1) P1 + f(l2) P2 with P1 = (W - l2 I)/(l1 - l2)
    Mat2 P1 = (w - Mat2::identity() * l2) * (1.0 / (l1 - l2));
    Mat2 P2 = Mat2::identity() - P1;
    return P1 * f(l1) + P2 * f(l2);
}

double excision_distance(const Charts &c, int jx, int jy, int jt, int i) {
    double d = c.dist3(jx, jy, jt, i);
    if (c.grid.t_of(jt) >= c.data[std::size_t(i)].location.t) {
        double rw = std::abs(c.local_z(jx, jy, i));
        d = std::min(d, 2 * std::sqrt(c.grid.rho_at(jx, jy)) * rw);
    }
    return d;
}

double min_excision_distance(const Charts &c, int jx, int jy, int jt) {
    double d = 1e300;
    for (int i = 0; i < int(c.data.size()); ++i)
        d = std::min(d, excision_distance(c, jx, jy, jt, i));
    return d;
}

// adjoint diagonal potential in the owning representation: the half-integer
// kink of chart i is absorbed into the transition there
double psi_adjoint(const Charts &c, const LatticeField &u, int owner_chart, int jx, int jy,
                   int jt) {
    double v = u.re(c.grid.node(jx, jy, jt));
    if (owner_chart >= 0) {
        double r = std::abs(c.local_z(jx, jy, owner_chart));
        r = std::max(r, c.grid.h / 2);
        v += 0.5 * c.data[std::size_t(owner_chart)].weight.two_m * std::log(r);
    }
    return 4 * v;
}

void ghost_refresh(const Charts &c, LatticeField &H_main, std::vector<LatticeField> &H_cyl,
                   int want_parity) {
    const Grid &g = c.grid;
    for (int i = 0; i < int(c.data.size()); ++i) {
        const auto &mg = c.main_ghosts[std::size_t(i)];
        parallel_for(0, std::int64_t(mg.size()), [&](std::int64_t k) {
            std::int64_t id = mg[std::size_t(k)];
            NodeIdx p = split(g, id);
            if (want_parity >= 0 && parity(p) != want_parity) return;
            const Mat2 &gi = c.gam_inv[std::size_t(i)][std::size_t(p.jy) * g.n + p.jx];
            H_main.set_m(id, transport(gi, H_cyl[std::size_t(i)].get_m(id)));
        });
        const auto &cg = c.cyl_ghosts[std::size_t(i)];
        parallel_for(0, std::int64_t(cg.size()), [&](std::int64_t k) {
            std::int64_t id = cg[std::size_t(k)];
            NodeIdx p = split(g, id);
            if (want_parity >= 0 && parity(p) != want_parity) return;
            const Mat2 &gm = c.gam[std::size_t(i)][std::size_t(p.jy) * g.n + p.jx];
            H_cyl[std::size_t(i)].set_m(id, transport(gm, H_main.get_m(id)));
        });
    }
}

// TEMPORARY tuning hook for probe runs; removed once the policy is frozen.
double env_knob(const char *name, double dflt) {
    const char *s = std::getenv(name);
    return s ? std::atof(s) : dflt;
}

// one red-black color over one chart's relaxable nodes (interior planes plus
// the reflected top plane); returns false when an update went non-finite
bool relax_color(const Grid &g, LatticeField &H, const std::vector<std::uint8_t> &role,
                 std::uint8_t want, std::uint8_t want2, int color, double damping) {
    static const double cap_knob = env_knob("BOGO_CAP", 2.0);
    std::atomic<bool> ok{true};
    parallel_for(1, g.nt + 1, [&](std::int64_t jt_) {
        int jt = int(jt_);
        {
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = ((jy + jt) & 1) == color ? 0 : 1; jx < g.n; jx += 2) {
                    std::int64_t id = g.node(jx, jy, jt);
                    if (role[std::size_t(id)] != want && role[std::size_t(id)] != want2) continue;
                    NodeOp op = node_op(g, H, jx, jy, jt);
                    Mat2 Hc = H.get_m(id);
                    Mat2 X = op.X.hermitize();
                    if (!std::isfinite(X.norm_fro())) {
                        ok.store(false, std::memory_order_relaxed);
                        continue;
                    }
                    // Geodesic step from Hc toward the local solve: damping
                    // acts on log-eigenvalues, so the update never leaves the
                    // cone and a degenerating direction moves at most e^cap
                    // per sweep (the additive step has no such bound and the
                    // curvature source grows quadratically as H degenerates).
                    Mat2 Hs = sqrt_spd(Hc);
                    Mat2 Hsi = Hs.inverse();
                    Mat2 W = (Hsi * X * Hsi).hermitize();
                    Mat2 Xn;
                    if (W.is_spd()) {
                        const double cap = cap_knob;
                        Mat2 Wd = spectral_map(W, [&](double l) {
                            return std::exp(std::clamp(damping * std::log(l), -cap, cap));
                        });
                        Xn = (Hs * Wd * Hs).hermitize();
                    } else {
                        // additive fallback: halve until the step stays SPD
                        Mat2 step = (X - Hc) * damping;
                        bool good = false;
                        for (int k = 0; k < 24 && !good; ++k) {
                            Xn = (Hc + step * std::ldexp(1.0, -k)).hermitize();
                            good = Xn.is_spd();
                        }
                        if (!good) continue;
                    }
                    double d = Xn.det().real();
                    H.set_m(id, Xn * (1.0 / std::sqrt(d)));
                }
        }
    });
    return ok.load();
}

// true for nodes whose owning-chart equation is part of the system (interior
// relax nodes and the reflected top plane)
inline bool owned_equation(const Charts &c, std::int64_t id, std::int8_t ow) {
    if (ow < 0) {
        std::uint8_t r = c.main_role[std::size_t(id)];
        return r == std::uint8_t(MainRole::relax) || r == std::uint8_t(MainRole::t1);
    }
    std::uint8_t r = c.cyl_role[std::size_t(ow)][std::size_t(id)];
    return r == std::uint8_t(CylRole::relax) || r == std::uint8_t(CylRole::t1);
}

double residual_sup_dim2(const Charts &c, const LatticeField &H_main,
                         const std::vector<LatticeField> &H_cyl) {
    const Grid &g = c.grid;
    std::vector<double> plane_max(std::size_t(g.nt + 1), 0.0);
    parallel_for(1, g.nt + 1, [&](std::int64_t jt_) {
        int jt = int(jt_);
        {
            double m = 0;
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    std::int64_t id = g.node(jx, jy, jt);
                    std::int8_t ow = c.owner[std::size_t(id)];
                    if (!owned_equation(c, id, ow)) continue;
                    const LatticeField &H = ow < 0 ? H_main : H_cyl[std::size_t(ow)];
                    m = std::max(m, node_op(g, H, jx, jy, jt).R.norm_fro());
                }
            plane_max[std::size_t(jt)] = m;
        }
    });
    double r = 0;
    for (double v : plane_max) r = std::max(r, v);
    return r;
}

void init_fields(const Charts &c, SolveConfig::Init init, std::uint64_t seed, double noise,
                 LatticeField &H_main, std::vector<LatticeField> &H_cyl) {
    const Grid &g = c.grid;
    H_main = LatticeField(g, FieldKind::matrix2);
    H_cyl.assign(c.data.size(), LatticeField());

    // The randomized start perturbs by a smooth global congruence: a few
    // low-frequency modes, tapered to zero at the Dirichlet plane and the
    // frozen balls. Cell-scale white noise is not usable here - the curvature
    // term grows like the inverse square of the perturbation wavelength and
    // kicks the iteration out of its basin on any grid.
    struct RandMode {
        double kx, ky;
        cplx c[3];
    };
    std::vector<RandMode> modes;
    if (init == SolveConfig::Init::random) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> nd(0.0, 1.0);
        const int ks[6][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 0}, {0, 2}};
        for (auto &k : ks) {
            RandMode m;
            m.kx = k[0];
            m.ky = k[1];
            for (auto &cc : m.c) cc = cplx(nd(rng), nd(rng));
            modes.push_back(m);
        }
    }
    auto jitter = [&](std::int64_t id, const NodeIdx &p, Mat2 H) {
        double taper = 1;
        for (int i = 0; i < int(c.data.size()); ++i)
            taper = std::min(
                taper, std::clamp((c.dist3(p.jx, p.jy, p.jt, i) - (c.r0 + g.h)) / (3 * g.h), 0.0, 1.0));
        double amp = noise * g.t_of(p.jt) * taper / std::sqrt(double(modes.size()));
        double a[3] = {0, 0, 0};
        for (const RandMode &m : modes) {
            cplx e = std::exp(cplx(0, 2 * std::numbers::pi *
                                          (m.kx * g.x_of(p.jx) + m.ky * g.y_of(p.jy)) / g.period));
            for (int s = 0; s < 3; ++s) a[s] += (m.c[s] * e).real();
        }
        Mat2 G{{cplx(1 + amp * a[2]), amp * cplx(a[0], -a[1]), amp * cplx(a[0], a[1]),
                cplx(1 - amp * a[2])}};
        Mat2 r = (G * H * G.adjoint()).hermitize();
        (void)id;
        return r * (1.0 / std::sqrt(r.det().real()));
    };

    auto base_main = [&](std::int64_t id) {
        if (init == SolveConfig::Init::identity) return Mat2::identity();
        double u = c.u_total.re(id);
        return Mat2::diag(std::exp(2 * u), std::exp(-2 * u));
    };

    // Cylinder-representation start value: the p-free product model inside the
    // owned core (exact on the frozen ball), the transported base beyond the
    // window, and a linear SPD blend across the handoff annulus so neither
    // representation sees a jump at the interface. The blend stays in the
    // cone (it is convex); the determinant is renormalized afterwards.
    auto blend_cyl = [&](int i, std::int64_t id, int jx, int jy) {
        cplx w = c.local_z(jx, jy, i);
        double r = std::abs(w);
        double lo = c.r_own[std::size_t(i)], hi = c.r_chart[std::size_t(i)];
        double s = std::clamp((r - lo) / (hi - lo), 0.0, 1.0);
        int two_m = c.data[std::size_t(i)].weight.two_m;
        Mat2 F = model_cyl_value(g, w, two_m, c.u_total.re(id));
        if (s <= 0) return F;
        const Mat2 &gm = c.gam[std::size_t(i)][std::size_t(jy) * g.n + jx];
        Mat2 T = transport(gm, base_main(id));
        if (s >= 1) return T;
        Mat2 B = (F * (1 - s) + T * s).hermitize();
        return B * (1.0 / std::sqrt(B.det().real()));
    };

    parallel_for(0, g.total_nodes(), [&](std::int64_t id) {
        NodeIdx p = split(g, id);
        Mat2 H;
        int win = -1;
        // the lower plane carries the trivial-connection Dirichlet condition;
        // it stays exactly at the base value (identity there)
        if (p.jt > 0)
            for (int i = 0; i < int(c.data.size()) && win < 0; ++i)
                if (std::abs(c.local_z(p.jx, p.jy, i)) <= c.r_chart[std::size_t(i)]) win = i;
        if (win >= 0) {
            const Mat2 &gi = c.gam_inv[std::size_t(win)][std::size_t(p.jy) * g.n + p.jx];
            H = transport(gi, blend_cyl(win, id, p.jx, p.jy));
        } else {
            H = base_main(id);
        }
        std::uint8_t mr = c.main_role[std::size_t(id)];
        if (init == SolveConfig::Init::random &&
            (mr == std::uint8_t(MainRole::relax) || mr == std::uint8_t(MainRole::t1)))
            H = jitter(id, p, H);
        H_main.set_m(id, H);
    });

    for (int i = 0; i < int(c.data.size()); ++i) {
        H_cyl[std::size_t(i)] = LatticeField(g, FieldKind::matrix2);
        LatticeField &Hc = H_cyl[std::size_t(i)];
        const auto &role = c.cyl_role[std::size_t(i)];
        parallel_for(0, g.total_nodes(), [&](std::int64_t id) {
            std::uint8_t r = role[std::size_t(id)];
            if (r == std::uint8_t(CylRole::outside) || r == std::uint8_t(CylRole::ghost)) return;
            NodeIdx p = split(g, id);
            Hc.set_m(id, blend_cyl(i, id, p.jx, p.jy));
        });
    }
    ghost_refresh(c, H_main, H_cyl, -1);
}

void final_sync(const Charts &c, LatticeField &H_main, std::vector<LatticeField> &H_cyl) {
    const Grid &g = c.grid;
    for (int i = 0; i < int(c.data.size()); ++i) {
        const auto &role = c.cyl_role[std::size_t(i)];
        parallel_for(0, g.total_nodes(), [&](std::int64_t id) {
            if (c.owner[std::size_t(id)] != i) return;
            NodeIdx p = split(g, id);
            const Mat2 &gi = c.gam_inv[std::size_t(i)][std::size_t(p.jy) * g.n + p.jx];
            H_main.set_m(id, transport(gi, H_cyl[std::size_t(i)].get_m(id)));
        });
        parallel_for(0, g.total_nodes(), [&](std::int64_t id) {
            std::uint8_t r = role[std::size_t(id)];
            if (r == std::uint8_t(CylRole::relax) || r == std::uint8_t(CylRole::frozen) ||
                r == std::uint8_t(CylRole::t1))
                return;
            NodeIdx p = split(g, id);
            const Mat2 &gm = c.gam[std::size_t(i)][std::size_t(p.jy) * g.n + p.jx];
            H_cyl[std::size_t(i)].set_m(id, transport(gm, H_main.get_m(id)));
        });
    }
}

LaurentMatrix diagonal_cocharacter3(int two_m) {
    LaurentMatrix m;
    m.dim = 3;
    m.group = Group::PSU2;
    m.e.assign(9, LaurentPoly{});
    m.at(0, 0) = LaurentPoly::monomial(1, two_m);
    m.at(1, 1) = LaurentPoly::constant(1);
    m.at(2, 2) = LaurentPoly::monomial(1, -two_m);
    return m;
}

}  // namespace

HermitianField solve_H(const Grid &g, const std::vector<HeckeDatum> &data, const SolveConfig &cfg,
                       SolveReport *report) {
    auto charts = build_charts(g, data);
    HermitianField h;
    h.charts = charts;

    if (!data.empty() && data[0].weight.group == Group::PSU2) {
        // adjoint path: every half-integer-weight solution in scope is the
        // diagonal one, so the datum must sit on the diagonal locus and the
        // metric is built directly from the abelian potential
        for (const HeckeDatum &d : data) {
            SampledLoop diag = sample_matrix(diagonal_cocharacter3(d.weight.two_m),
                                             d.gamma.center, d.gamma.radius, d.gamma.n);
            if (!same_class(d.gamma, diag).same)
                throw std::invalid_argument("adjoint data off the diagonal locus are not supported");
        }
        h.dim = 3;
        h.u_diag = charts->u_total;
        double res = residual_sup(h);
        if (report) {
            report->converged = true;
            report->sweeps = 0;
            report->final_residual = res;
            report->damping_used = cfg.damping;
            report->restarts = 0;
            report->history = {{0, res}};
        }
        return h;
    }

    h.dim = 2;
    double damping = cfg.damping;
    int restarts = 0;
    SolveReport rep;
    rep.damping_used = damping;

    init_fields(*charts, cfg.init, cfg.seed, cfg.init_noise, h.H_main, h.H_cyl);

    double best = 1e300;
    int bad_checks = 0;
    int sweep = 0;

    auto fail = [&](const char *what) {
        rep.sweeps = sweep;
        rep.restarts = restarts;
        if (report) *report = rep;  // leave the partial history for diagnosis
        throw std::runtime_error(what);
    };

    static const double ramp_w = env_knob("BOGO_RAMP_W", 0.0);
    static const int ramp_n = int(env_knob("BOGO_RAMP_N", 0.0));
    static const double tail_w = env_knob("BOGO_TAIL_W", 0.0);
    static const int tail_n = int(env_knob("BOGO_TAIL_N", 0.0));
    static const int cyl_iters = int(env_knob("BOGO_CYL_ITERS", 1.0));

    while (sweep < cfg.max_sweeps) {
        ++sweep;
        double w_eff = (ramp_w > 0 && sweep <= ramp_n) ? ramp_w : damping;
        if (tail_w > 0 && sweep > tail_n) w_eff = tail_w;
        bool ok = true;
        for (int color = 0; color < 2; ++color) {
            ok &= relax_color(g, h.H_main, charts->main_role, std::uint8_t(MainRole::relax),
                              std::uint8_t(MainRole::t1), color, w_eff);
            for (int it = 0; it < cyl_iters; ++it) {
                for (int i = 0; i < int(data.size()); ++i)
                    ok &= relax_color(g, h.H_cyl[std::size_t(i)], charts->cyl_role[std::size_t(i)],
                                      std::uint8_t(CylRole::relax), std::uint8_t(CylRole::t1),
                                      color, w_eff);
                if (it + 1 < cyl_iters) ghost_refresh(*charts, h.H_main, h.H_cyl, color);
            }
            ghost_refresh(*charts, h.H_main, h.H_cyl, color);
        }

        if (!ok) {
            ++restarts;
            if (restarts > 2) fail("positivity lost");
            damping /= 2;
            rep.damping_used = damping;
            rep.restarts = restarts;
            init_fields(*charts, cfg.init, cfg.seed, cfg.init_noise, h.H_main, h.H_cyl);
            best = 1e300;
            bad_checks = 0;
            continue;
        }

        if (sweep == 1 || sweep % cfg.check_every == 0 || sweep == cfg.max_sweeps) {
            double res = residual_sup_dim2(*charts, h.H_main, h.H_cyl);
            rep.history.push_back({sweep, res});
            if (!std::isfinite(res)) fail("diverged");
            if (res < best) {
                best = res;
                bad_checks = 0;
            } else if (res > 5 * best) {
                if (++bad_checks >= 5) fail("diverged");
            }
            rep.final_residual = res;
            if (res < cfg.tol) {
                rep.converged = true;
                break;
            }
        }
    }
    rep.sweeps = sweep;
    rep.restarts = restarts;
    final_sync(*charts, h.H_main, h.H_cyl);
    if (report) *report = rep;
    return h;
}

LatticeField residual_H(const HermitianField &h) {
    const Charts &c = *h.charts;
    const Grid &g = c.grid;
    LatticeField out(g, FieldKind::real_scalar);
    if (h.dim == 3) {
        parallel_for(1, g.nt + 1, [&](std::int64_t jt_) {
            int jt = int(jt_);
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    std::int64_t id = g.node(jx, jy, jt);
                    std::int8_t ow = c.owner[std::size_t(id)];
                    if (!owned_equation(c, id, ow)) continue;
                    int chart = ow;
                    double r = scalar_flux(g, jx, jy, jt, [&](int ax, int ay, int at) {
                        return psi_adjoint(c, h.u_diag, chart, ax, ay, at);
                    });
                    out.re(id) = std::sqrt(2.0) * std::abs(r);
                }
        });
        return out;
    }
    parallel_for(1, g.nt + 1, [&](std::int64_t jt_) {
        int jt = int(jt_);
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                std::int64_t id = g.node(jx, jy, jt);
                std::int8_t ow = c.owner[std::size_t(id)];
                if (!owned_equation(c, id, ow)) continue;
                const LatticeField &H = ow < 0 ? h.H_main : h.H_cyl[std::size_t(ow)];
                out.re(id) = node_op(g, H, jx, jy, jt).R.norm_fro();
            }
    });
    return out;
}

double residual_sup(const HermitianField &h) { return residual_H(h).max_abs(); }

double chart_compat_defect(const HermitianField &h) {
    if (h.dim != 2) return 0;
    const Charts &c = *h.charts;
    const Grid &g = c.grid;
    double worst = 0;
    for (int i = 0; i < int(c.data.size()); ++i)
        for (std::int64_t id = 0; id < g.total_nodes(); ++id) {
            if (c.cyl_role[std::size_t(i)][std::size_t(id)] == std::uint8_t(CylRole::outside))
                continue;
            NodeIdx p = split(g, id);
            const Mat2 &gm = c.gam[std::size_t(i)][std::size_t(p.jy) * g.n + p.jx];
            Mat2 want = transport(gm, h.H_main.get_m(id));
            Mat2 have = h.H_cyl[std::size_t(i)].get_m(id);
            worst = std::max(worst, (have - want).norm_fro() / std::max(1.0, have.norm_fro()));
        }
    return worst;
}

HermitianField embed_diagonal(std::shared_ptr<const Charts> charts, const LatticeField &q) {
    const Charts &c = *charts;
    const Grid &g = c.grid;
    HermitianField h;
    h.charts = charts;
    h.dim = 2;
    h.H_main = LatticeField(g, FieldKind::matrix2);
    for (std::int64_t id = 0; id < g.total_nodes(); ++id)
        h.H_main.set_m(id, Mat2::diag(std::exp(q.re(id)), std::exp(-q.re(id))));
    h.H_cyl.assign(c.data.size(), LatticeField());
    for (int i = 0; i < int(c.data.size()); ++i) {
        h.H_cyl[std::size_t(i)] = LatticeField(g, FieldKind::matrix2);
        for (std::int64_t id = 0; id < g.total_nodes(); ++id) {
            NodeIdx p = split(g, id);
            const Mat2 &gm = c.gam[std::size_t(i)][std::size_t(p.jy) * g.n + p.jx];
            h.H_cyl[std::size_t(i)].set_m(id, transport(gm, h.H_main.get_m(id)));
        }
    }
    return h;
}

namespace {

LatticeField sqrt_field(const Grid &g, const LatticeField &H) {
    LatticeField S(g, FieldKind::matrix2);
    parallel_for(0, g.total_nodes(),
                 [&](std::int64_t id) { S.set_m(id, sqrt_spd(H.get_m(id).hermitize())); });
    return S;
}

// central x/y, central t inside, one-sided second order at the planes
struct FieldDeriv {
    const Grid &g;
    const LatticeField &F;
    Mat2 dx(int jx, int jy, int jt) const {
        int xp = jx + 1 == g.n ? 0 : jx + 1, xm = jx == 0 ? g.n - 1 : jx - 1;
        return (F.get_m(g.node(xp, jy, jt)) - F.get_m(g.node(xm, jy, jt))) * (1.0 / (2 * g.h));
    }
    Mat2 dy(int jx, int jy, int jt) const {
        int yp = jy + 1 == g.n ? 0 : jy + 1, ym = jy == 0 ? g.n - 1 : jy - 1;
        return (F.get_m(g.node(jx, yp, jt)) - F.get_m(g.node(jx, ym, jt))) * (1.0 / (2 * g.h));
    }
    Mat2 dzbar(int jx, int jy, int jt) const {
        return (dx(jx, jy, jt) + cplx(0, 1) * dy(jx, jy, jt)) * 0.5;
    }
    Mat2 dz(int jx, int jy, int jt) const {
        return (dx(jx, jy, jt) - cplx(0, 1) * dy(jx, jy, jt)) * 0.5;
    }
    Mat2 dt(int jx, int jy, int jt) const {
        if (jt == 0)
            return (F.get_m(g.node(jx, jy, 0)) * -3.0 + F.get_m(g.node(jx, jy, 1)) * 4.0 -
                    F.get_m(g.node(jx, jy, 2))) *
                   (1.0 / (2 * g.ht));
        if (jt == g.nt)
            return (F.get_m(g.node(jx, jy, g.nt)) * 3.0 - F.get_m(g.node(jx, jy, g.nt - 1)) * 4.0 +
                    F.get_m(g.node(jx, jy, g.nt - 2))) *
                   (1.0 / (2 * g.ht));
        return (F.get_m(g.node(jx, jy, jt + 1)) - F.get_m(g.node(jx, jy, jt - 1))) *
               (1.0 / (2 * g.ht));
    }
};

ChartFields gauge_of(const Grid &g, const LatticeField &H) {
    ChartFields f;
    f.S = sqrt_field(g, H);
    f.A_zbar = LatticeField(g, FieldKind::matrix2);
    f.A_t = LatticeField(g, FieldKind::matrix2);
    f.Phi = LatticeField(g, FieldKind::matrix2);
    FieldDeriv d{g, f.S};
    parallel_for(0, g.nt + 1, [&](std::int64_t jt_) {
        int jt = int(jt_);
        {
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    std::int64_t id = g.node(jx, jy, jt);
                    Mat2 S = f.S.get_m(id);
                    Mat2 Sinv = S.inverse();
                    f.A_zbar.set_m(id, -(d.dzbar(jx, jy, jt) * Sinv));
                    Mat2 St = d.dt(jx, jy, jt);
                    f.A_t.set_m(id, (Sinv * St - St * Sinv) * 0.5);
                    f.Phi.set_m(id, (Sinv * St + St * Sinv) * cplx(0, -0.5));
                }
        }
    });
    return f;
}

struct EqResiduals {
    double complex_sup = 0, complex_far = 0, real_sup = 0, real_far = 0;
};

// first-order equation dzbar(A_t - i Phi) - dt A_zbar + [A_zbar, A_t - i Phi]
// and the curvature equation F_zzbar = 2 i rho (dt Phi + [A_t, Phi])
void accumulate_eq(const Charts &c, const ChartFields &f, int chart, EqResiduals &out) {
    const Grid &g = c.grid;
    LatticeField C(g, FieldKind::matrix2);  // A_t - i Phi
    for (std::int64_t id = 0; id < g.total_nodes(); ++id)
        C.set_m(id, f.A_t.get_m(id) - cplx(0, 1) * f.Phi.get_m(id));
    FieldDeriv dC{g, C}, dA{g, f.A_zbar}, dPhi{g, f.Phi};
    for (int jt = 1; jt < g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                std::int64_t id = g.node(jx, jy, jt);
                std::int8_t ow = c.owner[std::size_t(id)];
                if (chart < 0) {
                    if (ow >= 0 || c.main_role[std::size_t(id)] != std::uint8_t(MainRole::relax))
                        continue;
                } else {
                    if (ow != chart ||
                        c.cyl_role[std::size_t(chart)][std::size_t(id)] !=
                            std::uint8_t(CylRole::relax))
                        continue;
                }
                Mat2 Az = f.A_zbar.get_m(id);
                Mat2 Cc = C.get_m(id);
                Mat2 r1 = dC.dzbar(jx, jy, jt) - dA.dt(jx, jy, jt) + commutator(Az, Cc);
                Mat2 Azc = -(Az.adjoint());
                Mat2 dzAzbar = dA.dz(jx, jy, jt);
                // d_zbar A_z from the adjoint relation: A_z = -A_zbar^dagger
                Mat2 dzbarAz = -(dA.dz(jx, jy, jt).adjoint());
                Mat2 r2 = dzAzbar - dzbarAz + commutator(Azc, Az) -
                          cplx(0, 2) * g.rho_at(jx, jy) *
                              (dPhi.dt(jx, jy, jt) +
                               commutator(f.A_t.get_m(id), f.Phi.get_m(id)));
                double n1 = r1.norm_fro(), n2 = r2.norm_fro();
                out.complex_sup = std::max(out.complex_sup, n1);
                out.real_sup = std::max(out.real_sup, n2);
                double dmin = min_excision_distance(c, jx, jy, jt);
                double far_cut = chart < 0 ? (c.r0 + 4 * g.h) : (c.r0 + 2 * g.h);
                if (c.data.empty() || dmin >= far_cut) {
                    out.complex_far = std::max(out.complex_far, n1);
                    out.real_far = std::max(out.real_far, n2);
                }
            }
}

}  // namespace

MonopoleSolution unitary_gauge(const HermitianField &h) {
    if (h.dim != 2)
        throw std::invalid_argument("unitary gauge requires the fundamental representation");
    const Charts &c = *h.charts;
    const Grid &g = c.grid;
    MonopoleSolution sol;
    sol.charts = h.charts;
    sol.main_chart = gauge_of(g, h.H_main);
    sol.cyl.resize(h.H_cyl.size());
    for (std::size_t i = 0; i < h.H_cyl.size(); ++i) sol.cyl[i] = gauge_of(g, h.H_cyl[i]);

    EqResiduals eq;
    accumulate_eq(c, sol.main_chart, -1, eq);
    for (int i = 0; i < int(h.H_cyl.size()); ++i) accumulate_eq(c, sol.cyl[std::size_t(i)], i, eq);

    double boundary_a = 0;
    for (std::int64_t s = 0; s < g.slice_nodes(); ++s) {
        boundary_a = std::max(boundary_a, sol.main_chart.A_zbar.get_m(s).norm_fro());
        boundary_a = std::max(boundary_a, sol.main_chart.A_t.get_m(s).norm_fro());
    }
    double boundary_phi = 0;
    for (std::int64_t s = 0; s < g.slice_nodes(); ++s) {
        std::int64_t id = g.node(int(s % g.n), int(s / g.n), g.nt);
        std::int8_t ow = c.owner[std::size_t(id)];
        const ChartFields &f = ow < 0 ? sol.main_chart : sol.cyl[std::size_t(ow)];
        boundary_phi = std::max(boundary_phi, f.Phi.get_m(id).norm_fro());
    }
    double antiherm = 0;
    for (std::int64_t id = 0; id < g.total_nodes(); ++id)
        antiherm = std::max(antiherm, sol.main_chart.Phi.get_m(id).antiherm_defect());

    sol.residuals["residual_H_sup"] = residual_sup(h);
    sol.residuals["eq_complex_sup"] = eq.complex_sup;
    sol.residuals["eq_complex_far"] = eq.complex_far;
    sol.residuals["eq_real_sup"] = eq.real_sup;
    sol.residuals["eq_real_far"] = eq.real_far;
    sol.residuals["boundary_a"] = boundary_a;
    sol.residuals["boundary_phi"] = boundary_phi;
    sol.residuals["phi_antiherm"] = antiherm;
    sol.residuals["chart_compat"] = chart_compat_defect(h);
    return sol;
}

namespace {

void check_same_problem(const HermitianField &a, const HermitianField &b) {
    if (a.dim != b.dim) throw std::invalid_argument("representation dimensions differ");
    const Charts &ca = *a.charts, &cb = *b.charts;
    if (ca.grid.n != cb.grid.n || ca.grid.nt != cb.grid.nt ||
        std::abs(ca.grid.period - cb.grid.period) > 1e-12 || ca.data.size() != cb.data.size())
        throw std::invalid_argument("solutions live on different problems");
    for (std::size_t i = 0; i < ca.data.size(); ++i) {
        const HeckeDatum &da = ca.data[i], &db = cb.data[i];
        if (da.weight.two_m != db.weight.two_m || da.weight.group != db.weight.group ||
            std::abs(da.location.z - db.location.z) > 1e-12 ||
            std::abs(da.location.t - db.location.t) > 1e-12)
            throw std::invalid_argument("solutions live on different problems");
    }
}

}  // namespace

LatticeField sigma(const HermitianField &h1, const HermitianField &h2) {
    check_same_problem(h1, h2);
    const Charts &c = *h1.charts;
    const Grid &g = c.grid;
    LatticeField out(g, FieldKind::real_scalar);
    if (h1.dim == 3) {
        for (std::int64_t id = 0; id < g.total_nodes(); ++id) {
            double d = 4 * (h2.u_diag.re(id) - h1.u_diag.re(id));
            out.re(id) = 2 * (std::exp(d) + std::exp(-d) - 2);
        }
        return out;
    }
    for (std::int64_t id = 0; id < g.total_nodes(); ++id) {
        std::int8_t ow = c.owner[std::size_t(id)];
        Mat2 A, B;
        if (ow < 0) {
            A = h1.H_main.get_m(id);
            B = h2.H_main.get_m(id);
        } else {
            A = h1.H_cyl[std::size_t(ow)].get_m(id);
            B = h2.H_cyl[std::size_t(ow)].get_m(id);
        }
        Mat2 P = A.inverse() * B;
        out.re(id) = (P.trace() + P.inverse().trace()).real() - 4;
    }
    return out;
}

double sigma_sup(const HermitianField &h1, const HermitianField &h2) {
    return sigma(h1, h2).max_abs();
}

double subharmonic_tr_check(const HermitianField &h1, const HermitianField &h2) {
    check_same_problem(h1, h2);
    const Charts &c = *h1.charts;
    const Grid &g = c.grid;
    LatticeField f(g, FieldKind::real_scalar);
    for (std::int64_t id = 0; id < g.total_nodes(); ++id) {
        if (h1.dim == 3) {
            double d = 4 * (h2.u_diag.re(id) - h1.u_diag.re(id));
            f.re(id) = std::exp(d) + std::exp(-d) + 1;
        } else {
            std::int8_t ow = c.owner[std::size_t(id)];
            const LatticeField &A = ow < 0 ? h1.H_main : h1.H_cyl[std::size_t(ow)];
            const LatticeField &B = ow < 0 ? h2.H_main : h2.H_cyl[std::size_t(ow)];
            f.re(id) = (A.get_m(id).inverse() * B.get_m(id)).trace().real();
        }
    }
    double worst = 1e300;
    for (int jt = 1; jt < g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                std::int64_t id = g.node(jx, jy, jt);
                std::int8_t ow = c.owner[std::size_t(id)];
                bool relax = ow < 0
                                 ? c.main_role[std::size_t(id)] == std::uint8_t(MainRole::relax)
                                 : c.cyl_role[std::size_t(ow)][std::size_t(id)] ==
                                       std::uint8_t(CylRole::relax);
                if (!relax) continue;
                if (!c.data.empty() && min_excision_distance(c, jx, jy, jt) < c.r0 + 2 * g.h)
                    continue;
                int xp = jx + 1 == g.n ? 0 : jx + 1, xm = jx == 0 ? g.n - 1 : jx - 1;
                int yp = jy + 1 == g.n ? 0 : jy + 1, ym = jy == 0 ? g.n - 1 : jy - 1;
                double lap = (f.re(g.node(xp, jy, jt)) + f.re(g.node(xm, jy, jt)) +
                              f.re(g.node(jx, yp, jt)) + f.re(g.node(jx, ym, jt)) -
                              4 * f.re(id)) /
                                 (4 * g.rho_at(jx, jy) * g.h * g.h) +
                             (f.re(g.node(jx, jy, jt + 1)) + f.re(g.node(jx, jy, jt - 1)) -
                              2 * f.re(id)) /
                                 (g.ht * g.ht);
                worst = std::min(worst, lap);
            }
    return worst;
}

void save_solution(const std::string &dir, const HermitianField &h, const SolveReport &report,
                   const std::map<std::string, double> &residuals) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Charts &c = *h.charts;
    nlohmann::json j;
    j["format"] = "monopole-solution/1";
    j["grid"] = {{"n", c.grid.n}, {"nt", c.grid.nt}, {"period", c.grid.period}};
    j["dim"] = h.dim;
    nlohmann::json jd = nlohmann::json::array();
    for (std::size_t i = 0; i < c.data.size(); ++i) {
        const HeckeDatum &d = c.data[i];
        std::string gfile = "gamma_" + std::to_string(i) + ".loop";
        save_loop(d.gamma, dir + "/" + gfile);
        jd.push_back({{"z", {d.location.z.real(), d.location.z.imag()}},
                      {"t", d.location.t},
                      {"two_m", d.weight.two_m},
                      {"group", d.weight.group == Group::SU2 ? "SU2" : "PSU2"},
                      {"gamma", gfile}});
    }
    j["data"] = jd;
    j["report"] = {{"converged", report.converged},
                   {"sweeps", report.sweeps},
                   {"final_residual", report.final_residual},
                   {"damping_used", report.damping_used},
                   {"restarts", report.restarts}};
    j["residuals"] = residuals;
    if (h.dim == 2) {
        save_field(h.H_main, dir + "/h_main.field");
        for (std::size_t i = 0; i < h.H_cyl.size(); ++i)
            save_field(h.H_cyl[i], dir + "/h_cyl_" + std::to_string(i) + ".field");
    } else {
        save_field(h.u_diag, dir + "/u_diag.field");
    }
    std::ofstream mf(dir + "/manifest.json");
    mf << j.dump(2) << "\n";
    std::ofstream hist(dir + "/history.csv");
    hist << "sweep,residual\n";
    for (const SweepRecord &r : report.history) {
        std::ostringstream line;
        line.precision(17);
        line << r.sweep << "," << r.residual << "\n";
        hist << line.str();
    }
}

LoadedSolution load_solution(const std::string &dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("cannot open " + dir + "/manifest.json");
    nlohmann::json j;
    mf >> j;
    if (j.at("format").get<std::string>() != "monopole-solution/1")
        throw std::runtime_error("not a monopole solution directory");
    GridSpec spec;
    spec.n_sigma = j.at("grid").at("n").get<int>();
    spec.n_t = j.at("grid").at("nt").get<int>();
    spec.period = j.at("grid").at("period").get<double>();
    Grid g = build_grid(spec);
    std::vector<HeckeDatum> data;
    for (const auto &e : j.at("data")) {
        HeckeDatum d;
        d.location.z = cplx(e.at("z")[0].get<double>(), e.at("z")[1].get<double>());
        d.location.t = e.at("t").get<double>();
        d.weight.two_m = e.at("two_m").get<int>();
        d.weight.group = e.at("group").get<std::string>() == "SU2" ? Group::SU2 : Group::PSU2;
        d.gamma = load_loop(dir + "/" + e.at("gamma").get<std::string>());
        data.push_back(d);
    }
    LoadedSolution out;
    out.h.charts = build_charts(g, data);
    out.h.dim = j.at("dim").get<int>();
    if (out.h.dim == 2) {
        out.h.H_main = load_field(dir + "/h_main.field");
        for (std::size_t i = 0; i < data.size(); ++i)
            out.h.H_cyl.push_back(load_field(dir + "/h_cyl_" + std::to_string(i) + ".field"));
    } else {
        out.h.u_diag = load_field(dir + "/u_diag.field");
    }
    const auto &r = j.at("report");
    out.report.converged = r.at("converged").get<bool>();
    out.report.sweeps = r.at("sweeps").get<int>();
    out.report.final_residual = r.at("final_residual").get<double>();
    out.report.damping_used = r.at("damping_used").get<double>();
    out.report.restarts = r.at("restarts").get<int>();
    if (j.contains("residuals"))
        for (auto it = j["residuals"].begin(); it != j["residuals"].end(); ++it)
            out.residuals[it.key()] = it.value().get<double>();
    std::ifstream hist(dir + "/history.csv");
    std::string line;
    std::getline(hist, line);
    while (std::getline(hist, line)) {
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        out.report.history.push_back(
            {std::stoi(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
    return out;
}

}  // namespace bogo
