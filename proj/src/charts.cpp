#include "bogo/charts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bogo {

namespace {

// local coordinate softened to |w| >= h/2, matching the abelian kernel's
// on-node convention; keeps transition and model evaluations finite when a
// singular point sits exactly on a node
cplx soften(cplx w, double h) {
    double r = std::abs(w);
    if (r >= h / 2) return w;
    if (r == 0) return cplx(h / 2, 0);
    return w * (h / 2 / r);
}

Mat2 eval2(const LaurentMatrix &m, cplx z) {
    Mat2 r;
    r.a[0] = m.at(0, 0).eval(z);
    r.a[1] = m.at(0, 1).eval(z);
    r.a[2] = m.at(1, 0).eval(z);
    r.a[3] = m.at(1, 1).eval(z);
    return r;
}

bool adjacent_to(const Grid &g, const std::vector<std::uint8_t> &role, int jx, int jy, int jt,
                 std::uint8_t wanted) {
    int n = g.n;
    auto at = [&](int ax, int ay, int at_) {
        return role[std::size_t(g.node(((ax % n) + n) % n, ((ay % n) + n) % n, at_))];
    };
    if (at(jx + 1, jy, jt) == wanted || at(jx - 1, jy, jt) == wanted) return true;
    if (at(jx, jy + 1, jt) == wanted || at(jx, jy - 1, jt) == wanted) return true;
    if (jt + 1 <= g.nt && at(jx, jy, jt + 1) == wanted) return true;
    if (jt - 1 >= 0 && at(jx, jy, jt - 1) == wanted) return true;
    return false;
}

}  // namespace

cplx Charts::local_z(int jx, int jy, int i) const {
    const GridPoint &p = data[std::size_t(i)].location;
    return cplx(min_image(grid.x_of(jx) - p.z.real(), grid.period),
                min_image(grid.y_of(jy) - p.z.imag(), grid.period));
}

double Charts::dist3(int jx, int jy, int jt, int i) const {
    return min_image_distance(grid, grid.point(jx, jy, jt), data[std::size_t(i)].location);
}

void validate_data(const Grid &g, const std::vector<HeckeDatum> &data) {
    double r0 = 4 * g.h;
    double r_own = r0 + 2 * g.h;
    double r_win = r_own + 2 * g.h;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const HeckeDatum &d = data[i];
        validate_weight(d.weight);
        if (d.weight.two_m <= 0)
            throw std::invalid_argument("modification weight must be positive");
        validate_loop(d.gamma);
        if (d.gamma.group != d.weight.group)
            throw std::invalid_argument("transition group does not match the weight's group");
        int want_dim = d.weight.group == Group::SU2 ? 2 : 3;
        if (d.gamma.dim != want_dim)
            throw std::invalid_argument("transition dimension does not match the group");
        if (i > 0 && data[i].weight.group != data[0].weight.group)
            throw std::invalid_argument("mixed groups in one problem");
        if (std::abs(d.gamma.center - d.location.z) > 1e-12)
            throw std::invalid_argument("transition loop must be centered at the singular point");
        Weight w = weight_of(d.gamma);
        if (w.two_m != d.weight.two_m)
            throw std::invalid_argument("transition weight does not match the declared weight");
        double t = d.location.t;
        if (t - r0 - 2 * g.ht < 0)
            throw std::invalid_argument("excision chart passes below the lower boundary");
        if (t + r0 + 3 * g.ht > 1)
            throw std::invalid_argument("excision sphere too close to the upper boundary");
        if (r_win >= 0.45 * g.period)
            throw std::invalid_argument("grid too coarse for the excision charts");
        for (std::size_t j = 0; j < i; ++j) {
            double dx = min_image(d.location.z.real() - data[j].location.z.real(), g.period);
            double dy = min_image(d.location.z.imag() - data[j].location.z.imag(), g.period);
            if (std::hypot(dx, dy) < 2 * r_win + g.h)
                throw std::invalid_argument("modifications too close together for disjoint charts");
        }
    }
}

Mat2 model_cyl_value(const Grid &g, cplx local_z, int two_m, double u) {
    if (two_m == 0) return Mat2::identity();
    double r = std::abs(soften(local_z, g.h));
    double d = std::pow(r, two_m) * std::exp(2 * u);
    return Mat2::diag(d, 1.0 / d);
}

ExcisionModel boundary_model(const Grid &g, const HeckeDatum &datum, const LatticeField &u) {
    if (datum.weight.group != Group::SU2 && datum.weight.two_m % 2 != 0)
        throw std::invalid_argument("adjoint model is diagonal; only the scalar potential is stored");
    ExcisionModel m;
    double r0 = 4 * g.h;
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                if (min_image_distance(g, g.point(jx, jy, jt), datum.location) > r0) continue;
                std::int64_t id = g.node(jx, jy, jt);
                cplx w(min_image(g.x_of(jx) - datum.location.z.real(), g.period),
                       min_image(g.y_of(jy) - datum.location.z.imag(), g.period));
                double uv = datum.weight.two_m == 0 ? 0.0 : u.re(id);
                m.nodes.push_back(id);
                m.values.push_back(model_cyl_value(g, w, datum.weight.two_m, uv));
            }
    return m;
}

std::shared_ptr<const Charts> build_charts(const Grid &g, const std::vector<HeckeDatum> &data) {
    validate_data(g, data);
    auto ch = std::make_shared<Charts>();
    Charts &c = *ch;
    c.grid = g;
    c.data = data;
    c.r0 = 4 * g.h;
    int k = int(data.size());
    c.r_chart.assign(std::size_t(k), c.r0 + 4 * g.h);
    c.r_own.assign(std::size_t(k), c.r0 + 2 * g.h);
    c.jt_lo.resize(std::size_t(k));
    c.jt_ball_top.resize(std::size_t(k));
    c.main_role.assign(std::size_t(g.total_nodes()), std::uint8_t(MainRole::relax));
    c.cyl_role.assign(std::size_t(k),
                      std::vector<std::uint8_t>(std::size_t(g.total_nodes()),
                                                std::uint8_t(CylRole::outside)));
    c.owner.assign(std::size_t(g.total_nodes()), -1);
    c.gamma_poly.resize(std::size_t(k));
    c.gam.assign(std::size_t(k), {});
    c.gam_inv.assign(std::size_t(k), {});
    c.u_one.resize(std::size_t(k));
    c.main_ghosts.assign(std::size_t(k), {});
    c.cyl_ghosts.assign(std::size_t(k), {});
    c.frozen.assign(std::size_t(k), {});
    c.weld.assign(std::size_t(k), {});

    // abelian primitives: one per datum, plus the superposition
    for (int i = 0; i < k; ++i) {
        Charge q{data[std::size_t(i)].location, data[std::size_t(i)].weight.two_m};
        c.u_one[std::size_t(i)] = greens_modal_antiderivative(g, {q});
    }
    c.u_total = LatticeField(g, FieldKind::real_scalar);
    for (int i = 0; i < k; ++i)
        for (std::int64_t jd = 0; jd < g.total_nodes(); ++jd)
            c.u_total.re(jd) += c.u_one[std::size_t(i)].re(jd);

    bool su2 = data.empty() || data[0].weight.group == Group::SU2;

    // transitions on each chart window (identity elsewhere)
    for (int i = 0; i < k; ++i) {
        c.gamma_poly[std::size_t(i)] = loop_to_laurent(data[std::size_t(i)].gamma);
        if (!su2) continue;  // adjoint path never relaxes matrices
        c.gam[std::size_t(i)].assign(std::size_t(g.slice_nodes()), Mat2::identity());
        c.gam_inv[std::size_t(i)].assign(std::size_t(g.slice_nodes()), Mat2::identity());
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                cplx w = c.local_z(jx, jy, i);
                if (std::abs(w) > c.r_chart[std::size_t(i)] + 2 * g.h) continue;
                Mat2 gm = eval2(c.gamma_poly[std::size_t(i)], soften(w, g.h));
                std::size_t s = std::size_t(jy) * g.n + jx;
                c.gam[std::size_t(i)][s] = gm;
                c.gam_inv[std::size_t(i)][s] = gm.inverse();
            }
    }

    // cylinder roles: frozen ball, owned relax region, top plane; ghosts are
    // whatever the relax stencils read beyond that
    for (int i = 0; i < k; ++i) {
        const HeckeDatum &d = data[std::size_t(i)];
        double ti = d.location.t;
        c.jt_lo[std::size_t(i)] = std::max(0, int(std::floor((ti - c.r0) / g.ht)) - 2);
        c.jt_ball_top[std::size_t(i)] = int(std::floor((ti + c.r0) / g.ht)) + 1;
        auto &role = c.cyl_role[std::size_t(i)];
        for (int jt = c.jt_lo[std::size_t(i)]; jt <= g.nt; ++jt)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    cplx w = c.local_z(jx, jy, i);
                    double rw = std::abs(w);
                    if (rw > c.r_chart[std::size_t(i)]) continue;
                    std::int64_t id = g.node(jx, jy, jt);
                    double t = g.t_of(jt);
                    if (c.dist3(jx, jy, jt, i) <= c.r0) {
                        role[std::size_t(id)] = std::uint8_t(CylRole::frozen);
                        c.frozen[std::size_t(i)].push_back(id);
                        c.owner[std::size_t(id)] = std::int8_t(i);
                    } else if (rw <= c.r_own[std::size_t(i)] && t >= ti - c.r0 - g.ht / 2) {
                        role[std::size_t(id)] =
                            std::uint8_t(jt == g.nt ? CylRole::t1 : CylRole::relax);
                        c.owner[std::size_t(id)] = std::int8_t(i);
                    }
                }
        for (int jt = c.jt_lo[std::size_t(i)]; jt <= g.nt; ++jt)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    std::int64_t id = g.node(jx, jy, jt);
                    if (role[std::size_t(id)] != std::uint8_t(CylRole::outside)) continue;
                    if (std::abs(c.local_z(jx, jy, i)) > c.r_chart[std::size_t(i)]) continue;
                    if (adjacent_to(g, role, jx, jy, jt, std::uint8_t(CylRole::relax)) ||
                        adjacent_to(g, role, jx, jy, jt, std::uint8_t(CylRole::t1))) {
                        role[std::size_t(id)] = std::uint8_t(CylRole::ghost);
                        c.cyl_ghosts[std::size_t(i)].push_back(id);
                    }
                }
    }

    // main roles: boundary planes, cylinder-owned nodes masked, ghosts where
    // a main stencil reads into a mask
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                std::int64_t id = g.node(jx, jy, jt);
                if (c.owner[std::size_t(id)] >= 0)
                    c.main_role[std::size_t(id)] = std::uint8_t(MainRole::masked);
                else if (jt == 0)
                    c.main_role[std::size_t(id)] = std::uint8_t(MainRole::t0);
                else if (jt == g.nt)
                    c.main_role[std::size_t(id)] = std::uint8_t(MainRole::t1);
            }
    for (int i = 0; i < k; ++i) {
        for (int jt = 0; jt <= g.nt; ++jt)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx) {
                    std::int64_t id = g.node(jx, jy, jt);
                    if (c.main_role[std::size_t(id)] != std::uint8_t(MainRole::masked)) continue;
                    if (c.owner[std::size_t(id)] != i) continue;
                    if (adjacent_to(g, c.main_role, jx, jy, jt, std::uint8_t(MainRole::relax)) ||
                        adjacent_to(g, c.main_role, jx, jy, jt, std::uint8_t(MainRole::t1))) {
                        c.main_role[std::size_t(id)] = std::uint8_t(MainRole::ghost);
                        c.main_ghosts[std::size_t(i)].push_back(id);
                    }
                }
    }

    // weld list: cylinder relax nodes the main chart also needs synced (the
    // band its ghosts/edges read); kept as the full owned relax set so the
    // final sync and diagnostics have one source of truth
    for (int i = 0; i < k; ++i)
        for (std::int64_t id = 0; id < g.total_nodes(); ++id)
            if (c.cyl_role[std::size_t(i)][std::size_t(id)] == std::uint8_t(CylRole::relax) ||
                c.cyl_role[std::size_t(i)][std::size_t(id)] == std::uint8_t(CylRole::t1))
                c.weld[std::size_t(i)].push_back(id);

    return ch;
}

}  // namespace bogo
