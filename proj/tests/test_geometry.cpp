#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "bogo/geometry.hpp"

using namespace bogo;

static Grid grid_n(int n, int nt, double period = 1.0, double rho = 0.25) {
    GridSpec s;
    s.n_sigma = n;
    s.n_t = nt;
    s.period = period;
    s.rho.assign(std::size_t(n) * n, rho);
    return build_grid(s);
}

TEST_CASE("build_grid validates and exposes spacings") {
    Grid g = grid_n(32, 32);
    CHECK(g.total_nodes() == 32 * 32 * 33);
    CHECK(g.h == doctest::Approx(1.0 / 32));
    CHECK(g.ht == doctest::Approx(1.0 / 32));

    GridSpec bad;
    bad.n_sigma = 7;
    bad.n_t = 32;
    CHECK_THROWS_WITH_AS(build_grid(bad), "n_sigma not power of two", std::invalid_argument);
    // even 2^a·3^b·5^c sizes are accepted (the nonabelian checks use 24/48);
    // odd or 7-smooth-violating sizes are not
    CHECK_NOTHROW(grid_n(24, 24));
    CHECK_NOTHROW(grid_n(48, 48));
    bad.n_sigma = 14;
    CHECK_THROWS_AS(build_grid(bad), std::invalid_argument);
    bad.n_sigma = 9;
    CHECK_THROWS_AS(build_grid(bad), std::invalid_argument);

    GridSpec zrho;
    zrho.n_sigma = 8;
    zrho.n_t = 8;
    zrho.rho.assign(64, 0.25);
    zrho.rho[5] = 0.0;
    CHECK_THROWS_WITH_AS(build_grid(zrho), "rho not positive", std::invalid_argument);
}

TEST_CASE("min_image_distance: flat metric, wraparound, rho scaling") {
    Grid g = grid_n(32, 32);
    CHECK(min_image_distance(g, {cplx(0, 0), 0.5}, {cplx(0.1, 0), 0.5}) ==
          doctest::Approx(0.1).epsilon(1e-12));
    CHECK(min_image_distance(g, {cplx(0.95, 0), 0.5}, {cplx(0.05, 0), 0.5}) ==
          doctest::Approx(0.1).epsilon(1e-12));
    Grid g1 = grid_n(32, 32, 1.0, 1.0);
    CHECK(min_image_distance(g1, {cplx(0.1, 0), 0.5}, {cplx(0, 0), 0.5}) ==
          doctest::Approx(0.2).epsilon(1e-12));
    // symmetry and identity
    GridPoint p{cplx(0.3, 0.7), 0.25}, q{cplx(0.9, 0.1), 0.75};
    CHECK(min_image_distance(g, p, q) == doctest::Approx(min_image_distance(g, q, p)));
    CHECK(min_image_distance(g, p, p) == 0.0);
}

TEST_CASE("spectral derivatives: mode-wise exactness, eigenfunctions, dt") {
    Grid g = grid_n(32, 32);
    // dz and dzbar act on the mode e^{i(kx·x+ky·y)} by multiplication with
    // (i·kx ± ky)/2 exactly; this is the property that makes dzbar annihilate
    // holomorphic data (no nonconstant doubly periodic holomorphic function
    // exists, so the operator identity is the testable form on the torus).
    for (auto [fx, fy] : {std::pair{1, 0}, {0, 2}, {3, -2}, {-4, 5}}) {
        LatticeField f(g, FieldKind::complex_scalar);
        double kx = 2 * M_PI * fx, ky = 2 * M_PI * fy;
        for (int jt = 0; jt <= g.nt; ++jt)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx)
                    f.set_c(f.node(jx, jy, jt),
                            std::exp(cplx(0, kx * g.x_of(jx) + ky * g.y_of(jy))));
        LatticeField dbar = derivative(g, f, Deriv::dzbar);
        LatticeField dz2 = derivative(g, f, Deriv::dz);
        cplx mbar = cplx(-ky / 2, kx / 2), mz = cplx(ky / 2, kx / 2);
        double w1 = 0, w2 = 0;
        for (std::int64_t i = 0; i < f.total_nodes(); ++i) {
            w1 = std::max(w1, std::abs(dbar.get_c(i) - mbar * f.get_c(i)));
            w2 = std::max(w2, std::abs(dz2.get_c(i) - mz * f.get_c(i)));
        }
        CHECK(w1 < 1e-10);
        CHECK(w2 < 1e-10);
    }
    // constants are annihilated by both
    LatticeField cst(g, FieldKind::complex_scalar);
    for (std::int64_t i = 0; i < cst.total_nodes(); ++i) cst.set_c(i, cplx(2.5, -1.0));
    CHECK(derivative(g, cst, Deriv::dzbar).max_abs() < 1e-12);
    CHECK(derivative(g, cst, Deriv::dz).max_abs() < 1e-12);

    // d_z exp(2*pi*i*x) = pi*i*exp(2*pi*i*x)
    LatticeField e(g, FieldKind::complex_scalar);
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx)
                e.set_c(e.node(jx, jy, jt), std::exp(cplx(0, 2 * M_PI * g.x_of(jx))));
    LatticeField dz = derivative(g, e, Deriv::dz);
    double worst = 0;
    for (std::int64_t i = 0; i < e.total_nodes(); ++i)
        worst = std::max(worst, std::abs(dz.get_c(i) - cplx(0, M_PI) * e.get_c(i)));
    CHECK(worst < 1e-10);

    // dt of t^2: centered and one-sided second-order stencils are exact on quadratics
    LatticeField q(g, FieldKind::real_scalar);
    for (int jt = 0; jt <= g.nt; ++jt)
        for (std::int64_t i = 0; i < g.slice_nodes(); ++i)
            q.re(std::int64_t(jt) * g.slice_nodes() + i) = g.t_of(jt) * g.t_of(jt);
    LatticeField dq = derivative(g, q, Deriv::dt);
    double w2 = 0;
    for (int jt = 0; jt <= g.nt; ++jt)
        w2 = std::max(w2, std::abs(dq.re(std::int64_t(jt) * g.slice_nodes()) - 2 * g.t_of(jt)));
    CHECK(w2 < 1e-11);
    CHECK(dq.re(g.node(0, 0, g.nt / 2)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("laplacian eigenfunctions") {
    Grid g = grid_n(32, 32);
    LatticeField f(g, FieldKind::real_scalar);
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx)
                f.re(f.node(jx, jy, jt)) =
                    std::cos(2 * M_PI * g.x_of(jx)) * std::cos(M_PI * g.t_of(jt) / 2);
    LatticeField lap = laplacian(g, f);
    double lam = -(4 * M_PI * M_PI + M_PI * M_PI / 4);
    double worst = 0;
    for (std::int64_t i = 0; i < f.total_nodes(); ++i)
        worst = std::max(worst, std::abs(lap.re(i) - lam * f.re(i)));
    CHECK(worst < 10 * g.ht * g.ht);  // O(h_t^2) from the t stencil; sigma part is spectral

    LatticeField c(g, FieldKind::real_scalar);
    for (auto &v : c.data) v = 3.7;
    CHECK(laplacian(g, c).max_abs() < 1e-10);

    Grid g1 = grid_n(32, 32, 1.0, 1.0);
    LatticeField e(g1, FieldKind::real_scalar);
    for (int jt = 0; jt <= g1.nt; ++jt)
        for (int jy = 0; jy < g1.n; ++jy)
            for (int jx = 0; jx < g1.n; ++jx)
                e.re(e.node(jx, jy, jt)) = std::cos(2 * M_PI * g1.x_of(jx));
    LatticeField lape = laplacian(g1, e);
    double w1 = 0;
    for (std::int64_t i = 0; i < e.total_nodes(); ++i)
        w1 = std::max(w1, std::abs(lape.re(i) + M_PI * M_PI * e.re(i)));
    CHECK(w1 < 1e-9);
}

TEST_CASE("linearity of derivative and laplacian") {
    Grid g = grid_n(16, 16);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> nd;
    LatticeField a(g, FieldKind::real_scalar), b(g, FieldKind::real_scalar);
    for (auto &v : a.data) v = nd(rng);
    for (auto &v : b.data) v = nd(rng);
    LatticeField combo = lin_comb(2.5, a, -1.25, b);

    for (Deriv d : {Deriv::dz, Deriv::dzbar, Deriv::dt}) {
        LatticeField lhs = derivative(g, combo, d);
        LatticeField rhs = lin_comb(2.5, derivative(g, a, d), -1.25, derivative(g, b, d));
        CHECK(max_abs_diff(lhs, rhs) < 1e-11 * (1 + lhs.max_abs()));
    }
    LatticeField lhs = laplacian(g, combo);
    LatticeField rhs = lin_comb(2.5, laplacian(g, a), -1.25, laplacian(g, b));
    CHECK(max_abs_diff(lhs, rhs) < 1e-9 * (1 + lhs.max_abs()));
}

static LatticeField manufactured(const Grid &g) {
    // u* = cos(2*pi*x)*sin(pi*(1-t)/2): satisfies Neumann-0 at t=0, Dirichlet-0 at t=1
    LatticeField u(g, FieldKind::real_scalar);
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx)
                u.re(u.node(jx, jy, jt)) =
                    std::cos(2 * M_PI * g.x_of(jx)) * std::sin(M_PI * (1 - g.t_of(jt)) / 2);
    return u;
}

TEST_CASE("poisson_solve_mixed: uniqueness, manufactured identity, constants") {
    Grid g = grid_n(64, 64);
    EndCondition n0{EndCondition::neumann, 0.0}, d0{EndCondition::dirichlet, 0.0};

    LatticeField zero(g, FieldKind::real_scalar);
    CHECK(poisson_solve_mixed(g, zero, n0, d0).max_abs() < 1e-12);

    // discrete-source round trip: feed u*'s own discrete source and end data
    // back in and recover u*
    LatticeField u = manufactured(g);
    LatticeField src = laplacian(g, u);
    LatticeField dudt = derivative(g, u, Deriv::dt);
    EndCondition n_exact{EndCondition::neumann, 0.0,
                         std::vector<double>(dudt.data.begin(), dudt.data.begin() + g.slice_nodes())};
    LatticeField rec = poisson_solve_mixed(g, src, n_exact, d0);
    CHECK(max_abs_diff(rec, u) < 1e-8);
    // and the solver's own residual is at rounding level
    CHECK(poisson_residual(g, rec, src) < 1e-10 * (1 + src.max_abs()));
    // against the continuum end condition (homogeneous Neumann, which u*
    // satisfies exactly in the continuum but only to O(h_t^3) discretely) the
    // recovery is limited by the one-sided end row
    LatticeField rec0 = poisson_solve_mixed(g, src, n0, d0);
    CHECK(max_abs_diff(rec0, u) < 1e-5);
    CHECK(max_abs_diff(rec0, u) > 1e-9);

    EndCondition d1{EndCondition::dirichlet, 1.0};
    LatticeField one = poisson_solve_mixed(g, zero, n0, d1);
    double worst = 0;
    for (double v : one.data) worst = std::max(worst, std::abs(v - 1.0));
    CHECK(worst < 1e-10);
}

TEST_CASE("poisson after laplacian is the identity on homogeneous-bc fields") {
    Grid g = grid_n(32, 32);
    LatticeField f(g, FieldKind::real_scalar);
    for (int jt = 0; jt <= g.nt; ++jt)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx) {
                double x = g.x_of(jx), y = g.y_of(jy), t = g.t_of(jt);
                f.re(f.node(jx, jy, jt)) =
                    (std::cos(2 * M_PI * x) + 0.3 * std::sin(4 * M_PI * y)) *
                        std::cos(M_PI * t / 2) +
                    0.1 * std::cos(2 * M_PI * (x + y)) * std::cos(3 * M_PI * t / 2);
            }
    // make f satisfy the *discrete* homogeneous rows exactly: subtract
    // alpha(x,y)·t(1-t) + beta(x,y)·t², whose one-sided end derivative and top
    // value the 2nd-order stencils evaluate exactly (quadratics in t)
    LatticeField dfdt = derivative(g, f, Deriv::dt);
    std::int64_t sn = g.slice_nodes();
    for (int jt = 0; jt <= g.nt; ++jt) {
        double t = g.t_of(jt);
        for (std::int64_t i = 0; i < sn; ++i) {
            double alpha = dfdt.re(i), beta = f.re(std::int64_t(g.nt) * sn + i);
            f.re(std::int64_t(jt) * sn + i) -= alpha * t * (1 - t) + beta * t * t;
        }
    }
    EndCondition n0{EndCondition::neumann, 0.0}, d0{EndCondition::dirichlet, 0.0};
    LatticeField rec = poisson_solve_mixed(g, laplacian(g, f), n0, d0);
    CHECK(max_abs_diff(rec, f) < 1e-8 * (1 + f.max_abs()));
}

TEST_CASE("poisson second-order convergence with the analytic source") {
    EndCondition n0{EndCondition::neumann, 0.0}, d0{EndCondition::dirichlet, 0.0};
    double lam = -(4 * M_PI * M_PI + M_PI * M_PI / 4);
    auto solve_err = [&](int n) {
        Grid g = grid_n(n, n);
        LatticeField u = manufactured(g);
        LatticeField src = lin_comb(lam, u, 0.0, u);  // analytic (continuum) source
        LatticeField rec = poisson_solve_mixed(g, src, n0, d0);
        return max_abs_diff(rec, u);
    };
    double e32 = solve_err(32), e64 = solve_err(64);
    double ratio = e32 / e64;
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("pure-Neumann compatibility is enforced") {
    Grid g = grid_n(16, 16);
    EndCondition n0{EndCondition::neumann, 0.0};
    LatticeField bad(g, FieldKind::real_scalar);
    for (auto &v : bad.data) v = 1.0;  // mean source 1, zero boundary flux
    CHECK_THROWS_WITH_AS(poisson_solve_mixed(g, bad, n0, n0), "incompatible pure-Neumann problem",
                         std::invalid_argument);

    // compatible case: source with zero t-integral per the trapezoid rule
    LatticeField ok(g, FieldKind::real_scalar);
    for (int jt = 0; jt <= g.nt; ++jt)
        for (std::int64_t i = 0; i < g.slice_nodes(); ++i)
            ok.re(std::int64_t(jt) * g.slice_nodes() + i) = std::cos(2 * M_PI * g.t_of(jt));
    LatticeField u = poisson_solve_mixed(g, ok, n0, n0);
    CHECK(poisson_residual(g, u, ok) < 1e-9);
}

TEST_CASE("finite-difference sigma derivative is second order") {
    auto err_at = [&](int n) {
        Grid g = grid_n(n, 8);
        LatticeField e(g, FieldKind::complex_scalar);
        for (int jt = 0; jt <= g.nt; ++jt)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jx = 0; jx < g.n; ++jx)
                    e.set_c(e.node(jx, jy, jt), std::exp(cplx(0, 2 * M_PI * g.x_of(jx))));
        LatticeField dz = derivative_fd(g, e, Deriv::dz);
        double worst = 0;
        for (std::int64_t i = 0; i < e.total_nodes(); ++i)
            worst = std::max(worst, std::abs(dz.get_c(i) - cplx(0, M_PI) * e.get_c(i)));
        return worst;
    };
    double r = err_at(16) / err_at(32);
    CHECK(r > 3.2);
    CHECK(r < 4.8);
}

TEST_CASE("field disk container round-trips bit-exactly") {
    Grid g = grid_n(8, 8);
    LatticeField m(g, FieldKind::matrix2);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (auto &v : m.data) v = nd(rng);
    std::string path = "/tmp/bogo_geom_field_test.bin";
    save_field(m, path);
    LatticeField back = load_field(path);
    CHECK(back.kind == FieldKind::matrix2);
    CHECK(back.n == m.n);
    CHECK(back.nt == m.nt);
    CHECK(back.data == m.data);
    std::remove(path.c_str());
}

TEST_CASE("hermitian flag checker") {
    Grid g = grid_n(8, 8);
    LatticeField m(g, FieldKind::matrix2);
    for (std::int64_t i = 0; i < m.total_nodes(); ++i)
        m.set_m(i, Mat2{{cplx(2, 0), cplx(0.5, 0.25), cplx(0.5, -0.25), cplx(1, 0)}});
    CHECK(m.max_herm_defect() < 1e-12);
    Mat2 bad = m.get_m(0);
    bad(0, 1) += cplx(0, 1e-3);
    m.set_m(5, bad);
    CHECK(m.max_herm_defect() > 1e-4);
}
