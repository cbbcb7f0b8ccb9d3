#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "bogo/loopgroup.hpp"

using namespace bogo;

static LaurentPoly poly(int lo, std::vector<cplx> cs) {
    LaurentPoly p;
    p.lo = lo;
    p.coeff = std::move(cs);
    p.trim();
    return p;
}

// dense evaluation of a Laurent matrix at a point
static std::vector<cplx> mat_eval(const LaurentMatrix &m, cplx z) {
    std::vector<cplx> v(std::size_t(m.dim) * m.dim);
    for (int r = 0; r < m.dim; ++r)
        for (int c = 0; c < m.dim; ++c) v[std::size_t(r) * m.dim + c] = m.at(r, c).eval(z);
    return v;
}

static double mat_diff(const LaurentMatrix &a, const LaurentMatrix &b) {
    REQUIRE(a.dim == b.dim);
    double worst = 0;
    for (std::size_t i = 0; i < a.e.size(); ++i)
        worst = std::max(worst, max_coeff_diff(a.e[i], b.e[i]));
    return worst;
}

TEST_CASE("laurent arithmetic: alignment, convolution, evaluation") {
    LaurentPoly a = poly(-1, {3, 1});        // 3/z + 1
    LaurentPoly b = poly(1, {1});            // z
    LaurentPoly s = a + b;
    CHECK(s.lo == -1);
    CHECK(s.at(-1) == cplx(3));
    CHECK(s.at(0) == cplx(1));
    CHECK(s.at(1) == cplx(1));
    LaurentPoly p = a * b;                   // 3 + z
    CHECK(p.lo == 0);
    CHECK(p.at(0) == cplx(3));
    CHECK(p.at(1) == cplx(1));
    CHECK((a - a).is_zero());
    cplx z(0.3, 0.4);
    CHECK(std::abs(a.eval(z) - (cplx(3) / z + cplx(1))) < 1e-14);
    CHECK(std::abs(poly(-2, {1}).eval(z) - cplx(1) / (z * z)) < 1e-14);
}

TEST_CASE("cocharacter: diagonal monomials, homomorphism, adjoint for half-integers") {
    LaurentMatrix l1 = cocharacter({2, Group::SU2});
    CHECK(l1.dim == 2);
    CHECK(max_coeff_diff(l1.at(0, 0), poly(1, {1})) == 0.0);
    CHECK(max_coeff_diff(l1.at(1, 1), poly(-1, {1})) == 0.0);
    CHECK(l1.at(0, 1).is_zero());

    LaurentMatrix l0 = cocharacter({0, Group::SU2});
    CHECK(mat_diff(l0, LaurentMatrix::identity(2, Group::SU2)) == 0.0);

    // half-integer weight is single-valued only in the adjoint
    LaurentMatrix lh = cocharacter({1, Group::PSU2});
    CHECK(lh.dim == 3);
    CHECK(max_coeff_diff(lh.at(0, 0), poly(1, {1})) == 0.0);
    CHECK(max_coeff_diff(lh.at(1, 1), poly(0, {1})) == 0.0);
    CHECK(max_coeff_diff(lh.at(2, 2), poly(-1, {1})) == 0.0);
    CHECK(lh.at(0, 1).is_zero());
    CHECK(lh.at(1, 2).is_zero());

    // group law checked pointwise: lambda(z1 z2) = lambda(z1) lambda(z2)
    std::mt19937_64 rng(7);
    auto pt = [&] {
        auto u = [&] { return 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0; };
        return cplx(0.5 + 0.4 * u(), 0.4 * u());
    };
    for (const Weight &w : {Weight{4, Group::SU2}, Weight{3, Group::PSU2}}) {
        LaurentMatrix lam = cocharacter(w);
        for (int trial = 0; trial < 10; ++trial) {
            cplx z1 = pt(), z2 = pt();
            auto lhs = mat_eval(lam, z1 * z2);
            auto a = mat_eval(lam, z1), b = mat_eval(lam, z2);
            double worst = 0;
            for (int r = 0; r < lam.dim; ++r)
                for (int c = 0; c < lam.dim; ++c) {
                    cplx acc = 0;
                    for (int k = 0; k < lam.dim; ++k)
                        acc += a[std::size_t(r) * lam.dim + k] * b[std::size_t(k) * lam.dim + c];
                    worst = std::max(worst, std::abs(acc - lhs[std::size_t(r) * lam.dim + c]));
                }
            CHECK(worst < 1e-11);  // rounding of repeated-multiplication powers
        }
    }
}

TEST_CASE("weight validation: parity and sign rules") {
    CHECK_THROWS_WITH_AS(validate_weight({1, Group::SU2}), "SU(2) weight must be an integer",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(validate_weight({-2, Group::SU2}), "weight must be non-negative",
                         std::invalid_argument);
    CHECK_NOTHROW(validate_weight({1, Group::PSU2}));
    CHECK_NOTHROW(validate_weight({4, Group::SU2}));
}

TEST_CASE("weight_of on exact loops: valuation scan with guard band") {
    CHECK(weight_of(cocharacter({4, Group::SU2})).two_m == 4);
    CHECK(weight_of(LaurentMatrix::identity(2, Group::SU2)).two_m == 0);

    // unipotent times cocharacter: expansion has an exact frozen form
    LaurentMatrix p = LaurentMatrix::identity(2, Group::SU2);
    p.at(0, 1) = poly(0, {3, 1});  // 3 + z
    LaurentMatrix gamma = p * cocharacter({2, Group::SU2});
    CHECK(max_coeff_diff(gamma.at(0, 0), poly(1, {1})) == 0.0);
    CHECK(max_coeff_diff(gamma.at(0, 1), poly(-1, {3, 1})) == 0.0);
    CHECK(gamma.at(1, 0).is_zero());
    CHECK(max_coeff_diff(gamma.at(1, 1), poly(-1, {1})) == 0.0);
    CHECK(weight_of(gamma).two_m == 2);

    // adjoint slope is halved: diag(z^2m, 1, z^-2m) still reports m
    CHECK(weight_of(cocharacter({3, Group::PSU2})).two_m == 3);
    LaurentMatrix u = LaurentMatrix::identity(2, Group::PSU2);
    u.at(0, 1) = poly(1, {0.7});
    CHECK(weight_of(adjoint_rep(u) * cocharacter({1, Group::PSU2})).two_m == 1);

    // a barely-significant coefficient below the floor's guard band is refused
    LaurentMatrix amb = LaurentMatrix::identity(2, Group::SU2);
    amb.at(0, 1) = poly(-1, {cplx(3e-9)});
    CHECK_THROWS_WITH_AS(weight_of(amb), "ambiguous valuation", std::runtime_error);
    // well clear of the band: counted
    LaurentMatrix clean = LaurentMatrix::identity(2, Group::SU2);
    clean.at(0, 1) = poly(-1, {cplx(1e-3)});
    CHECK(weight_of(clean).two_m == 2);

    LaurentMatrix zero;
    zero.e.assign(4, LaurentPoly{});
    CHECK_THROWS_WITH_AS(weight_of(zero), "loop is identically zero", std::invalid_argument);
}

TEST_CASE("weight_of on sampled loops: Fourier valuation and det winding") {
    SampledLoop l = sample_matrix(cocharacter({4, Group::SU2}), cplx(0.2, 0.1), 0.5, 128);
    int wind = 99;
    Weight w = weight_of(l, &wind);
    CHECK(w.two_m == 4);
    CHECK(wind == 0);

    // adjoint sampled loop reports the half-integer weight
    SampledLoop la = sample_matrix(cocharacter({3, Group::PSU2}), cplx(0), 0.5, 128);
    CHECK(weight_of(la).two_m == 3);

    // non-unimodular determinant shows up as winding, not weight
    LaurentMatrix gl = LaurentMatrix::identity(2, Group::SU2);
    gl.at(0, 0) = poly(1, {1});  // diag(z, 1)
    SampledLoop lg = sample_matrix(gl, cplx(0), 0.5, 128);
    weight_of(lg, &wind);
    CHECK(wind == 1);

    // straddling the sampled guard band is refused
    LaurentMatrix amb = LaurentMatrix::identity(2, Group::SU2);
    amb.at(0, 1) = poly(-1, {cplx(1.5e-6)});  // 3e-6 after the 0.5-radius boost
    SampledLoop ls = sample_matrix(amb, cplx(0), 0.5, 128);
    CHECK_THROWS_WITH_AS(weight_of(ls), "ambiguous valuation", std::runtime_error);

    SampledLoop bad = sample_matrix(cocharacter({2, Group::SU2}), cplx(0), 0.5, 128);
    bad.n = 100;
    bad.a.resize(std::size_t(100) * 4);
    CHECK_THROWS_WITH_AS(validate_loop(bad), "sample count must be a power of two >= 64",
                         std::invalid_argument);
}

TEST_CASE("same_class: right L+ action invisible, negative modes and strata visible") {
    LaurentMatrix lam = cocharacter({2, Group::SU2});
    SampledLoop g1 = sample_matrix(lam, cplx(0), 0.5, 256);

    LaurentMatrix plus = LaurentMatrix::identity(2, Group::SU2);
    plus.at(0, 1) = poly(1, {1});  // I + z E12
    SampledLoop g2 = sample_matrix(lam * plus, cplx(0), 0.5, 256);
    ClassCompare cc = same_class(g1, g2);
    CHECK(cc.same);
    CHECK(cc.defect < 1e-10);

    // different strata disagree
    SampledLoop id = sample_matrix(LaurentMatrix::identity(2, Group::SU2), cplx(0), 0.5, 256);
    CHECK_FALSE(same_class(g1, id).same);

    // explicit negative mode: p = I + z^-1 E12 carries Fourier L2 mass
    // (1/eps^2) / (2 + 1/eps^2) at negative indices; eps = 0.5 gives 2/3
    LaurentMatrix minus = LaurentMatrix::identity(2, Group::SU2);
    minus.at(0, 1) = poly(-1, {1});
    SampledLoop g3 = sample_matrix(lam * minus, cplx(0), 0.5, 256);
    ClassCompare bad = same_class(g1, g3);
    CHECK_FALSE(bad.same);
    CHECK(bad.defect == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    CHECK_THROWS_WITH_AS(same_class(g1, sample_matrix(lam, cplx(0), 0.4, 256)),
                         "loops sampled on different circles", std::invalid_argument);
    CHECK_THROWS_WITH_AS(same_class(g1, sample_matrix(lam, cplx(0), 0.5, 128)),
                         "loop shape mismatch", std::invalid_argument);
}

TEST_CASE("same_class is an equivalence relation on a generated sample set") {
    LaurentMatrix ga = random_stratum_element({2, Group::SU2}, 2, 11);
    LaurentMatrix pb = LaurentMatrix::identity(2, Group::SU2);
    pb.at(0, 1) = poly(1, {cplx(0.8, -0.1)});
    LaurentMatrix pc = LaurentMatrix::identity(2, Group::SU2);
    pc.at(1, 0) = poly(2, {cplx(0.0, 0.4)});
    SampledLoop a = sample_matrix(ga, cplx(0), 0.5, 256);
    SampledLoop b = sample_matrix(ga * pb, cplx(0), 0.5, 256);
    SampledLoop c = sample_matrix(ga * pb * pc, cplx(0), 0.5, 256);

    CHECK(same_class(a, a).defect < 1e-12);
    ClassCompare ab = same_class(a, b), ba = same_class(b, a);
    CHECK(ab.same);
    CHECK(ba.same);
    ClassCompare bc = same_class(b, c), ac = same_class(a, c);
    CHECK(bc.same);
    CHECK(ac.same);
    CHECK(ac.defect < 2 * (ab.defect + bc.defect) + 1e-9);

    // and on the adjoint (3x3) representation, which also exercises the
    // 3x3 samplewise inversion path
    LaurentMatrix g3 = random_stratum_element({3, Group::PSU2}, 2, 12);
    LaurentMatrix u = LaurentMatrix::identity(2, Group::PSU2);
    u.at(0, 1) = poly(1, {0.5});
    SampledLoop x = sample_matrix(g3, cplx(0), 0.5, 256);
    SampledLoop y = sample_matrix(g3 * adjoint_rep(u), cplx(0), 0.5, 256);
    ClassCompare xy = same_class(x, y);
    CHECK(xy.same);
    CHECK(xy.defect < 1e-9);
    CHECK_FALSE(same_class(x, sample_matrix(cocharacter({1, Group::PSU2}), cplx(0), 0.5, 256)).same);
}

TEST_CASE("stratum_dim and dominance") {
    CHECK(stratum_dim({2, Group::SU2}) == 2);
    CHECK(stratum_dim({1, Group::PSU2}) == 1);
    CHECK(stratum_dim({0, Group::SU2}) == 0);

    CHECK(dominance({0, Group::SU2}, {2, Group::SU2}));
    CHECK(dominance({2, Group::SU2}, {2, Group::SU2}));
    CHECK_FALSE(dominance({4, Group::SU2}, {2, Group::SU2}));
    CHECK(dominance({1, Group::PSU2}, {3, Group::PSU2}));
    CHECK_FALSE(dominance({0, Group::PSU2}, {1, Group::PSU2}));  // parity flips under bubbling
    CHECK_THROWS_WITH_AS(dominance({0, Group::SU2}, {1, Group::PSU2}),
                         "dominance requires the same group", std::invalid_argument);
}

TEST_CASE("reparametrize: identity map, quadratic map, exact substitution oracle") {
    LaurentMatrix lam = cocharacter({2, Group::SU2});

    SampledLoop direct = sample_matrix(lam, cplx(0), 0.4, 256);
    SampledLoop same = reparametrize(lam, {cplx(1)});
    double worst = 0;
    for (std::size_t i = 0; i < same.a.size(); ++i)
        worst = std::max(worst, std::abs(same.a[i] - direct.a[i]));
    CHECK(worst < 1e-14);

    // z(w) = w + 0.3 w^2 keeps the weight (coordinate independence)
    CHECK(weight_of(reparametrize(lam, {cplx(1), cplx(0.3)})).two_m == 2);

    // z(w) = 2w: resampled form equals the exact substituted matrix
    SampledLoop resampled = reparametrize(lam, {cplx(2)});
    LaurentMatrix subst = LaurentMatrix::identity(2, Group::SU2);
    subst.at(0, 0) = poly(1, {2});
    subst.at(1, 1) = poly(-1, {0.5});
    ClassCompare cc = same_class(resampled, sample_matrix(subst, cplx(0), 0.4, 256));
    CHECK(cc.same);
    CHECK(cc.defect < 1e-10);

    CHECK_THROWS_WITH_AS(reparametrize(lam, {cplx(0), cplx(1)}), "z'(0) must be nonzero",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(reparametrize(lam, {cplx(1), cplx(-2.5)}), "z(w) hits 0 on the circle",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(reparametrize(lam, {cplx(3)}), "z(w) leaves the domain on the circle",
                         std::invalid_argument);
}

TEST_CASE("random stratum elements: exact weight recovery, unit det, reproducibility") {
    // the oracle is the exact valuation scan on the symbolic product
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        int m = int(seed % 3);
        int deg = int(seed % 6);
        LaurentMatrix g = random_stratum_element({2 * m, Group::SU2}, deg, seed);
        CHECK(weight_of(g).two_m == 2 * m);
        CHECK(det_one_defect(g) < 1e-10);
    }
    // adjoint path for half-integer weights
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        LaurentMatrix g = random_stratum_element({3, Group::PSU2}, int(seed % 4), seed);
        CHECK(g.dim == 3);
        CHECK(weight_of(g).two_m == 3);
        CHECK(det_one_defect(g) < 1e-9);
    }

    LaurentMatrix r1 = random_stratum_element({2, Group::SU2}, 3, 42);
    LaurentMatrix r2 = random_stratum_element({2, Group::SU2}, 3, 42);
    CHECK(mat_diff(r1, r2) == 0.0);
    LaurentMatrix r3 = random_stratum_element({2, Group::SU2}, 3, 43);
    CHECK(mat_diff(r1, r3) > 1e-6);
}

TEST_CASE("weight is a class function: constant left factors never move it") {
    std::mt19937_64 rng(5);
    auto u = [&] { return 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0; };
    for (int trial = 0; trial < 100; ++trial) {
        int m = trial % 3;
        LaurentMatrix g = random_stratum_element({2 * m, Group::SU2}, trial % 6, 1000 + trial);
        LaurentMatrix c = LaurentMatrix::identity(2, Group::SU2);
        for (int i = 0; i < 4; ++i) c.e[std::size_t(i)] = LaurentPoly::constant(cplx(u(), u()));
        cplx d = (c.at(0, 0) * c.at(1, 1) - c.at(0, 1) * c.at(1, 0)).at(0);
        if (std::abs(d) < 0.05) continue;  // skip near-singular draws
        CHECK(weight_of(c * g).two_m == 2 * m);
    }
}

TEST_CASE("weight survives 100 random univalent coordinate changes") {
    std::mt19937_64 rng(9);
    auto u = [&] { return 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0; };
    for (int trial = 0; trial < 100; ++trial) {
        int m = trial % 3;
        LaurentMatrix g = random_stratum_element({2 * m, Group::SU2}, trial % 4, 2000 + trial);
        // w + a w^2 + b w^3 with |a|,|b| <= 0.3 is univalent on |w| <= 0.4
        std::vector<cplx> zw = {cplx(1), 0.3 * cplx(u(), u()), 0.3 * cplx(u(), u())};
        if (trial % 2 == 0) zw.pop_back();
        CHECK(weight_of(reparametrize(g, zw)).two_m == 2 * m);
    }
}

TEST_CASE("hecke_apply: cocharacter products and weight addition") {
    LaurentMatrix g = hecke_apply(LaurentMatrix::identity(2, Group::SU2), {2, Group::SU2});
    CHECK(mat_diff(g, cocharacter({2, Group::SU2})) == 0.0);

    LaurentMatrix twice = hecke_apply(g, {4, Group::SU2});  // weights add for diagonals
    CHECK(weight_of(twice).two_m == 6);
    CHECK(max_coeff_diff(twice.at(0, 0), poly(3, {1})) == 0.0);

    LaurentMatrix q = LaurentMatrix::identity(2, Group::SU2);
    q.at(0, 1) = poly(1, {0.7});
    CHECK(weight_of(hecke_apply(q, {2, Group::SU2})).two_m == 2);

    CHECK_THROWS_WITH_AS(hecke_apply(q, {1, Group::PSU2}),
                         "transition dimension does not match the weight representation",
                         std::invalid_argument);
}

TEST_CASE("serialization: laurent JSON and sampled-loop blob round-trip") {
    namespace fs = std::filesystem;
    std::string dir = (fs::temp_directory_path() / "bogo_loop_rt").string();
    fs::create_directories(dir);

    LaurentMatrix g = random_stratum_element({4, Group::SU2}, 5, 77);
    save_laurent(g, dir + "/g.json");
    LaurentMatrix back = load_laurent(dir + "/g.json");
    CHECK(back.dim == g.dim);
    CHECK(back.group == g.group);
    CHECK(mat_diff(back, g) == 0.0);

    SampledLoop l = sample_matrix(g, cplx(0.25, 0.75), 0.3, 128);
    save_loop(l, dir + "/l.bin");
    SampledLoop lb = load_loop(dir + "/l.bin");
    CHECK(lb.n == l.n);
    CHECK(lb.radius == l.radius);
    CHECK(lb.center == l.center);
    double worst = 0;
    for (std::size_t i = 0; i < l.a.size(); ++i) worst = std::max(worst, std::abs(l.a[i] - lb.a[i]));
    CHECK(worst == 0.0);
    fs::remove_all(dir);
}
