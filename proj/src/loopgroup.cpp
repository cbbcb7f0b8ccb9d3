#include "bogo/loopgroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bogo/fft.hpp"

namespace bogo {

namespace {

const char *group_name(Group g) { return g == Group::SU2 ? "SU2" : "PSU2"; }

Group group_from(const std::string &s) {
    if (s == "SU2") return Group::SU2;
    if (s == "PSU2") return Group::PSU2;
    throw std::runtime_error("unknown group: " + s);
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

cplx det_small(const cplx *m, int dim) {
    if (dim == 2) return m[0] * m[3] - m[1] * m[2];
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

void inv_small(const cplx *m, int dim, cplx *out) {
    cplx d = det_small(m, dim);
    if (dim == 2) {
        out[0] = m[3] / d;
        out[1] = -m[1] / d;
        out[2] = -m[2] / d;
        out[3] = m[0] / d;
        return;
    }
    out[0] = (m[4] * m[8] - m[5] * m[7]) / d;
    out[1] = (m[2] * m[7] - m[1] * m[8]) / d;
    out[2] = (m[1] * m[5] - m[2] * m[4]) / d;
    out[3] = (m[5] * m[6] - m[3] * m[8]) / d;
    out[4] = (m[0] * m[8] - m[2] * m[6]) / d;
    out[5] = (m[2] * m[3] - m[0] * m[5]) / d;
    out[6] = (m[3] * m[7] - m[4] * m[6]) / d;
    out[7] = (m[1] * m[6] - m[0] * m[7]) / d;
    out[8] = (m[0] * m[4] - m[1] * m[3]) / d;
}

double frob(const cplx *m, int sz) {
    double s = 0;
    for (int i = 0; i < sz; ++i) s += std::norm(m[i]);
    return std::sqrt(s);
}

int winding_of(const std::vector<cplx> &vals) {
    double total = 0;
    int n = int(vals.size());
    for (int j = 0; j < n; ++j) total += std::arg(vals[(j + 1) % n] / vals[j]);
    return int(std::lround(total / (2 * M_PI)));
}

// minimal exponent at which any entry's coefficient magnitude reaches thr;
// exponents / magnitudes come in ascending-exponent order
int val_at(const std::vector<double> &mag_by_exp, int lo_exp, double thr) {
    for (std::size_t i = 0; i < mag_by_exp.size(); ++i)
        if (mag_by_exp[i] >= thr) return lo_exp + int(i);
    return lo_exp + int(mag_by_exp.size());
}

// shared guarded scan: floor is relative to the matrix-wide max magnitude; if
// the answer differs between 10x-tightened and 10x-loosened floors the call is
// refused rather than guessed
int guarded_valuation(const std::vector<double> &mag_by_exp, int lo_exp, double matrix_max,
                      double rel_floor) {
    if (matrix_max <= 0) throw std::invalid_argument("loop is identically zero");
    double thr = rel_floor * matrix_max;
    int v_strict = val_at(mag_by_exp, lo_exp, 10 * thr);
    int v_loose = val_at(mag_by_exp, lo_exp, 0.1 * thr);
    if (v_strict != v_loose) throw std::runtime_error("ambiguous valuation");
    return v_strict;
}

Weight weight_from_valuation(int minval, int dim, Group group) {
    Weight w;
    w.group = group;
    w.two_m = dim == 3 ? -minval : -2 * minval;
    return w;
}

struct Rng {
    std::mt19937_64 s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    // explicit bit mapping keeps draws identical across standard libraries
    double u() { return double(s() >> 11) * 0x1.0p-53; }
    double sym() { return 2 * u() - 1; }
    cplx zc() { return cplx(sym(), sym()); }
};

LaurentPoly random_poly(Rng &r, int deg, double scale) {
    LaurentPoly p;
    p.lo = 0;
    p.coeff.resize(std::size_t(deg) + 1);
    for (auto &c : p.coeff) c = scale * r.zc();
    p.trim();
    return p;
}

LaurentMatrix unipotent(const LaurentPoly &a, bool upper) {
    LaurentMatrix m = LaurentMatrix::identity(2, Group::SU2);
    if (upper)
        m.at(0, 1) = a;
    else
        m.at(1, 0) = a;
    return m;
}

}  // namespace

void validate_loop(const SampledLoop &l) {
    if (!power_of_two(l.n) || l.n < 64)
        throw std::invalid_argument("sample count must be a power of two >= 64");
    if (l.dim != 2 && l.dim != 3) throw std::invalid_argument("loop dimension must be 2 or 3");
    if (l.a.size() != std::size_t(l.n) * l.dim * l.dim)
        throw std::invalid_argument("sample buffer size mismatch");
}

SampledLoop sample_matrix(const LaurentMatrix &m, cplx center, double radius, int n) {
    SampledLoop l;
    l.n = n;
    l.dim = m.dim;
    l.group = m.group;
    l.center = center;
    l.radius = radius;
    l.a.resize(std::size_t(n) * m.dim * m.dim);
    for (int j = 0; j < n; ++j) {
        cplx z = std::polar(radius, 2 * M_PI * j / n);
        for (int r = 0; r < m.dim; ++r)
            for (int c = 0; c < m.dim; ++c) l.at(j, r, c) = m.at(r, c).eval(z);
    }
    validate_loop(l);
    return l;
}

LaurentMatrix loop_to_laurent(const SampledLoop &l, double rel_floor) {
    validate_loop(l);
    int n = l.n, sz = l.dim * l.dim;
    // raw circle-coefficients first: the noise floor is flat on the circle,
    // so thresholding must happen before the radius^-k rescale (which blows
    // rounding dust up geometrically at high positive exponents)
    std::vector<std::vector<cplx>> raw;
    raw.assign(std::size_t(sz), std::vector<cplx>(std::size_t(n)));
    std::vector<cplx> buf, out;
    buf.resize(std::size_t(n));
    out.resize(std::size_t(n));
    double mmax = 0;
    for (int rc = 0; rc < sz; ++rc) {
        for (int j = 0; j < n; ++j) buf[std::size_t(j)] = l.a[std::size_t(j) * sz + rc];
        fft1(n, buf.data(), out.data(), -1);
        for (int k = 0; k < n; ++k) {
            raw[std::size_t(rc)][std::size_t(k)] = out[std::size_t(k)] / double(n);
            mmax = std::max(mmax, std::abs(raw[std::size_t(rc)][std::size_t(k)]));
        }
    }
    LaurentMatrix m;
    m.dim = l.dim;
    m.group = l.group;
    m.e.assign(std::size_t(sz), LaurentPoly{});
    if (mmax <= 0) return m;
    double floor = rel_floor * mmax;
    for (int rc = 0; rc < sz; ++rc) {
        int lo = 0, hi = 0;
        bool any = false;
        for (int k = 0; k < n; ++k) {
            if (std::abs(raw[std::size_t(rc)][std::size_t(k)]) <= floor) continue;
            int e = fft_freq(k, n);
            lo = any ? std::min(lo, e) : e;
            hi = any ? std::max(hi, e) : e;
            any = true;
        }
        if (!any) continue;
        LaurentPoly p;
        p.lo = lo;
        p.coeff.resize(std::size_t(hi - lo + 1));
        for (int k = 0; k < n; ++k) {
            int e = fft_freq(k, n);
            if (e < lo || e > hi) continue;
            p.coeff[std::size_t(e - lo)] =
                raw[std::size_t(rc)][std::size_t(k)] * std::pow(l.radius, -e);
        }
        m.e[std::size_t(rc)] = p;
    }
    return m;
}

LaurentMatrix cocharacter(const Weight &w) {
    validate_weight(w);
    LaurentMatrix m;
    m.group = w.group;
    if (w.two_m % 2 == 0) {
        int half = w.two_m / 2;
        m.dim = 2;
        m.e.assign(4, LaurentPoly{});
        m.at(0, 0) = LaurentPoly::monomial(1, half);
        m.at(1, 1) = LaurentPoly::monomial(1, -half);
    } else {
        m.dim = 3;
        m.e.assign(9, LaurentPoly{});
        m.at(0, 0) = LaurentPoly::monomial(1, w.two_m);
        m.at(1, 1) = LaurentPoly::constant(1);
        m.at(2, 2) = LaurentPoly::monomial(1, -w.two_m);
    }
    return m;
}

Weight weight_of(const LaurentMatrix &m) {
    int lo = 0, hi = 0;
    bool any = false;
    for (const LaurentPoly &p : m.e) {
        if (p.is_zero()) continue;
        lo = any ? std::min(lo, p.lo) : p.lo;
        hi = any ? std::max(hi, p.hi()) : p.hi();
        any = true;
    }
    if (!any) throw std::invalid_argument("loop is identically zero");
    std::vector<double> mag(std::size_t(hi - lo + 1), 0.0);
    double mmax = 0;
    for (const LaurentPoly &p : m.e)
        for (std::size_t i = 0; i < p.coeff.size(); ++i) {
            double v = std::abs(p.coeff[i]);
            mag[std::size_t(p.lo - lo) + i] = std::max(mag[std::size_t(p.lo - lo) + i], v);
            mmax = std::max(mmax, v);
        }
    int minval = guarded_valuation(mag, lo, mmax, 1e-9);
    return weight_from_valuation(minval, m.dim, m.group);
}

Weight weight_of(const SampledLoop &l, int *det_winding) {
    validate_loop(l);
    int n = l.n;
    std::vector<cplx> buf(n), out(n);
    // magnitudes by exponent, ascending from -n/2+1; bin n/2 is the Nyquist
    // exponent +n/2 under fft_freq
    int lo = -n / 2 + 1, hi = n / 2;
    std::vector<double> mag(std::size_t(hi - lo + 1), 0.0);
    double mmax = 0;
    for (int r = 0; r < l.dim; ++r)
        for (int c = 0; c < l.dim; ++c) {
            for (int j = 0; j < n; ++j) buf[std::size_t(j)] = l.at(j, r, c);
            fft1(n, buf.data(), out.data(), -1);
            for (int k = 0; k < n; ++k) {
                double v = std::abs(out[std::size_t(k)]) / n;
                int e = fft_freq(k, n);
                mag[std::size_t(e - lo)] = std::max(mag[std::size_t(e - lo)], v);
                mmax = std::max(mmax, v);
            }
        }
    if (det_winding) {
        std::vector<cplx> dets(n);
        for (int j = 0; j < n; ++j) dets[std::size_t(j)] = det_small(&l.a[(std::size_t(j)) * l.dim * l.dim], l.dim);
        *det_winding = winding_of(dets);
    }
    int minval = guarded_valuation(mag, lo, mmax, 1e-6);
    return weight_from_valuation(minval, l.dim, l.group);
}

ClassCompare same_class(const SampledLoop &g1, const SampledLoop &g2) {
    validate_loop(g1);
    validate_loop(g2);
    if (g1.n != g2.n || g1.dim != g2.dim) throw std::invalid_argument("loop shape mismatch");
    if (std::abs(g1.center - g2.center) > 1e-12 || std::abs(g1.radius - g2.radius) > 1e-12)
        throw std::invalid_argument("loops sampled on different circles");
    int n = g1.n, dim = g1.dim, sz = dim * dim;

    std::vector<cplx> p(std::size_t(n) * sz), inv(sz);
    std::vector<cplx> dets(n);
    for (int j = 0; j < n; ++j) {
        const cplx *m1 = &g1.a[std::size_t(j) * sz];
        const cplx *m2 = &g2.a[std::size_t(j) * sz];
        inv_small(m1, dim, inv.data());
        if (frob(m1, sz) * frob(inv.data(), sz) > 1e8)
            throw std::runtime_error("inversion failure on ill-conditioned samples");
        cplx *pj = &p[std::size_t(j) * sz];
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                cplx s = 0;
                for (int k = 0; k < dim; ++k) s += inv[std::size_t(r * dim + k)] * m2[k * dim + c];
                pj[r * dim + c] = s;
            }
        dets[std::size_t(j)] = det_small(pj, dim);
    }

    // L2 (Parseval) mass of p's Fourier coefficients, negative indices vs all
    std::vector<cplx> buf(n), out(n);
    double neg = 0, total = 0;
    for (int rc = 0; rc < sz; ++rc) {
        for (int j = 0; j < n; ++j) buf[std::size_t(j)] = p[std::size_t(j) * sz + rc];
        fft1(n, buf.data(), out.data(), -1);
        for (int k = 0; k < n; ++k) {
            double m = std::norm(out[std::size_t(k)]) / (double(n) * n);
            total += m;
            if (fft_freq(k, n) < 0) neg += m;
        }
    }
    ClassCompare r;
    r.defect = (total > 0 ? neg / total : 0.0) + std::abs(winding_of(dets));
    r.same = r.defect < 1e-3;
    return r;
}

int stratum_dim(const Weight &w) {
    validate_weight(w);
    return w.two_m;
}

bool dominance(const Weight &lower, const Weight &upper) {
    if (lower.group != upper.group) throw std::invalid_argument("dominance requires the same group");
    validate_weight(lower);
    validate_weight(upper);
    return lower.two_m <= upper.two_m && (upper.two_m - lower.two_m) % 2 == 0;
}

SampledLoop reparametrize(const LaurentMatrix &loop, const std::vector<cplx> &zw, double radius,
                          int n) {
    if (zw.empty() || zw[0] == cplx(0))
        throw std::invalid_argument("z'(0) must be nonzero");
    SampledLoop l;
    l.n = n;
    l.dim = loop.dim;
    l.group = loop.group;
    l.center = 0;
    l.radius = radius;
    l.a.resize(std::size_t(n) * loop.dim * loop.dim);
    for (int j = 0; j < n; ++j) {
        cplx w = std::polar(radius, 2 * M_PI * j / n);
        cplx z = 0;
        for (auto it = zw.rbegin(); it != zw.rend(); ++it) z = (z + *it) * w;
        if (std::abs(z) < 1e-12) throw std::invalid_argument("z(w) hits 0 on the circle");
        if (std::abs(z) > 1 + 1e-12)
            throw std::invalid_argument("z(w) leaves the domain on the circle");
        for (int r = 0; r < loop.dim; ++r)
            for (int c = 0; c < loop.dim; ++c) l.at(j, r, c) = loop.at(r, c).eval(z);
    }
    validate_loop(l);
    return l;
}

LaurentMatrix random_stratum_element(const Weight &w, int degree, std::uint64_t seed) {
    validate_weight(w);
    if (degree < 0) throw std::invalid_argument("degree bound must be >= 0");
    bool adj = w.two_m % 2 != 0;
    Rng rng(seed);
    int da = (degree + 2) / 3, db = (degree + 1) / 3, dc = degree / 3;
    for (int attempt = 0; attempt < 64; ++attempt) {
        cplx s = std::polar(std::exp(0.4 * rng.sym()), 0.6 * rng.sym());
        LaurentMatrix diag = LaurentMatrix::identity(2, w.group);
        diag.at(0, 0) = LaurentPoly::constant(s);
        diag.at(1, 1) = LaurentPoly::constant(cplx(1) / s);
        LaurentMatrix q = diag * unipotent(random_poly(rng, da, 0.5), true) *
                          unipotent(random_poly(rng, db, 0.5), false) *
                          unipotent(random_poly(rng, dc, 0.5), true);
        q.group = w.group;
        if (adj) q = adjoint_rep(q);
        // condition of q(0): conservative Frobenius estimate, limit from spec
        int sz = q.dim * q.dim;
        std::vector<cplx> q0(sz), q0i(sz);
        for (int i = 0; i < sz; ++i) q0[std::size_t(i)] = q.e[std::size_t(i)].at(0);
        inv_small(q0.data(), q.dim, q0i.data());
        if (frob(q0.data(), sz) * frob(q0i.data(), sz) >= 1e3) continue;
        return q * cocharacter(w);
    }
    throw std::runtime_error("random element: condition bound not met");
}

LaurentMatrix hecke_apply(const LaurentMatrix &transition, const Weight &w) {
    LaurentMatrix lam = cocharacter(w);
    if (transition.dim != lam.dim)
        throw std::invalid_argument("transition dimension does not match the weight representation");
    LaurentMatrix r = transition * lam;
    r.group = w.group;
    return r;
}

void save_loop(const SampledLoop &l, const std::string &path) {
    validate_loop(l);
    nlohmann::json hdr;
    hdr["format"] = "sampled-loop/1";
    hdr["n"] = l.n;
    hdr["dim"] = l.dim;
    hdr["group"] = group_name(l.group);
    hdr["center"] = {l.center.real(), l.center.imag()};
    hdr["radius"] = l.radius;
    hdr["byte_order"] = "LE";
    hdr["dtype"] = "f64";
    std::string hs = hdr.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    std::uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char *>(&hlen), 8);
    out.write(hs.data(), std::streamsize(hs.size()));
    out.write(reinterpret_cast<const char *>(l.a.data()),
              std::streamsize(l.a.size() * sizeof(cplx)));
    if (!out) throw std::runtime_error("short write: " + path);
}

SampledLoop load_loop(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char *>(&hlen), 8);
    if (!in || hlen > (1u << 20)) throw std::runtime_error("bad loop header: " + path);
    std::string hs(hlen, '\0');
    in.read(hs.data(), std::streamsize(hlen));
    auto hdr = nlohmann::json::parse(hs);
    if (hdr.at("format") != "sampled-loop/1") throw std::runtime_error("unsupported format in " + path);

    SampledLoop l;
    l.n = hdr.at("n").get<int>();
    l.dim = hdr.at("dim").get<int>();
    l.group = group_from(hdr.at("group").get<std::string>());
    l.center = cplx(hdr.at("center")[0].get<double>(), hdr.at("center")[1].get<double>());
    l.radius = hdr.at("radius").get<double>();
    l.a.resize(std::size_t(l.n) * l.dim * l.dim);
    in.read(reinterpret_cast<char *>(l.a.data()), std::streamsize(l.a.size() * sizeof(cplx)));
    if (!in) throw std::runtime_error("short read: " + path);
    validate_loop(l);
    return l;
}

}  // namespace bogo
