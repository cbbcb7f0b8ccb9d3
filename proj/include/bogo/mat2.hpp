#pragma once
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace bogo {

using cplx = std::complex<double>;

// Complex 2x2 matrix, row-major. Small enough to live in registers; everything
// is inline and by value.
struct Mat2 {
    std::array<cplx, 4> a{};  // [m00, m01, m10, m11]

    static Mat2 identity() { return Mat2{{cplx(1), cplx(0), cplx(0), cplx(1)}}; }
    static Mat2 zero() { return Mat2{}; }
    static Mat2 diag(cplx d0, cplx d1) { return Mat2{{d0, cplx(0), cplx(0), d1}}; }

    cplx &operator()(int r, int c) { return a[2 * r + c]; }
    const cplx &operator()(int r, int c) const { return a[2 * r + c]; }

    Mat2 operator+(const Mat2 &o) const {
        return Mat2{{a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3]}};
    }
    Mat2 operator-(const Mat2 &o) const {
        return Mat2{{a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3]}};
    }
    Mat2 operator-() const { return Mat2{{-a[0], -a[1], -a[2], -a[3]}}; }
    Mat2 operator*(const Mat2 &o) const {
        return Mat2{{a[0] * o.a[0] + a[1] * o.a[2], a[0] * o.a[1] + a[1] * o.a[3],
                     a[2] * o.a[0] + a[3] * o.a[2], a[2] * o.a[1] + a[3] * o.a[3]}};
    }
    Mat2 operator*(cplx s) const { return Mat2{{a[0] * s, a[1] * s, a[2] * s, a[3] * s}}; }
    Mat2 operator*(double s) const { return *this * cplx(s); }
    Mat2 &operator+=(const Mat2 &o) {
        for (int i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat2 &operator-=(const Mat2 &o) {
        for (int i = 0; i < 4; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat2 &operator*=(cplx s) {
        for (auto &x : a) x *= s;
        return *this;
    }

    Mat2 adjoint() const {
        return Mat2{{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}};
    }
    cplx det() const { return a[0] * a[3] - a[1] * a[2]; }
    cplx trace() const { return a[0] + a[3]; }
    Mat2 inverse() const {
        cplx d = det();
        return Mat2{{a[3] / d, -a[1] / d, -a[2] / d, a[0] / d}};
    }
    double norm_fro() const {
        double s = 0;
        for (const auto &x : a) s += std::norm(x);
        return std::sqrt(s);
    }
    // largest singular value (spectral norm), closed form via M†M eigenvalues
    double norm_op() const {
        double g00 = std::norm(a[0]) + std::norm(a[2]);
        double g11 = std::norm(a[1]) + std::norm(a[3]);
        cplx g01 = std::conj(a[0]) * a[1] + std::conj(a[2]) * a[3];
        double tr = g00 + g11;
        double disc = std::sqrt(std::max(0.0, (g00 - g11) * (g00 - g11) / 4 + std::norm(g01)));
        return std::sqrt(std::max(0.0, tr / 2 + disc));
    }
    // both singular values, descending
    std::array<double, 2> singular_values() const {
        double g00 = std::norm(a[0]) + std::norm(a[2]);
        double g11 = std::norm(a[1]) + std::norm(a[3]);
        cplx g01 = std::conj(a[0]) * a[1] + std::conj(a[2]) * a[3];
        double mid = (g00 + g11) / 2;
        double disc = std::sqrt(std::max(0.0, (g00 - g11) * (g00 - g11) / 4 + std::norm(g01)));
        return {std::sqrt(std::max(0.0, mid + disc)), std::sqrt(std::max(0.0, mid - disc))};
    }

    Mat2 hermitize() const { return (*this + adjoint()) * 0.5; }
    double herm_defect() const { return (*this - adjoint()).norm_fro(); }
    double antiherm_defect() const { return (*this + adjoint()).norm_fro(); }
    bool is_spd() const {
        // hermitian assumed; positive definite iff trace>0 and det>0
        return a[0].real() > 0 && det().real() > 0;
    }
};

inline Mat2 operator*(cplx s, const Mat2 &m) { return m * s; }
inline Mat2 operator*(double s, const Mat2 &m) { return m * cplx(s); }
inline Mat2 commutator(const Mat2 &x, const Mat2 &y) { return x * y - y * x; }

// Positive square root of an SPD 2x2 matrix:
// sqrt(H) = (H + sqrt(det H)·I) / sqrt(tr H + 2 sqrt(det H)).
inline Mat2 sqrt_spd(const Mat2 &h) {
    double d = h.det().real();
    double tr = h.trace().real();
    if (!(d > 0) || !(tr > 0)) throw std::domain_error("sqrt_spd: matrix not positive definite");
    double sd = std::sqrt(d);
    double denom = std::sqrt(tr + 2 * sd);
    Mat2 r = h;
    r.a[0] += sd;
    r.a[3] += sd;
    return r * (1.0 / denom);
}

// Projection used by the relaxation sweep: hermitize, then scale to det 1.
// Throws if positivity was lost (caller's restart policy handles it).
inline Mat2 project_sl_hermitian(const Mat2 &m) {
    Mat2 h = m.hermitize();
    double d = h.det().real();
    double tr = h.trace().real();
    if (!(d > 0) || !(tr > 0)) throw std::domain_error("positivity lost");
    return h * (1.0 / std::sqrt(d));
}

}  // namespace bogo
