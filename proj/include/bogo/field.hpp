#pragma once
#include <string>
#include <vector>

#include "bogo/grid.hpp"
#include "bogo/mat2.hpp"

namespace bogo {

enum class FieldKind { real_scalar, complex_scalar, matrix2 };

inline int components_of(FieldKind k) {
    switch (k) {
        case FieldKind::real_scalar: return 1;
        case FieldKind::complex_scalar: return 2;
        case FieldKind::matrix2: return 8;
    }
    return 0;
}
const char *kind_name(FieldKind k);
FieldKind kind_from_name(const std::string &s);

// Values on the full node set of a Grid, t-major, little-endian f64 per
// component (complex: re,im; matrix2: row-major complex entries).
struct LatticeField {
    FieldKind kind = FieldKind::real_scalar;
    int n = 0, nt = 0;
    double period = 1.0;
    std::vector<double> data;

    LatticeField() = default;
    LatticeField(const Grid &g, FieldKind k) : kind(k), n(g.n), nt(g.nt), period(g.period) {
        data.assign(std::size_t(g.total_nodes()) * components_of(k), 0.0);
    }

    std::int64_t slice_nodes() const { return std::int64_t(n) * n; }
    std::int64_t total_nodes() const { return slice_nodes() * (nt + 1); }
    std::int64_t node(int jx, int jy, int jt) const {
        return (std::int64_t(jt) * n + jy) * n + jx;
    }

    double &re(std::int64_t node_idx) { return data[node_idx]; }
    double re(std::int64_t node_idx) const { return data[node_idx]; }

    cplx get_c(std::int64_t node_idx) const {
        return cplx(data[2 * node_idx], data[2 * node_idx + 1]);
    }
    void set_c(std::int64_t node_idx, cplx v) {
        data[2 * node_idx] = v.real();
        data[2 * node_idx + 1] = v.imag();
    }

    Mat2 get_m(std::int64_t node_idx) const {
        const double *p = data.data() + 8 * node_idx;
        return Mat2{{cplx(p[0], p[1]), cplx(p[2], p[3]), cplx(p[4], p[5]), cplx(p[6], p[7])}};
    }
    void set_m(std::int64_t node_idx, const Mat2 &m) {
        double *p = data.data() + 8 * node_idx;
        for (int i = 0; i < 4; ++i) {
            p[2 * i] = m.a[i].real();
            p[2 * i + 1] = m.a[i].imag();
        }
    }

    // max over nodes of ||M - M†||_F; fields flagged hermitian must stay < 1e-12
    double max_herm_defect() const;
    double max_abs() const;
};

// One file: u64 little-endian header length, JSON header
// {kind, n_sigma, n_t, period, component_count, byte_order:"LE", dtype:"f64"},
// then the raw blob. Every module reuses this container.
void save_field(const LatticeField &f, const std::string &path);
LatticeField load_field(const std::string &path);

// elementwise helpers used all over the test code
LatticeField lin_comb(double ca, const LatticeField &a, double cb, const LatticeField &b);
double max_abs_diff(const LatticeField &a, const LatticeField &b);

}  // namespace bogo
