#pragma once
#include <string>
#include <vector>

#include "bogo/mat2.hpp"

namespace bogo {

// Laurent polynomial over C: coeff[i] multiplies z^(lo+i). The zero polynomial
// is the empty list. Arithmetic is plain coefficient convolution/alignment —
// exact in the polynomial-algebra sense; only exact zeros are ever trimmed, so
// cancellation dust stays visible to the valuation scan.
struct LaurentPoly {
    int lo = 0;
    std::vector<cplx> coeff;

    static LaurentPoly constant(cplx c);
    static LaurentPoly monomial(cplx c, int exponent);

    bool is_zero() const { return coeff.empty(); }
    int hi() const { return lo + int(coeff.size()) - 1; }
    cplx at(int exponent) const;
    cplx eval(cplx z) const;  // z != 0 when lo < 0
    void trim();
};

LaurentPoly operator+(const LaurentPoly &a, const LaurentPoly &b);
LaurentPoly operator-(const LaurentPoly &a, const LaurentPoly &b);
LaurentPoly operator*(const LaurentPoly &a, const LaurentPoly &b);
LaurentPoly operator*(cplx s, const LaurentPoly &a);
double max_coeff(const LaurentPoly &a);
double max_coeff_diff(const LaurentPoly &a, const LaurentPoly &b);

enum class Group { SU2, PSU2 };

// Weight of a singularity: half-integer m stored as 2m. SU(2) admits only
// integer m; PSU(2) admits half-integers. m >= 0 is the canonical
// representative of the conjugacy class.
struct Weight {
    int two_m = 0;
    Group group = Group::SU2;
};
void validate_weight(const Weight &w);

// dim x dim (2 or 3) matrix of Laurent polynomials, row-major. dim 3 carries
// PSU(2) loops in the adjoint representation (basis E, H, F of the root space).
struct LaurentMatrix {
    int dim = 2;
    Group group = Group::SU2;
    std::vector<LaurentPoly> e;

    static LaurentMatrix identity(int dim, Group group);
    LaurentPoly &at(int r, int c) { return e[std::size_t(r) * dim + c]; }
    const LaurentPoly &at(int r, int c) const { return e[std::size_t(r) * dim + c]; }
};

LaurentMatrix operator*(const LaurentMatrix &a, const LaurentMatrix &b);
LaurentPoly det(const LaurentMatrix &a);
// max coefficient deviation of det(a) from the constant 1
double det_one_defect(const LaurentMatrix &a);
// adjoint action of a det-1 2x2 polynomial matrix on (E, H, F); entries are
// quadratic in g's entries, so the result is again exact
LaurentMatrix adjoint_rep(const LaurentMatrix &g);

// JSON round-trip: coefficient arrays with exponent offsets
void save_laurent(const LaurentMatrix &m, const std::string &path);
LaurentMatrix load_laurent(const std::string &path);

}  // namespace bogo
