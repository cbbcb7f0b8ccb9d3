#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "bogo/laurent.hpp"

namespace bogo {

// Loop sampled in n equispaced points on the circle |z - center| = radius.
// Samples are values at the local coordinate radius*e^{2*pi*i*j/n}; center
// records where the circle sits in the surface. Row-major dim x dim per sample.
struct SampledLoop {
    int n = 0;
    int dim = 2;
    Group group = Group::SU2;
    cplx center;
    double radius = 0;
    std::vector<cplx> a;

    cplx &at(int j, int r, int c) { return a[(std::size_t(j) * dim + r) * dim + c]; }
    const cplx &at(int j, int r, int c) const { return a[(std::size_t(j) * dim + r) * dim + c]; }
};

// shape invariant: n a power of two >= 64
void validate_loop(const SampledLoop &l);

SampledLoop sample_matrix(const LaurentMatrix &m, cplx center, double radius, int n);

// Inverse of sample_matrix for analytic loops: Fourier-transform the samples
// and rescale coefficient k by radius^-k so the result lives in the local
// coordinate itself, not the unit circle of the sampling. Coefficients are
// kept between the lowest and highest whose circle magnitude clears
// rel_floor x (matrix max); the span is trimmed, never the interior, so
// evaluation stays faithful. Exact for polynomial entries.
LaurentMatrix loop_to_laurent(const SampledLoop &l, double rel_floor = 1e-6);

// diag(z^m, z^-m) for integer m; for PSU(2) half-integer m the adjoint
// diag(z^2m, 1, z^-2m), which is single-valued where the fundamental is not
LaurentMatrix cocharacter(const Weight &w);

// Stratum label by valuation scan: m = -(minimal significant exponent), halved
// slope in the adjoint. Exact scan for LaurentMatrix (relative floor 1e-9);
// Fourier scan for SampledLoop (relative floor 1e-6). A coefficient inside the
// 10x guard band around the floor that would change the answer is an error,
// never a silent guess. The sampled route also reports the det winding
// (0 for SL loops) through the optional out-parameter.
Weight weight_of(const LaurentMatrix &m);
Weight weight_of(const SampledLoop &l, int *det_winding = nullptr);

struct ClassCompare {
    bool same = false;
    double defect = 0;
};

// One-sided quotient test: p = g1^-1 g2 samplewise; defect = fraction of p's
// Fourier L2 mass at negative indices plus |winding(det p)|. Same class iff
// the defect is below 1e-3 (p extends holomorphically and invertibly inward).
ClassCompare same_class(const SampledLoop &g1, const SampledLoop &g2);

// complex dimension of the weight-m stratum, = 2m
int stratum_dim(const Weight &w);

// closure order specialized to rank 1: m' <= m with matching parity of 2m
bool dominance(const Weight &lower, const Weight &upper);

// Samples loop(z(w_j)) on |w| = radius, where z(w) = sum zw[k] w^{k+1}
// (so z(0) = 0 by construction; z'(0) = zw[0] must be nonzero).
SampledLoop reparametrize(const LaurentMatrix &loop, const std::vector<cplx> &zw,
                          double radius = 0.4, int n = 256);

// q * cocharacter(w) for a seeded random q: product of a det-1 constant
// diagonal and unipotent polynomial factors, so det == 1 exactly and q(0) is
// invertible (condition kept < 1e3). Degrees of q sum to at most `degree`.
LaurentMatrix random_stratum_element(const Weight &w, int degree, std::uint64_t seed);

// the modification step: replace q by q * cocharacter(w), exact coefficients
LaurentMatrix hecke_apply(const LaurentMatrix &transition, const Weight &w);

// header + f64 blob, same container as lattice fields
void save_loop(const SampledLoop &l, const std::string &path);
SampledLoop load_loop(const std::string &path);

}  // namespace bogo
