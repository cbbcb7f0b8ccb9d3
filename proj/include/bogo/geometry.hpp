#pragma once
#include "bogo/field.hpp"
#include "bogo/grid.hpp"

namespace bogo {

enum class Deriv { dz, dzbar, dt };

// dz/dzbar: spectral over the torus (exact on band-limited fields), applied per
// t-slice; Nyquist bins are zeroed so d/dx of a real field stays real.
// dt: centered 2nd-order interior, one-sided 2nd-order at t=0,1.
// real input promotes to complex output for dz/dzbar; matrix2 goes componentwise.
LatticeField derivative(const Grid &g, const LatticeField &f, Deriv which);

// Finite-difference variant of the torus derivatives (centered 2nd order,
// periodic wrap). The relaxation solver and all masked/chart evaluations use
// these, because spectral stencils cannot honor masks; tolerances of the form
// 10·h² are calibrated to this variant.
LatticeField derivative_fd(const Grid &g, const LatticeField &f, Deriv which);

// (1/rho)·dzbar(dz(f)) + dtt(f) on scalar fields; spectral in sigma (with the
// same Nyquist convention as derivative), direct 3-point second difference in t
// (4-point one-sided at the ends, also 2nd order).
LatticeField laplacian(const Grid &g, const LatticeField &f);

struct EndCondition {
    enum Kind { dirichlet, neumann } kind = dirichlet;
    double value = 0.0;         // uniform data over the end slice
    std::vector<double> data;   // optional per-node data (n_sigma^2 values, row-major);
                                // when non-empty it overrides `value`
};

// Solve laplacian(u) = source with the given end conditions at t=0 / t=1,
// spectral in sigma and an exact tridiagonal solve in t per Fourier mode.
// The Neumann rows use the same one-sided stencil as derivative(), eliminated
// into the tridiagonal system, so the discrete residual against laplacian() at
// interior t-levels is at rounding level, and feeding back a field's own
// discrete source and end data reproduces it to rounding. (A field satisfying
// a *continuum* Neumann condition satisfies the discrete row only to O(h_t³),
// so round trips against continuum data bottom out near 1e-6 on 64-point t
// grids.) Requires constant rho (the per-mode decoupling needs it);
// both-ends-Neumann requires the solvability integral to match within 1e-8 and
// pins the k=0 value at t=0 to zero.
LatticeField poisson_solve_mixed(const Grid &g, const LatticeField &source, EndCondition lo,
                                 EndCondition hi);

// max |laplacian(u) - source| over interior t-levels (the levels where the
// solver enforces the equation; end levels carry the boundary rows)
double poisson_residual(const Grid &g, const LatticeField &u, const LatticeField &source);

}  // namespace bogo
