#pragma once
#include <string>
#include <vector>

#include "bogo/field.hpp"
#include "bogo/geometry.hpp"
#include "bogo/grid.hpp"

namespace bogo {

// point singularity of the potential: V ~ m/(2r) near location
struct Charge {
    GridPoint location;  // t strictly inside (0,1)
    int two_m = 1;       // half-integer weight stored doubled, 2m >= 1
    double m() const { return 0.5 * two_m; }
};

// monopole: Neumann 0 at t=0, Dirichlet 0 at t=1 (potential of a singular
// monopole with trivial connection at t=0 and vanishing Higgs field at t=1);
// comparison: Dirichlet 0 at t=0, Neumann 0 at t=1 (the auxiliary problem the
// uniqueness argument compares against)
enum class GreensVariant { monopole, comparison };

// throws std::invalid_argument when weights are < 1/2, a charge sits on or too
// close to an end (the cutoff ball must fit strictly inside (0,1)), or two
// charges are closer than 6 grid cells
void validate_charges(const Grid &g, const std::vector<Charge> &charges);

// shared cutoff radius: min(0.1*period, half the minimal charge separation)
double cutoff_radius(const Grid &g, const std::vector<Charge> &charges);

struct GreensDiagnostics {
    // per-charge multiplicative repair making the discrete annulus-source mass
    // exact (band-limit truncation of the synthesized source is ~2-3% light)
    std::vector<double> mass_repair;
    double min_V = 0.0;
    double r_cut = 0.0;
};

// V = sum_i chi_i*m_i/(2 r_i) + v_reg. chi is a C2 quintic cutoff (1 for
// r<3h, 0 beyond the shared cutoff radius); the annulus source m*chi''/(2r) is
// synthesized band-limited on an 8x oversampled sigma grid with its discrete
// mass repaired exactly, and v_reg comes from poisson_solve_mixed with the
// variant's end conditions. The 1/(2r) kernel is softened to 1/(2*max(r,h/2)),
// which only matters when a charge sits exactly on a node.
LatticeField greens_mixed(const Grid &g, const std::vector<Charge> &charges, GreensVariant variant,
                          GreensDiagnostics *diag = nullptr);

// independent route to the same potential: exact per-Fourier-mode two-point
// boundary solve with the delta jump condition at each t_i (closed-form
// cosh/sinh profiles in t, band-limited source in sigma). No grid operator or
// poisson solve is involved; t-dependence is continuum-exact.
LatticeField greens_modal_exact(const Grid &g, const std::vector<Charge> &charges,
                                GreensVariant variant);

// exact modal antiderivative u(z,t) = \int_0^t V dt' of the modal-exact
// monopole-variant potential (closed-form integrals of the same profiles);
// u(.,0)=0 and u is harmonic because V satisfies the end conditions
LatticeField greens_modal_antiderivative(const Grid &g, const std::vector<Charge> &charges);

struct DiracMonopole {
    LatticeField V;       // real potential
    LatticeField A_zbar;  // complex; A_z = conj(A_zbar) so A is a real 1-form
    LatticeField A_t;     // complex; identically zero in this gauge
    LatticeField Phi;     // complex; i*V
    std::vector<Charge> charges;  // Dirac strings run along {z_i} x (t_i, 1]
};

// gauge A_t=0, A|_{t=0}=0: A_zbar(.,t) accumulates -i*dV/dzbar by the
// trapezoid rule, so dA = *dV away from the strings
DiracMonopole dirac_monopole(const Grid &g, const LatticeField &V,
                             const std::vector<Charge> &charges);

// 1 = node is outside every string tube (sigma-distance < r_tube with
// t > t_i - r_tube) and every charge ball (3d distance < r_ball)
std::vector<char> off_string_mask(const Grid &g, const std::vector<Charge> &charges, double r_tube,
                                  double r_ball);

// max-norm of dA - *dV over unmasked nodes (all three 2-form components)
double dirac_residual(const Grid &g, const DiracMonopole &mono, const std::vector<char> &mask);

// integral of the monopole curvature over Sigma x {t}; piecewise constant
// between singular levels. Throws when t is within h_t of a singular level.
double flux_through_slice(const Grid &g, const DiracMonopole &mono, double t);

// complex coefficients of dz, dzbar, dt
struct OneForm {
    LatticeField z, zbar, t;
    explicit OneForm(const Grid &g)
        : z(g, FieldKind::complex_scalar),
          zbar(g, FieldKind::complex_scalar),
          t(g, FieldKind::complex_scalar) {}
};

struct PeriodsReport {
    double d_residual = 0.0;  // max-norm of the exterior derivative
    cplx px0, py0, px1, py1;  // torus-generator periods at t=0 and t=1
};

// closedness + periods: the uniqueness test for connection differences
// (residual ~ 0 and zero periods at t=0 means the difference is exact)
PeriodsReport periods_check(const Grid &g, const OneForm &a);

// mean of r*V over nodes with metric distance to the charge in [r_lo, r_hi]
double shell_average_rV(const Grid &g, const LatticeField &V, const Charge &c, double r_lo,
                        double r_hi);

// max over nodes farther than r_min from every charge of r_nearest * |V|
double kato_sup(const Grid &g, const LatticeField &V, const std::vector<Charge> &charges,
                double r_min);

// directory of field files plus manifest.json with charges, grid data, and
// measured diagnostics (flux staircase, residual off strings, min V)
void save_monopole(const std::string &dir, const Grid &g, const DiracMonopole &mono);
DiracMonopole load_monopole(const std::string &dir, Grid &g_out);

}  // namespace bogo
