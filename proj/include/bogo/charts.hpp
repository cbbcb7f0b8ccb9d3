#pragma once
#include <cstdint>
#include <memory>
#include <vector>

#include "bogo/abelian.hpp"
#include "bogo/field.hpp"
#include "bogo/grid.hpp"
#include "bogo/laurent.hpp"
#include "bogo/loopgroup.hpp"
#include "bogo/mat2.hpp"

namespace bogo {

// One prescribed modification: where it sits, its weight, and a sampled
// transition loop representing the class. The loop must be centered at
// location.z; its weight must match the declared one.
struct HeckeDatum {
    GridPoint location;
    Weight weight;
    SampledLoop gamma;
};

void validate_data(const Grid &g, const std::vector<HeckeDatum> &data);

// Node roles on the fundamental-domain chart. Relaxable nodes carry the
// unknown; masked ones live inside a string tube and are only ever filled by
// transport from the cylinder chart (ghost = masked node read by a relaxable
// stencil). t0 is the Dirichlet plane; t1 nodes relax like interior ones but
// with the upper stencil arm reflected (built-in Neumann condition).
enum class MainRole : std::uint8_t { relax, ghost, masked, t0, t1 };

// Node roles on one cylinder chart: outside the chart window, relaxable,
// ghost (outer ring and bottom plane, filled by transport from the main
// chart), frozen (excision ball, Dirichlet model data), or the reflected top
// plane.
enum class CylRole : std::uint8_t { outside, relax, ghost, frozen, t1 };

// Excision/overlap layout for a set of modifications. r0 is the excision
// sphere radius (4 cells); r_chart the cylinder chart radius; jt_lo its
// bottom plane. Spec constants for the comparison circles collide with r0 on
// coarse grids, so every radius here carries a cell-count floor.
struct Charts {
    Grid grid;
    std::vector<HeckeDatum> data;
    double r0 = 0;
    std::vector<double> r_chart;       // per datum
    std::vector<double> r_own;         // ownership handoff radius (reporting)
    std::vector<int> jt_lo;            // bottom plane of each cylinder chart
    std::vector<int> jt_ball_top;      // first full plane above each ball

    std::vector<std::uint8_t> main_role;               // MainRole per node
    std::vector<std::vector<std::uint8_t>> cyl_role;   // CylRole per node per datum
    std::vector<std::int8_t> owner;                    // -1 main, i >= 0 cylinder i

    // transition gamma_i and its inverse at every sigma node of chart i's
    // window (identity elsewhere); the Laurent lift used to evaluate them
    std::vector<LaurentMatrix> gamma_poly;
    std::vector<std::vector<Mat2>> gam, gam_inv;       // slice_nodes per datum

    // primitive of the abelian potential: u_one[i] for datum i's charge alone,
    // u_total for all of them. u(.,0) = 0 and d_t u = V.
    std::vector<LatticeField> u_one;
    LatticeField u_total;

    // node lists driving the sweep bookkeeping
    std::vector<std::vector<std::int64_t>> main_ghosts;      // per datum
    std::vector<std::vector<std::int64_t>> cyl_ghosts;       // per datum
    std::vector<std::vector<std::int64_t>> frozen;           // per datum
    std::vector<std::vector<std::int64_t>> weld;             // per datum

    bool is_su2() const { return !data.empty() && data[0].weight.group == Group::SU2; }
    // shortest representative of z - z_i
    cplx local_z(int jx, int jy, int i) const;
    // 3d min-image distance to the singular point of datum i
    double dist3(int jx, int jy, int jt, int i) const;
};

std::shared_ptr<const Charts> build_charts(const Grid &g, const std::vector<HeckeDatum> &data);

// Dirichlet data frozen on one excision ball, in the cylinder representation:
// H = diag(|w|^2m e^2u, |w|^-2m e^-2u) with w the local coordinate and u the
// supplied primitive (the superposed one when other charges are present; for
// a single datum this reduces to that charge's own field). |w| is softened to
// h/2 like the abelian kernel so an on-node singular point stays finite.
// weight 0 gives the identity model. The values vector is aligned with nodes.
struct ExcisionModel {
    std::vector<std::int64_t> nodes;
    std::vector<Mat2> values;
};
ExcisionModel boundary_model(const Grid &g, const HeckeDatum &datum, const LatticeField &u);

// model value at one node (any node, not just ball nodes); m2 = 2m
Mat2 model_cyl_value(const Grid &g, cplx local_z, int two_m, double u);

}  // namespace bogo
