#pragma once
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bogo/charts.hpp"
#include "bogo/field.hpp"
#include "bogo/grid.hpp"

namespace bogo {

// Candidate hermitian metric in both representations. dim 2 carries the
// matrix fields; dim 3 (adjoint, diagonal locus only) is stored as the single
// real potential u_diag with H = diag(e^4u, 1, e^-4u) implied, since every
// half-integer-weight adjoint solution in scope is of that form.
struct HermitianField {
    std::shared_ptr<const Charts> charts;
    int dim = 2;
    LatticeField H_main;               // matrix2, det 1, SPD
    std::vector<LatticeField> H_cyl;   // per datum, matrix2
    LatticeField u_diag;               // real, dim 3 only

    const Grid &grid() const { return charts->grid; }
};

struct SolveConfig {
    double tol = 1e-8;
    int max_sweeps = 10000;
    double damping = 1.0;          // relaxation factor after the warmup phase
    double warmup_damping = 0.5;   // under-relaxation through the initial transient
    int warmup_sweeps = 600;       // sweeps before damping takes over
    int check_every = 10;
    enum class Init { model, identity, random } init = Init::model;
    std::uint64_t seed = 0;    // randomized-init offset seed
    double init_noise = 0.05;  // amplitude of the random smooth offset
};

struct SweepRecord {
    int sweep = 0;
    double residual = 0;
};

struct SolveReport {
    bool converged = false;
    int sweeps = 0;
    double final_residual = 0;
    double damping_used = 0;
    int restarts = 0;
    std::vector<SweepRecord> history;
};

// Damped red-black Gauss-Seidel on the flux form of the hermitian-metric
// equation. Each node is relaxed in exactly one chart (ownership partition);
// the other representation is refreshed by the transition transport, and the
// excision balls stay frozen at model data. Throws "diverged" when the
// residual grows persistently, "positivity lost" after the restart budget
// (damping halved, twice) is exhausted.
HermitianField solve_H(const Grid &g, const std::vector<HeckeDatum> &data,
                       const SolveConfig &cfg = {}, SolveReport *report = nullptr);

// Same iteration, but starting from a previously computed field on the same
// grid and data instead of the model init (the restart policy falls back to
// the supplied field as well). cfg.init is ignored.
HermitianField solve_H(const Grid &g, const std::vector<HeckeDatum> &data,
                       const HermitianField &warm, const SolveConfig &cfg = {},
                       SolveReport *report = nullptr);

// Transfer a solved field onto another grid and/or other transition loops at
// the same locations and weights, for continuation warm starts. With
// unchanged loops both representations are interpolated directly (trilinear,
// SPD-safe); with changed loops the cylinder values are rebuilt from the
// excision model blended into the transported main field, since different
// classes admit no pointwise gauge relation near the string.
HermitianField resample_H(const HermitianField &src, const Grid &dst,
                          const std::vector<HeckeDatum> &data);

// Pointwise Frobenius norm of the equation residual, evaluated on the owning
// chart with the same stencil the relaxation fixes (so a converged solve
// reports its own tolerance). Zero on frozen and lower-plane nodes; the top
// plane carries the reflected Neumann stencil and is measured like the rest.
LatticeField residual_H(const HermitianField &h);
double residual_sup(const HermitianField &h);

// Largest relative defect of H_cyl against the transported main field over
// the window overlap (diagnostic; the final sync drives it to rounding).
double chart_compat_defect(const HermitianField &h);

// Unitary-gauge fields on one chart.
struct ChartFields {
    LatticeField A_zbar;  // matrix2; A_z = -adjoint(A_zbar)
    LatticeField A_t;     // anti-hermitian
    LatticeField Phi;     // anti-hermitian
    LatticeField S;       // hermitian square root of H
};

struct MonopoleSolution {
    std::shared_ptr<const Charts> charts;
    ChartFields main_chart;
    std::vector<ChartFields> cyl;
    std::map<std::string, double> residuals;  // named diagnostics

    const Grid &grid() const { return charts->grid; }
};

// S = H^1/2 per node, then A_zbar = -(d_zbar S) S^-1, A_t and Phi from the
// symmetrized t-derivative. Records equation and boundary diagnostics, both
// as a sup over all stencil-complete relaxable nodes ("*_sup") and with the
// near-excision shell excluded ("*_far"). dim 3 fields are not produced.
MonopoleSolution unitary_gauge(const HermitianField &h);

// gauge-invariant pointwise separation tr(h1^-1 h2) + tr(h2^-1 h1) - 2*dim,
// evaluated in the owning representation
LatticeField sigma(const HermitianField &h1, const HermitianField &h2);
double sigma_sup(const HermitianField &h1, const HermitianField &h2);

// minimum over stencil-complete relaxable nodes of the discrete Laplacian of
// tr(h1^-1 h2); nonnegative (up to truncation) when both solve the equation
double subharmonic_tr_check(const HermitianField &h1, const HermitianField &h2);

// diagonal candidate diag(e^q, e^-q) on the main chart, transported into the
// cylinder charts; the embedding of an abelian solution uses q = 2u
HermitianField embed_diagonal(std::shared_ptr<const Charts> charts, const LatticeField &q);

// directory round-trip: manifest (grid, data, residuals) + metric field files
// + convergence history CSV. Gauge fields are recomputed on load, not stored.
void save_solution(const std::string &dir, const HermitianField &h, const SolveReport &report,
                   const std::map<std::string, double> &residuals = {});
struct LoadedSolution {
    HermitianField h;
    SolveReport report;
    std::map<std::string, double> residuals;
};
LoadedSolution load_solution(const std::string &dir);

}  // namespace bogo
