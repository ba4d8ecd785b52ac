#ifndef HD_DISPERSION_HPP
#define HD_DISPERSION_HPP

#include "hd/assembly.hpp"
#include "hd/mesh.hpp"

namespace hd {

struct SolveOptions {
    double grad_tol = 1e-10;        // relative gradient-norm target
    int max_newton_iters = 200;     // per continuation stage
    bool p_continuation = true;     // walk p from 2 toward the target
    bool dirichlet_boundary = false;  // pin boundary values to 0 (Dirichlet-limit solves)
};

struct DispersionReport {
    double value = 0.0;
    NodalField minimizer;
    EnergyBreakdown breakdown;
    double identity_residual = 0.0;  // |energy - sum m Phi f^{p-1} - sum b Psi f^{p-1}| / max(energy, 1)
    double range_violation = 0.0;    // max(0, -min f, max f - 1)
    bool converged = false;
    int iterations = 0;
};

struct SweepRow {
    double param = 0.0;
    double value = 0.0;
    double aux = 0.0;
};

struct PsiSweepResult {
    std::vector<SweepRow> rows;      // param = Psi, value = H^d, aux = identity residual
    double dirichlet_value = 0.0;    // hard zero boundary condition comparison solve
};

struct PhiSweepResult {
    std::vector<SweepRow> rows;      // param = Phi, value = H^d, aux = Phi * area(K)
};

// Minimizes the discrete heat-dispersion energy over nodal fields with f = 1 on
// conductor vertices (eliminated unknowns). Throws no-convergence or
// numerical-degeneracy on solver failure.
DispersionReport solve(const TriMesh& mesh, const Medium& medium, const SolveOptions& opts = {});

// Theorem-driven extreme-limit sweeps: Psi = 0, 10^0..10^kmax with Phi = 0
// (plus a hard-Dirichlet comparison), and Phi = 0, 10^0..10^kmax with Psi = 0.
PsiSweepResult sweep_psi(const TriMesh& mesh, double p, int kmax = 6, const SolveOptions& opts = {});
PhiSweepResult sweep_phi(const TriMesh& mesh, double p, int kmax = 4, const SolveOptions& opts = {});

// Marks every triangle as conductor (the K = M condenser).
void set_conductor_all(TriMesh& mesh);

} // namespace hd

#endif
