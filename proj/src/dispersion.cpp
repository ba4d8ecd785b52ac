#include "hd/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/SparseCholesky>

namespace hd {

namespace {

struct DofMap {
    std::vector<int> free_of_vertex;  // -1 for eliminated vertices
    std::vector<int> vertex_of_free;
};

DofMap make_dof_map(const TriMesh& mesh, bool dirichlet_boundary) {
    DofMap map;
    map.free_of_vertex.assign(mesh.vertices.size(), 0);
    for (int v : mesh.conductor_vertices) map.free_of_vertex[v] = -1;
    if (dirichlet_boundary)
        for (int v : boundary_vertices(mesh)) map.free_of_vertex[v] = -1;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (map.free_of_vertex[v] == 0) {
            map.free_of_vertex[v] = static_cast<int>(map.vertex_of_free.size());
            map.vertex_of_free.push_back(v);
        }
    }
    return map;
}

Eigen::SparseMatrix<double> restrict_to_free(const Eigen::SparseMatrix<double>& H, const DofMap& map) {
    const int nf = static_cast<int>(map.vertex_of_free.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(H.nonZeros());
    for (int col = 0; col < H.outerSize(); ++col) {
        int jc = map.free_of_vertex[col];
        if (jc < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(H, col); it; ++it) {
            int ir = map.free_of_vertex[it.row()];
            if (ir >= 0) trips.emplace_back(ir, jc, it.value());
        }
    }
    Eigen::SparseMatrix<double> Hff(nf, nf);
    Hff.setFromTriplets(trips.begin(), trips.end());
    return Hff;
}

double free_norm(const NodalField& g, const DofMap& map) {
    double s = 0.0;
    for (int v : map.vertex_of_free) s += g[v] * g[v];
    return std::sqrt(s);
}

// One Newton descent run at fixed exponent p until the exact (unregularized)
// gradient meets `tol` relative to the absolute-contribution scale.
int newton_stage(const TriMesh& mesh, const Medium& medium, const DofMap& map, NodalField& f, double eps_h,
                 double tol, int max_iters, bool& converged) {
    const int nf = static_cast<int>(map.vertex_of_free.size());
    converged = false;
    if (nf == 0) {
        converged = true;
        return 0;
    }
    int iters = 0;
    for (; iters < max_iters; ++iters) {
        NodalField g = gradient(mesh, medium, f, 0.0);
        NodalField gabs = gradient_abs_scale(mesh, medium, f, 0.0);
        double gn = free_norm(g, map);
        double scale = free_norm(gabs, map);
        if (gn <= tol * std::max(scale, 1e-300)) {
            converged = true;
            return iters;
        }

        Eigen::SparseMatrix<double> Hff = restrict_to_free(hessian(mesh, medium, f, eps_h), map);
        Eigen::VectorXd rhs(nf);
        for (int i = 0; i < nf; ++i) rhs[i] = -g[map.vertex_of_free[i]];

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        double mu = 0.0;
        Eigen::VectorXd d;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::SparseMatrix<double> Hmu = Hff;
            if (mu > 0.0) {
                Eigen::SparseMatrix<double> I(nf, nf);
                I.setIdentity();
                Hmu = Hff + mu * I;
            }
            ldlt.compute(Hmu);
            if (ldlt.info() == Eigen::Success) {
                d = ldlt.solve(rhs);
                if (d.allFinite() && rhs.dot(d) >= 0.0) break;
            }
            mu = (mu == 0.0) ? 1e-12 * Hff.coeffs().abs().maxCoeff() : mu * 100.0;
            d.resize(0);
        }
        if (d.size() == 0) fail("numerical-degeneracy", "Newton linearization could not be factorized");

        double slope = -rhs.dot(d);  // g . d, negative for a descent direction
        double e0 = energy(mesh, medium, f).total;
        double alpha = 1.0;
        NodalField trial = f;
        bool accepted = false;
        while (alpha > 1e-14) {
            for (int i = 0; i < nf; ++i) trial[map.vertex_of_free[i]] = f[map.vertex_of_free[i]] + alpha * d[i];
            double e1 = energy(mesh, medium, trial).total;
            if (e1 <= e0 + 1e-4 * alpha * slope || e1 <= e0 * (1.0 + 1e-15)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) return iters;  // stagnated at this regularization level
        f = trial;
    }
    return iters;
}

std::vector<double> continuation_path(double p_target) {
    std::vector<double> path;
    double cur = 2.0;
    if (p_target == 2.0) return {2.0};
    double ratio = (p_target - 1.0) / (cur - 1.0);
    int steps = std::max(1, static_cast<int>(std::ceil(std::abs(std::log(ratio)) / std::log(1.4))));
    for (int k = 1; k <= steps; ++k) path.push_back(1.0 + (cur - 1.0) * std::pow(ratio, double(k) / steps));
    path.back() = p_target;
    return path;
}

} // namespace

void set_conductor_all(TriMesh& mesh) {
    mesh.region.assign(mesh.triangles.size(), Region::conductor);
    finalize(mesh);
}

DispersionReport solve(const TriMesh& mesh, const Medium& medium, const SolveOptions& opts) {
    validate(mesh, medium);
    if (mesh.conductor_vertices.empty()) fail("invalid-spec", "solve requires a nonempty conductor region");
    if (!(opts.grad_tol > 0.0)) fail("invalid-spec", "grad_tol must be positive");

    DofMap map = make_dof_map(mesh, opts.dirichlet_boundary);

    NodalField f(mesh.vertices.size(), 0.0);
    for (int v = 0; v < mesh.num_vertices(); ++v) f[v] = map.free_of_vertex[v] < 0 ? 1.0 : 0.0;
    if (opts.dirichlet_boundary)
        for (int v : boundary_vertices(mesh))
            if (!mesh.is_conductor_vertex(v)) f[v] = 0.0;
    // Warm start from f = 1: the p = 2 Newton stage below is an exact linear solve.
    for (int v : map.vertex_of_free) f[v] = 1.0;

    const double p_target = medium.p;
    std::vector<double> path = opts.p_continuation ? continuation_path(p_target) : std::vector<double>{p_target};
    const double eps_base = 1.0 / std::max(mesh_diameter(mesh), 1e-30);

    int total_iters = 0;
    bool converged = false;
    for (std::size_t stage = 0; stage < path.size(); ++stage) {
        Medium med = medium;
        med.p = path[stage];
        bool final_stage = (stage + 1 == path.size());
        double tol = final_stage ? opts.grad_tol : std::max(opts.grad_tol, 1e-8);
        std::vector<double> eps_list;
        if (med.p == 2.0)
            eps_list = {0.0};
        else
            eps_list = {1e-2 * eps_base, 1e-4 * eps_base, 1e-6 * eps_base, 1e-8 * eps_base};
        for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
            bool last_eps = (ei + 1 == eps_list.size());
            double stage_tol = last_eps ? tol : std::max(tol, 1e-6);
            int cap = last_eps ? opts.max_newton_iters : std::max(10, opts.max_newton_iters / 4);
            bool ok = false;
            total_iters += newton_stage(mesh, med, map, f, eps_list[ei], stage_tol, cap, ok);
            if (final_stage && last_eps) converged = ok;
        }
    }
    if (!converged) fail("no-convergence", "Newton iteration cap reached before meeting grad_tol");

    DispersionReport report;
    report.minimizer = f;
    report.breakdown = energy(mesh, medium, f);
    report.value = report.breakdown.total;
    report.converged = true;
    report.iterations = total_iters;

    MassData md = masses(mesh);
    double recycled = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        recycled += (md.m[i] * medium.phi[i] + md.b[i] * medium.psi[i]) * signed_power(f[i], p_target - 1.0);
    report.identity_residual = std::abs(report.value - recycled) / std::max(report.value, 1.0);

    double lo = *std::min_element(f.begin(), f.end());
    double hi = *std::max_element(f.begin(), f.end());
    report.range_violation = std::max({0.0, -lo, hi - 1.0});
    return report;
}

PsiSweepResult sweep_psi(const TriMesh& mesh, double p, int kmax, const SolveOptions& opts) {
    PsiSweepResult result;
    for (int k = -1; k <= kmax; ++k) {
        double psi = (k < 0) ? 0.0 : std::pow(10.0, k);
        Medium med = Medium::constant(mesh, p, 0.0, psi);
        DispersionReport rep = solve(mesh, med, opts);
        result.rows.push_back({psi, rep.value, rep.identity_residual});
    }
    SolveOptions dopts = opts;
    dopts.dirichlet_boundary = true;
    Medium med0 = Medium::constant(mesh, p, 0.0, 0.0);
    result.dirichlet_value = solve(mesh, med0, dopts).value;
    return result;
}

PhiSweepResult sweep_phi(const TriMesh& mesh, double p, int kmax, const SolveOptions& opts) {
    if (conductor_area(mesh) <= 0.0) fail("invalid-spec", "sweep_phi requires a conductor of positive area");
    PhiSweepResult result;
    double areaK = conductor_area(mesh);
    for (int k = -1; k <= kmax; ++k) {
        double phi = (k < 0) ? 0.0 : std::pow(10.0, k);
        Medium med = Medium::constant(mesh, p, phi, 0.0);
        DispersionReport rep = solve(mesh, med, opts);
        result.rows.push_back({phi, rep.value, phi * areaK});
    }
    return result;
}

} // namespace hd
