#include "hd/assembly.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace hd {

Medium Medium::constant(const TriMesh& mesh, double p, double phi_value, double psi_value) {
    Medium med;
    med.p = p;
    med.phi.assign(mesh.vertices.size(), phi_value);
    med.psi.assign(mesh.vertices.size(), psi_value);
    return med;
}

void validate(const TriMesh& mesh, const Medium& medium) {
    if (!(medium.p > 1.0)) fail("invalid-medium", "exponent p must exceed 1");
    if (medium.phi.size() != mesh.vertices.size() || medium.psi.size() != mesh.vertices.size())
        fail("invalid-medium", "coefficient fields must have one entry per vertex");
    for (double v : medium.phi)
        if (!(v >= 0.0)) fail("invalid-medium", "Phi must be nonnegative");
    for (double v : medium.psi)
        if (!(v >= 0.0)) fail("invalid-medium", "Psi must be nonnegative");
}

MassData masses(const TriMesh& mesh) {
    MassData md;
    md.m.assign(mesh.vertices.size(), 0.0);
    md.b.assign(mesh.vertices.size(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double share = triangle_area(mesh, t) / 3.0;
        for (int v : mesh.triangles[t]) md.m[v] += share;
    }
    for (const auto& e : mesh.boundary_edges) {
        double share = 0.5 * norm(mesh.vertices[e.b] - mesh.vertices[e.a]);
        md.b[e.a] += share;
        md.b[e.b] += share;
    }
    return md;
}

namespace {

// Hat-function gradients of a (possibly embedded) flat triangle:
// grad lambda_k = (n_hat x opposite_edge) / (2 area).
struct TriGeom {
    Vec3 g[3];
    double area;
};

TriGeom tri_geometry(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    Vec3 nvec = cross(b - a, c - a);
    double twice_area = norm(nvec);
    TriGeom geom;
    geom.area = 0.5 * twice_area;
    Vec3 nhat = (1.0 / twice_area) * nvec;
    Vec3 opp[3] = {c - b, a - c, b - a};
    for (int k = 0; k < 3; ++k) geom.g[k] = (1.0 / twice_area) * cross(nhat, opp[k]);
    return geom;
}

} // namespace

Vec3 triangle_gradient(const TriMesh& mesh, const NodalField& f, int t) {
    TriGeom geom = tri_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    Vec3 grad = {0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) grad = grad + f[tri[k]] * geom.g[k];
    return grad;
}

EnergyBreakdown energy(const TriMesh& mesh, const Medium& medium, const NodalField& f) {
    EnergyBreakdown e;
    const double p = medium.p;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        TriGeom geom = tri_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        Vec3 grad = {0.0, 0.0, 0.0};
        for (int k = 0; k < 3; ++k) grad = grad + f[tri[k]] * geom.g[k];
        double g2 = dot(grad, grad);
        if (g2 > 0.0) e.dirichlet += std::pow(g2, 0.5 * p) * geom.area;
    }
    MassData md = masses(mesh);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double ap = std::pow(std::abs(f[i]), p);
        e.bulk += md.m[i] * medium.phi[i] * ap;
        e.boundary += md.b[i] * medium.psi[i] * ap;
    }
    e.total = e.dirichlet + e.bulk + e.boundary;
    return e;
}

namespace {

NodalField gradient_impl(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg,
                         bool abs_scale) {
    const double p = medium.p;
    NodalField out(f.size(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        TriGeom geom = tri_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        Vec3 grad = {0.0, 0.0, 0.0};
        for (int k = 0; k < 3; ++k) grad = grad + f[tri[k]] * geom.g[k];
        double g2 = dot(grad, grad) + eps_reg * eps_reg;
        if (g2 == 0.0) continue;
        double w = std::pow(g2, 0.5 * (p - 2.0));
        for (int k = 0; k < 3; ++k) {
            double contrib = p * w * dot(grad, geom.g[k]) * geom.area;
            out[tri[k]] += abs_scale ? std::abs(contrib) : contrib;
        }
    }
    MassData md = masses(mesh);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double sp = signed_power(f[i], p - 1.0);
        double contrib = p * (md.m[i] * medium.phi[i] + md.b[i] * medium.psi[i]) * sp;
        out[i] += abs_scale ? std::abs(contrib) : contrib;
    }
    for (double v : out)
        if (!std::isfinite(v)) fail("numerical-degeneracy", "nonfinite energy gradient");
    return out;
}

} // namespace

NodalField gradient(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg) {
    return gradient_impl(mesh, medium, f, eps_reg, false);
}

NodalField gradient_abs_scale(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg) {
    return gradient_impl(mesh, medium, f, eps_reg, true);
}

Eigen::SparseMatrix<double> hessian(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg) {
    const double p = medium.p;
    if (p != 2.0 && eps_reg <= 0.0)
        fail("numerical-degeneracy", "hessian requires eps_reg > 0 when p differs from 2");
    const int n = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.triangles.size() + f.size());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        TriGeom geom = tri_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        Vec3 grad = {0.0, 0.0, 0.0};
        for (int k = 0; k < 3; ++k) grad = grad + f[tri[k]] * geom.g[k];
        double g2 = dot(grad, grad) + eps_reg * eps_reg;
        double w = (p == 2.0) ? 1.0 : std::pow(g2, 0.5 * (p - 2.0));
        double w2 = (p == 2.0 || g2 == 0.0) ? 0.0 : std::pow(g2, 0.5 * (p - 4.0));
        for (int a = 0; a < 3; ++a)
            for (int bidx = 0; bidx < 3; ++bidx) {
                double v = p * w * dot(geom.g[a], geom.g[bidx]) * geom.area;
                if (p != 2.0)
                    v += p * (p - 2.0) * w2 * dot(grad, geom.g[a]) * dot(grad, geom.g[bidx]) * geom.area;
                trips.emplace_back(tri[a], tri[bidx], v);
            }
    }
    MassData md = masses(mesh);
    for (int i = 0; i < n; ++i) {
        double fa = std::abs(f[i]);
        double mass = md.m[i] * medium.phi[i] + md.b[i] * medium.psi[i];
        if (mass == 0.0) continue;
        double w;
        if (p == 2.0)
            w = 1.0;
        else if (p > 2.0)
            w = std::pow(fa, p - 2.0);
        else
            w = std::pow(fa * fa + eps_reg * eps_reg, 0.5 * (p - 2.0));
        trips.emplace_back(i, i, p * (p - 1.0) * mass * w);
    }
    Eigen::SparseMatrix<double> H(n, n);
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
}

NodalField stiffness_action(const TriMesh& mesh, double p, const NodalField& f) {
    NodalField out(f.size(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        TriGeom geom = tri_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        Vec3 grad = {0.0, 0.0, 0.0};
        for (int k = 0; k < 3; ++k) grad = grad + f[tri[k]] * geom.g[k];
        double g2 = dot(grad, grad);
        if (g2 == 0.0) continue;
        double w = std::pow(g2, 0.5 * (p - 2.0));
        for (int k = 0; k < 3; ++k) out[tri[k]] += w * dot(grad, geom.g[k]) * geom.area;
    }
    return out;
}

Eigen::SparseMatrix<double> stiffness_matrix(const TriMesh& mesh) {
    const int n = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.triangles.size());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        TriGeom geom = tri_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trips.emplace_back(tri[a], tri[b], dot(geom.g[a], geom.g[b]) * geom.area);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

void write_field(std::ostream& out, const NodalField& f) {
    out.precision(17);
    for (double v : f) out << v << '\n';
}

NodalField read_field(std::istream& in, std::size_t expected_size) {
    NodalField f(expected_size);
    for (auto& v : f)
        if (!(in >> v)) fail("field-io", "bad field file");
    return f;
}

} // namespace hd
