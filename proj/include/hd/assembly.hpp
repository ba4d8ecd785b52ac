#ifndef HD_ASSEMBLY_HPP
#define HD_ASSEMBLY_HPP

#include <vector>

#include <Eigen/Sparse>

#include "hd/mesh.hpp"

namespace hd {

// Piecewise-linear scalar field, one value per mesh vertex.
using NodalField = std::vector<double>;

// Exponent p plus the bulk coefficient field Phi (per vertex) and the boundary
// coefficient field Psi (per vertex; only boundary entries enter any quadrature).
struct Medium {
    double p = 2.0;
    NodalField phi;
    NodalField psi;

    static Medium constant(const TriMesh& mesh, double p, double phi_value, double psi_value);
};

void validate(const TriMesh& mesh, const Medium& medium);

// Lumped quadrature weights: m_i = third of incident triangle areas,
// b_i = half of incident boundary edge lengths (zero off the boundary).
struct MassData {
    NodalField m;
    NodalField b;
};

struct EnergyBreakdown {
    double dirichlet = 0.0;  // sum_T |grad f|^p area_T
    double bulk = 0.0;       // sum_i m_i Phi_i |f_i|^p
    double boundary = 0.0;   // sum_i b_i Psi_i |f_i|^p
    double total = 0.0;
};

MassData masses(const TriMesh& mesh);

EnergyBreakdown energy(const TriMesh& mesh, const Medium& medium, const NodalField& f);

// d(energy)/df_i. With eps_reg > 0 the Dirichlet weight |grad f|^{p-2} is
// replaced by (eps_reg^2 + |grad f|^2)^{(p-2)/2}; eps_reg = 0 gives the exact
// first variation p*(A_p f + M Phi |f|^{p-2} f + B Psi |f|^{p-2} f), with
// zero-gradient triangles contributing zero.
NodalField gradient(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg = 0.0);

// Same assembly with every contribution taken in absolute value; used as the
// scale in relative gradient-norm tests.
NodalField gradient_abs_scale(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg = 0.0);

// Newton linearization of the regularized weak form. Symmetric positive
// semidefinite for p >= 2 and, with eps_reg > 0, for p in (1,2).
Eigen::SparseMatrix<double> hessian(const TriMesh& mesh, const Medium& medium, const NodalField& f, double eps_reg);

// Weak p-Laplacian pairing: component i = sum_T |grad f|^{p-2} (grad f . grad phi_i) area_T.
NodalField stiffness_action(const TriMesh& mesh, double p, const NodalField& f);

// Classical P1 stiffness matrix (p = 2 Dirichlet form), used for linear solves.
Eigen::SparseMatrix<double> stiffness_matrix(const TriMesh& mesh);

// Constant gradient of the linear interpolant on triangle t.
Vec3 triangle_gradient(const TriMesh& mesh, const NodalField& f, int t);

inline double signed_power(double x, double q) {
    if (x == 0.0) return 0.0;
    return (x > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(x), q);
}

void write_field(std::ostream& out, const NodalField& f);
NodalField read_field(std::istream& in, std::size_t expected_size);

} // namespace hd

#endif
