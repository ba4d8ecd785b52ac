#ifndef HD_MESH_HPP
#define HD_MESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hd/error.hpp"

namespace hd {

using Vec3 = std::array<double, 3>;

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a);

enum class Region : std::uint8_t { insulator = 0, conductor = 1 };

struct BoundaryEdge {
    int a = -1;
    int b = -1;
    int tag = 0;
};

// Triangulated compact 2-manifold with boundary. Conductor triangles carry the
// region tag; conductor_vertices collects every vertex of a conductor triangle
// (interface vertices included). Immutable after construction by convention.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<Region> region;            // one entry per triangle
    std::vector<int> conductor_vertices;   // sorted, derived by finalize()
    bool on_sphere = false;                // spherical_cap generator lineage

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    bool is_conductor_vertex(int v) const;
};

struct ConductorSpec {
    double radius = 0.0;              // planar generators: distance from domain center
    double angle = 0.0;               // spherical_cap: colatitude of the conductor sub-cap
    std::vector<int> vertex_list;     // explicit triangles-by-vertex selection (all 3 vertices listed)
};

struct MeshSpec {
    enum class Generator { disk, annulus, square_with_hole, spherical_cap };
    Generator generator = Generator::disk;
    double R = 1.0;             // disk/annulus outer radius
    double r0 = 0.0;            // annulus inner radius
    double side = 1.0;          // square side length
    double hole_radius = 0.0;   // square hole radius (0 = no hole)
    double theta_max = 1.0;     // cap colatitude extent
    int resolution = 0;         // refinement level of the structured generator
    ConductorSpec conductor;    // empty radius/angle/list = no conductor
};

// Polyline {f = t} extracted triangle by triangle from the P1 interpolant.
struct LevelSegment {
    Vec3 p0, p1;
    double length = 0.0;
    int triangle = -1;
};

struct LevelPolyline {
    std::vector<LevelSegment> segments;
    double total_length() const;
};

TriMesh generate(const MeshSpec& spec);
TriMesh refine(const TriMesh& mesh);
LevelPolyline level_set_segments(const TriMesh& mesh, const std::vector<double>& f, double t);

// Recomputes conductor_vertices from the region tags and checks all TriMesh
// invariants (manifoldness, orientation, positive areas, boundary edge set,
// conductor edge-connectivity). Throws Error("invalid-mesh", ...) on failure.
void finalize(TriMesh& mesh);
void validate(const TriMesh& mesh);

double triangle_area(const TriMesh& mesh, int t);
Vec3 triangle_centroid(const TriMesh& mesh, int t);
double total_area(const TriMesh& mesh);
double boundary_length(const TriMesh& mesh);
double conductor_area(const TriMesh& mesh);
double mesh_diameter(const TriMesh& mesh);   // bounding-box diagonal
std::vector<int> boundary_vertices(const TriMesh& mesh);

// Plain-text format: `nv nt nbe`, then nv lines `x y z`, then nt lines
// `i j k region`, then nbe lines `i j tag`.
void write_mesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in);
void save_mesh(const std::string& path, const TriMesh& mesh);
TriMesh load_mesh(const std::string& path);

} // namespace hd

#endif
