#include "hd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <istream>
#include <set>
#include <sstream>

namespace hd {

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

double triangle_area(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
    Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
    return 0.5 * norm(cross(e1, e2));
}

Vec3 triangle_centroid(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return (1.0 / 3.0) * (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]);
}

double total_area(const TriMesh& mesh) {
    double a = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) a += triangle_area(mesh, t);
    return a;
}

double boundary_length(const TriMesh& mesh) {
    double len = 0.0;
    for (const auto& e : mesh.boundary_edges) len += norm(mesh.vertices[e.b] - mesh.vertices[e.a]);
    return len;
}

double conductor_area(const TriMesh& mesh) {
    double a = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (mesh.region[t] == Region::conductor) a += triangle_area(mesh, t);
    return a;
}

double mesh_diameter(const TriMesh& mesh) {
    Vec3 lo = {1e300, 1e300, 1e300}, hi = {-1e300, -1e300, -1e300};
    for (const auto& v : mesh.vertices)
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    return norm(hi - lo);
}

std::vector<int> boundary_vertices(const TriMesh& mesh) {
    std::set<int> s;
    for (const auto& e : mesh.boundary_edges) {
        s.insert(e.a);
        s.insert(e.b);
    }
    return {s.begin(), s.end()};
}

bool TriMesh::is_conductor_vertex(int v) const {
    return std::binary_search(conductor_vertices.begin(), conductor_vertices.end(), v);
}

double LevelPolyline::total_length() const {
    double len = 0.0;
    for (const auto& s : segments) len += s.length;
    return len;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct EdgeUse {
    int count = 0;
    int forward = 0;  // directed occurrences a<b
};

std::map<std::pair<int, int>, EdgeUse> edge_incidence(const TriMesh& mesh) {
    std::map<std::pair<int, int>, EdgeUse> edges;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto& use = edges[{key.first, key.second}];
            use.count += 1;
            if (a < b) use.forward += 1;
        }
    }
    return edges;
}

} // namespace

void finalize(TriMesh& mesh) {
    auto edges = edge_incidence(mesh);

    // Derive the boundary edge set, keeping the triangle's traversal direction.
    std::map<std::pair<int, int>, int> derived;  // sorted pair -> directed a index
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            auto key = std::minmax(a, b);
            if (edges.at({key.first, key.second}).count == 1) derived[{key.first, key.second}] = a;
        }
    }

    if (mesh.boundary_edges.empty()) {
        for (const auto& [key, a] : derived) {
            int b = (a == key.first) ? key.second : key.first;
            mesh.boundary_edges.push_back({a, b, 0});
        }
    } else {
        if (mesh.boundary_edges.size() != derived.size())
            fail("invalid-mesh", "boundary edge list does not match derived boundary");
        for (const auto& e : mesh.boundary_edges) {
            auto key = std::minmax(e.a, e.b);
            if (!derived.count({key.first, key.second}))
                fail("invalid-mesh", "listed boundary edge is interior or absent");
        }
    }

    mesh.conductor_vertices.clear();
    std::set<int> cset;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (mesh.region[t] == Region::conductor)
            for (int v : mesh.triangles[t]) cset.insert(v);
    mesh.conductor_vertices.assign(cset.begin(), cset.end());

    validate(mesh);
}

void validate(const TriMesh& mesh) {
    if (mesh.region.size() != mesh.triangles.size())
        fail("invalid-mesh", "region tags must cover all triangles");
    for (const auto& tri : mesh.triangles)
        for (int v : tri)
            if (v < 0 || v >= mesh.num_vertices()) fail("invalid-mesh", "triangle index out of range");

    auto edges = edge_incidence(mesh);
    std::size_t nbe = 0;
    for (const auto& [key, use] : edges) {
        if (use.count > 2) fail("invalid-mesh", "non-manifold edge");
        if (use.count == 2 && use.forward != 1)
            fail("invalid-mesh", "inconsistent orientation across an interior edge");
        if (use.count == 1) ++nbe;
    }
    if (nbe != mesh.boundary_edges.size())
        fail("invalid-mesh", "boundary edge count mismatch");

    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (!(triangle_area(mesh, t) > 0.0)) fail("invalid-mesh", "degenerate triangle");

    // Conductor region, if nonempty, must be edge-connected.
    std::vector<int> cond;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (mesh.region[t] == Region::conductor) cond.push_back(t);
    if (cond.size() > 1) {
        std::map<std::pair<int, int>, std::vector<int>> by_edge;
        for (int t : cond) {
            const auto& tri = mesh.triangles[t];
            for (int k = 0; k < 3; ++k) {
                auto key = std::minmax(tri[k], tri[(k + 1) % 3]);
                by_edge[{key.first, key.second}].push_back(t);
            }
        }
        std::map<int, std::vector<int>> adj;
        for (const auto& [key, ts] : by_edge)
            if (ts.size() == 2) {
                adj[ts[0]].push_back(ts[1]);
                adj[ts[1]].push_back(ts[0]);
            }
        std::vector<int> stack = {cond[0]};
        std::set<int> seen = {cond[0]};
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            for (int u : adj[t])
                if (seen.insert(u).second) stack.push_back(u);
        }
        if (seen.size() != cond.size()) fail("invalid-mesh", "conductor region is not edge-connected");
    }
}

// ---------------------------------------------------------------------------
// Generators

namespace {

// Shared ring-structured builder for disk and spherical cap. `place` maps a
// normalized radial parameter in [0,1] and an angle to a 3D point.
template <typename PlaceFn>
TriMesh build_spiderweb(int nrings, PlaceFn place) {
    TriMesh mesh;
    mesh.vertices.push_back(place(0.0, 0.0));
    std::vector<int> ring_start(nrings + 1, 0);
    for (int i = 1; i <= nrings; ++i) {
        ring_start[i] = mesh.num_vertices();
        int m = 6 * i;
        for (int j = 0; j < m; ++j) {
            double ang = 2.0 * M_PI * j / m;
            mesh.vertices.push_back(place(double(i) / nrings, ang));
        }
    }
    auto node = [&](int ring, int q) {
        if (ring == 0) return 0;
        int m = 6 * ring;
        return ring_start[ring] + ((q % m) + m) % m;
    };
    for (int i = 1; i <= nrings; ++i) {
        for (int s = 0; s < 6; ++s) {
            for (int k = 0; k < i; ++k) {
                mesh.triangles.push_back({node(i, s * i + k), node(i, s * i + k + 1), node(i - 1, s * (i - 1) + k)});
                if (k + 1 < i)
                    mesh.triangles.push_back(
                        {node(i, s * i + k + 1), node(i - 1, s * (i - 1) + k + 1), node(i - 1, s * (i - 1) + k)});
            }
        }
    }
    mesh.region.assign(mesh.triangles.size(), Region::insulator);
    return mesh;
}

void tag_conductor_by_distance(TriMesh& mesh, double radius, const Vec3& center) {
    if (radius <= 0.0) return;
    const double tol = 1e-9 * (radius + 1.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        bool inside = true;
        for (int v : mesh.triangles[t])
            if (norm(mesh.vertices[v] - center) > radius + tol) inside = false;
        if (inside) mesh.region[t] = Region::conductor;
    }
}

void tag_conductor_by_vertex_list(TriMesh& mesh, const std::vector<int>& list) {
    std::set<int> allowed(list.begin(), list.end());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (allowed.count(tri[0]) && allowed.count(tri[1]) && allowed.count(tri[2]))
            mesh.region[t] = Region::conductor;
    }
}

void check_conductor_clears_boundary(const TriMesh& mesh) {
    std::set<int> bverts;
    for (const auto& e : mesh.boundary_edges) {
        bverts.insert(e.a);
        bverts.insert(e.b);
    }
    for (int v : mesh.conductor_vertices)
        if (bverts.count(v)) fail("invalid-spec", "conductor region touches the domain boundary");
}

int resolution_scale(int resolution) {
    if (resolution < 0) fail("invalid-spec", "resolution must be nonnegative");
    if (resolution > 12) fail("invalid-spec", "resolution too large");
    return 1 << resolution;
}

TriMesh generate_disk(const MeshSpec& spec) {
    if (spec.R <= 0.0) fail("invalid-spec", "disk radius must be positive");
    int n = 4 * resolution_scale(spec.resolution);
    TriMesh mesh = build_spiderweb(n, [&](double s, double ang) -> Vec3 {
        return {spec.R * s * std::cos(ang), spec.R * s * std::sin(ang), 0.0};
    });
    if (!spec.conductor.vertex_list.empty())
        tag_conductor_by_vertex_list(mesh, spec.conductor.vertex_list);
    else
        tag_conductor_by_distance(mesh, spec.conductor.radius, {0.0, 0.0, 0.0});
    finalize(mesh);
    check_conductor_clears_boundary(mesh);
    return mesh;
}

TriMesh generate_cap(const MeshSpec& spec) {
    if (spec.theta_max <= 0.0 || spec.theta_max >= M_PI)
        fail("invalid-spec", "cap angle must lie in (0, pi)");
    int n = 4 * resolution_scale(spec.resolution);
    TriMesh mesh = build_spiderweb(n, [&](double s, double ang) -> Vec3 {
        double th = spec.theta_max * s;
        return {std::sin(th) * std::cos(ang), std::sin(th) * std::sin(ang), std::cos(th)};
    });
    mesh.on_sphere = true;
    if (!spec.conductor.vertex_list.empty()) {
        tag_conductor_by_vertex_list(mesh, spec.conductor.vertex_list);
    } else if (spec.conductor.angle > 0.0) {
        if (spec.conductor.angle >= spec.theta_max)
            fail("invalid-spec", "conductor sub-cap must be strictly inside the cap");
        const double tol = 1e-9;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            bool inside = true;
            for (int v : mesh.triangles[t])
                if (std::acos(std::clamp(mesh.vertices[v][2], -1.0, 1.0)) > spec.conductor.angle + tol)
                    inside = false;
            if (inside) mesh.region[t] = Region::conductor;
        }
    }
    finalize(mesh);
    check_conductor_clears_boundary(mesh);
    return mesh;
}

TriMesh generate_annulus(const MeshSpec& spec) {
    if (spec.r0 <= 0.0 || spec.R <= spec.r0) fail("invalid-spec", "annulus requires 0 < r0 < R");
    int scale = resolution_scale(spec.resolution);
    int n = 4 * scale;    // radial layers
    int m = 24 * scale;   // angular count
    TriMesh mesh;
    for (int i = 0; i <= n; ++i) {
        double r = spec.r0 + (spec.R - spec.r0) * i / n;
        for (int j = 0; j < m; ++j) {
            double ang = 2.0 * M_PI * j / m;
            mesh.vertices.push_back({r * std::cos(ang), r * std::sin(ang), 0.0});
        }
    }
    auto node = [&](int ring, int j) { return ring * m + ((j % m) + m) % m; };
    for (int i = 1; i <= n; ++i) {
        for (int j = 0; j < m; ++j) {
            mesh.triangles.push_back({node(i - 1, j), node(i, j + 1), node(i - 1, j + 1)});
            mesh.triangles.push_back({node(i - 1, j), node(i, j), node(i, j + 1)});
        }
    }
    mesh.region.assign(mesh.triangles.size(), Region::insulator);
    if (!spec.conductor.vertex_list.empty())
        tag_conductor_by_vertex_list(mesh, spec.conductor.vertex_list);
    else
        tag_conductor_by_distance(mesh, spec.conductor.radius, {0.0, 0.0, 0.0});
    finalize(mesh);
    // Inner rim carries tag 1, outer rim tag 0.
    double mid = 0.5 * (spec.r0 + spec.R);
    for (auto& e : mesh.boundary_edges)
        e.tag = (norm(mesh.vertices[e.a]) < mid) ? 1 : 0;
    check_conductor_clears_boundary(mesh);
    return mesh;
}

TriMesh generate_square(const MeshSpec& spec) {
    if (spec.side <= 0.0) fail("invalid-spec", "square side must be positive");
    int n = 4 * resolution_scale(spec.resolution);
    double h = spec.side / n;
    Vec3 center = {0.5 * spec.side, 0.5 * spec.side, 0.0};
    if (spec.hole_radius < 0.0) fail("invalid-spec", "hole radius must be nonnegative");
    if (spec.hole_radius > 0.0 && spec.hole_radius >= 0.5 * spec.side - 2.0 * h)
        fail("invalid-spec", "hole too large for the square");

    TriMesh mesh;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) mesh.vertices.push_back({i * h, j * h, 0.0});
    int cbase = mesh.num_vertices();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) mesh.vertices.push_back({(i + 0.5) * h, (j + 0.5) * h, 0.0});
    auto g = [&](int i, int j) { return j * (n + 1) + i; };
    auto c = [&](int i, int j) { return cbase + j * n + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int cc = c(i, j);
            mesh.triangles.push_back({g(i, j), g(i + 1, j), cc});
            mesh.triangles.push_back({g(i + 1, j), g(i + 1, j + 1), cc});
            mesh.triangles.push_back({g(i + 1, j + 1), g(i, j + 1), cc});
            mesh.triangles.push_back({g(i, j + 1), g(i, j), cc});
        }
    }

    if (spec.hole_radius > 0.0) {
        // Drop triangles whose centroid falls inside the hole, then compact.
        std::vector<std::array<int, 3>> kept;
        TriMesh tmp = mesh;
        for (const auto& tri : mesh.triangles) {
            Vec3 cen = (1.0 / 3.0) * (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]);
            if (norm(cen - center) > spec.hole_radius) kept.push_back(tri);
        }
        std::vector<int> remap(mesh.num_vertices(), -1);
        TriMesh out;
        for (const auto& tri : kept) {
            std::array<int, 3> nt{};
            for (int k = 0; k < 3; ++k) {
                if (remap[tri[k]] < 0) {
                    remap[tri[k]] = out.num_vertices();
                    out.vertices.push_back(mesh.vertices[tri[k]]);
                }
                nt[k] = remap[tri[k]];
            }
            out.triangles.push_back(nt);
        }
        mesh = std::move(out);
    }
    mesh.region.assign(mesh.triangles.size(), Region::insulator);
    if (!spec.conductor.vertex_list.empty())
        tag_conductor_by_vertex_list(mesh, spec.conductor.vertex_list);
    else
        tag_conductor_by_distance(mesh, spec.conductor.radius, center);
    finalize(mesh);
    const double tol = 1e-12 * spec.side;
    for (auto& e : mesh.boundary_edges) {
        Vec3 midp = 0.5 * (mesh.vertices[e.a] + mesh.vertices[e.b]);
        bool outer = midp[0] < tol || midp[0] > spec.side - tol || midp[1] < tol || midp[1] > spec.side - tol;
        e.tag = outer ? 0 : 1;
    }
    check_conductor_clears_boundary(mesh);
    return mesh;
}

} // namespace

TriMesh generate(const MeshSpec& spec) {
    switch (spec.generator) {
        case MeshSpec::Generator::disk: return generate_disk(spec);
        case MeshSpec::Generator::annulus: return generate_annulus(spec);
        case MeshSpec::Generator::square_with_hole: return generate_square(spec);
        case MeshSpec::Generator::spherical_cap: return generate_cap(spec);
    }
    fail("invalid-spec", "unknown generator");
}

TriMesh refine(const TriMesh& mesh) {
    validate(mesh);
    TriMesh out;
    out.on_sphere = mesh.on_sphere;
    out.vertices = mesh.vertices;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find({key.first, key.second});
        if (it != midpoint.end()) return it->second;
        Vec3 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        if (mesh.on_sphere) {
            double r = norm(p);
            p = (1.0 / r) * p;
        }
        int idx = out.num_vertices();
        out.vertices.push_back(p);
        midpoint[{key.first, key.second}] = idx;
        return idx;
    };
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        int m01 = mid(tri[0], tri[1]), m12 = mid(tri[1], tri[2]), m20 = mid(tri[2], tri[0]);
        out.triangles.push_back({tri[0], m01, m20});
        out.triangles.push_back({tri[1], m12, m01});
        out.triangles.push_back({tri[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
        for (int k = 0; k < 4; ++k) out.region.push_back(mesh.region[t]);
    }
    for (const auto& e : mesh.boundary_edges) {
        int m = mid(e.a, e.b);
        out.boundary_edges.push_back({e.a, m, e.tag});
        out.boundary_edges.push_back({m, e.b, e.tag});
    }
    finalize(out);
    return out;
}

LevelPolyline level_set_segments(const TriMesh& mesh, const std::vector<double>& f, double t) {
    if (f.size() != mesh.vertices.size()) fail("invalid-field", "field length must equal vertex count");
    double lo = *std::min_element(f.begin(), f.end());
    double hi = *std::max_element(f.begin(), f.end());
    if (!(t > lo && t < hi)) fail("level-empty", "level value outside the open range of the field");

    LevelPolyline poly;
    for (int tr = 0; tr < mesh.num_triangles(); ++tr) {
        const auto& tri = mesh.triangles[tr];
        double s[3];
        for (int k = 0; k < 3; ++k) s[k] = f[tri[k]] - t;

        std::vector<Vec3> pts;
        int nzero = (s[0] == 0.0) + (s[1] == 0.0) + (s[2] == 0.0);
        if (nzero == 3) continue;  // flat patch, measure-degenerate
        if (nzero == 2) {
            // The shared edge lies on the level; count it from one side only.
            int k = (s[0] != 0.0) ? 0 : (s[1] != 0.0 ? 1 : 2);
            if (s[k] > 0.0) {
                pts.push_back(mesh.vertices[tri[(k + 1) % 3]]);
                pts.push_back(mesh.vertices[tri[(k + 2) % 3]]);
            }
        } else {
            for (int k = 0; k < 3; ++k)
                if (s[k] == 0.0 && s[(k + 1) % 3] * s[(k + 2) % 3] < 0.0) pts.push_back(mesh.vertices[tri[k]]);
            for (int k = 0; k < 3; ++k) {
                int a = k, b = (k + 1) % 3;
                if (s[a] * s[b] < 0.0) {
                    double w = s[a] / (s[a] - s[b]);
                    pts.push_back(mesh.vertices[tri[a]] + w * (mesh.vertices[tri[b]] - mesh.vertices[tri[a]]));
                }
            }
        }
        if (pts.size() == 2) {
            double len = norm(pts[1] - pts[0]);
            if (len > 0.0) poly.segments.push_back({pts[0], pts[1], len, tr});
        }
    }
    return poly;
}

// ---------------------------------------------------------------------------
// Text I/O

void write_mesh(std::ostream& out, const TriMesh& mesh) {
    out.precision(17);
    out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges.size() << '\n';
    for (const auto& v : mesh.vertices) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << (mesh.region[t] == Region::conductor ? 1 : 0)
            << '\n';
    }
    for (const auto& e : mesh.boundary_edges) out << e.a << ' ' << e.b << ' ' << e.tag << '\n';
}

TriMesh read_mesh(std::istream& in) {
    TriMesh mesh;
    std::size_t nv = 0, nt = 0, nbe = 0;
    if (!(in >> nv >> nt >> nbe)) fail("mesh-io", "bad mesh header");
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices)
        if (!(in >> v[0] >> v[1] >> v[2])) fail("mesh-io", "bad vertex line");
    mesh.triangles.resize(nt);
    mesh.region.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        int r = 0;
        auto& tri = mesh.triangles[t];
        if (!(in >> tri[0] >> tri[1] >> tri[2] >> r)) fail("mesh-io", "bad triangle line");
        if (r != 0 && r != 1) fail("mesh-io", "region must be 0 or 1");
        mesh.region[t] = r ? Region::conductor : Region::insulator;
    }
    mesh.boundary_edges.resize(nbe);
    for (auto& e : mesh.boundary_edges)
        if (!(in >> e.a >> e.b >> e.tag)) fail("mesh-io", "bad boundary edge line");
    finalize(mesh);
    return mesh;
}

void save_mesh(const std::string& path, const TriMesh& mesh) {
    std::ofstream out(path);
    if (!out) fail("mesh-io", "cannot open " + path + " for writing");
    write_mesh(out, mesh);
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("mesh-io", "cannot open " + path);
    return read_mesh(in);
}

} // namespace hd
