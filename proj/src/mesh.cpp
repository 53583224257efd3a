#include "chfv/mesh.hpp"

#include "chfv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace chfv {

namespace {

double dist(const Point& a, const Point& b)
{
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// Circumcenter of a non-degenerate triangle.
Point circumcenter(const Point& a, const Point& b, const Point& c)
{
    const double d = 2.0 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
    if (d == 0.0)
        throw MeshError("degenerate (collinear) triangle");
    const double na = a[0] * a[0] + a[1] * a[1];
    const double nb = b[0] * b[0] + b[1] * b[1];
    const double nc = c[0] * c[0] + c[1] * c[1];
    const double ux = (na * (b[1] - c[1]) + nb * (c[1] - a[1]) + nc * (a[1] - b[1])) / d;
    const double uy = (na * (c[0] - b[0]) + nb * (a[0] - c[0]) + nc * (b[0] - a[0])) / d;
    return {ux, uy};
}

double triangle_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

bool point_in_triangle(const Point& p, const Point& a, const Point& b, const Point& c)
{
    auto side = [](const Point& p1, const Point& p2, const Point& q) {
        return (p2[0] - p1[0]) * (q[1] - p1[1]) - (p2[1] - p1[1]) * (q[0] - p1[0]);
    };
    const double s1 = side(a, b, p);
    const double s2 = side(b, c, p);
    const double s3 = side(c, a, p);
    const bool has_neg = (s1 < 0) || (s2 < 0) || (s3 < 0);
    const bool has_pos = (s1 > 0) || (s2 > 0) || (s3 > 0);
    return !(has_neg && has_pos);
}

} // namespace

Mesh Mesh::cartesian1d(int nx, double lx)
{
    if (nx < 1)
        throw MeshError("cartesian1d: nx must be >= 1");
    if (!(lx > 0.0))
        throw MeshError("cartesian1d: Lx must be positive");

    Mesh m;
    m.dim_ = 1;
    const double h = lx / nx;
    m.cells_.resize(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i) {
        m.cells_[static_cast<size_t>(i)].measure = h;
        m.cells_[static_cast<size_t>(i)].center = {(i + 0.5) * h, 0.0};
    }
    // interior faces between consecutive cells; face measure is 1 in 1D
    for (int i = 0; i + 1 < nx; ++i) {
        Face f;
        f.measure = 1.0;
        f.cell_k = i;
        f.cell_l = i + 1;
        f.center = {(i + 1) * h, 0.0};
        m.faces_.push_back(f);
    }
    // the two endpoint boundary faces
    for (double x : {0.0, lx}) {
        Face f;
        f.measure = 1.0;
        f.cell_k = (x == 0.0) ? 0 : nx - 1;
        f.center = {x, 0.0};
        m.faces_.push_back(f);
    }
    m.points_.resize(static_cast<size_t>(nx) + 1);
    for (int i = 0; i <= nx; ++i)
        m.points_[static_cast<size_t>(i)] = {i * h, 0.0};
    m.cell_points_.resize(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i)
        m.cell_points_[static_cast<size_t>(i)] = {i, i + 1};

    m.domain_measure_ = lx; // analytic, validated against the cell sum
    m.finalize(1e-8);
    return m;
}

Mesh Mesh::cartesian2d(int nx, int ny, double lx, double ly)
{
    if (nx < 1 || ny < 1)
        throw MeshError("cartesian2d: nx and ny must be >= 1");
    if (!(lx > 0.0) || !(ly > 0.0))
        throw MeshError("cartesian2d: Lx and Ly must be positive");

    Mesh m;
    m.dim_ = 2;
    const double hx = lx / nx;
    const double hy = ly / ny;
    auto cid = [nx](int i, int j) { return j * nx + i; };

    m.cells_.resize(static_cast<size_t>(nx) * static_cast<size_t>(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Cell& c = m.cells_[static_cast<size_t>(cid(i, j))];
            c.measure = hx * hy;
            c.center = {(i + 0.5) * hx, (j + 0.5) * hy};
        }

    // vertical faces (normal along x)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            Face f;
            f.measure = hy;
            f.center = {i * hx, (j + 0.5) * hy};
            if (i == 0) {
                f.cell_k = cid(0, j);
            } else if (i == nx) {
                f.cell_k = cid(nx - 1, j);
            } else {
                f.cell_k = cid(i - 1, j);
                f.cell_l = cid(i, j);
            }
            m.faces_.push_back(f);
        }
    // horizontal faces (normal along y)
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Face f;
            f.measure = hx;
            f.center = {(i + 0.5) * hx, j * hy};
            if (j == 0) {
                f.cell_k = cid(i, 0);
            } else if (j == ny) {
                f.cell_k = cid(i, ny - 1);
            } else {
                f.cell_k = cid(i, j - 1);
                f.cell_l = cid(i, j);
            }
            m.faces_.push_back(f);
        }

    m.points_.resize(static_cast<size_t>(nx + 1) * static_cast<size_t>(ny + 1));
    auto pid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.points_[static_cast<size_t>(pid(i, j))] = {i * hx, j * hy};
    m.cell_points_.resize(m.cells_.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.cell_points_[static_cast<size_t>(cid(i, j))] =
                {pid(i, j), pid(i + 1, j), pid(i + 1, j + 1), pid(i, j + 1)};

    m.domain_measure_ = lx * ly; // analytic, validated against the cell sum
    m.finalize(1e-8);
    return m;
}

Mesh Mesh::import_delaunay(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw MeshError("cannot open mesh file: " + path);
    return import_delaunay(in, path);
}

Mesh Mesh::import_delaunay(std::istream& in, const std::string& label)
{
    int dim = 0, npoints = 0, ntris = 0;
    if (!(in >> dim >> npoints >> ntris))
        throw MeshError(label + ": malformed header (expected `dim npoints ntriangles`)");
    if (dim != 2)
        throw MeshError(label + ": only dim=2 triangulations are supported");
    if (npoints < 3 || ntris < 1)
        throw MeshError(label + ": needs at least 3 points and 1 triangle");

    Mesh m;
    m.dim_ = 2;
    m.points_.resize(static_cast<size_t>(npoints));
    for (int p = 0; p < npoints; ++p)
        if (!(in >> m.points_[static_cast<size_t>(p)][0] >> m.points_[static_cast<size_t>(p)][1]))
            throw MeshError(label + ": malformed point line " + std::to_string(p));

    m.cell_points_.resize(static_cast<size_t>(ntris));
    for (int t = 0; t < ntris; ++t) {
        int a, b, c;
        if (!(in >> a >> b >> c))
            throw MeshError(label + ": malformed triangle line " + std::to_string(t));
        for (int v : {a, b, c})
            if (v < 0 || v >= npoints)
                throw MeshError(label + ": triangle " + std::to_string(t) + " references point " + std::to_string(v));
        m.cell_points_[static_cast<size_t>(t)] = {a, b, c};
    }

    m.cells_.resize(static_cast<size_t>(ntris));
    for (int t = 0; t < ntris; ++t) {
        const auto& tri = m.cell_points_[static_cast<size_t>(t)];
        const Point &a = m.points_[static_cast<size_t>(tri[0])],
                    &b = m.points_[static_cast<size_t>(tri[1])],
                    &c = m.points_[static_cast<size_t>(tri[2])];
        Cell& cell = m.cells_[static_cast<size_t>(t)];
        cell.measure = triangle_area(a, b, c);
        if (!(cell.measure > 0.0))
            throw MeshError(label + ": triangle " + std::to_string(t) + " has zero area");
        cell.center = circumcenter(a, b, c);
        if (!point_in_triangle(cell.center, a, b, c))
            ++m.exterior_center_count_;
    }

    // assemble edges: interior edges are shared by exactly two triangles
    std::map<std::pair<int, int>, std::vector<int>> edge_cells;
    for (int t = 0; t < ntris; ++t) {
        const auto& tri = m.cell_points_[static_cast<size_t>(t)];
        for (int e = 0; e < 3; ++e) {
            int u = tri[static_cast<size_t>(e)], v = tri[static_cast<size_t>((e + 1) % 3)];
            if (u > v)
                std::swap(u, v);
            edge_cells[{u, v}].push_back(t);
        }
    }
    for (const auto& [edge, cells] : edge_cells) {
        if (cells.size() > 2)
            throw MeshError(label + ": edge shared by more than two triangles");
        const Point &pu = m.points_[static_cast<size_t>(edge.first)],
                    &pv = m.points_[static_cast<size_t>(edge.second)];
        Face f;
        f.measure = dist(pu, pv);
        f.center = {0.5 * (pu[0] + pv[0]), 0.5 * (pu[1] + pv[1])};
        f.cell_k = cells[0];
        if (cells.size() == 2) {
            f.cell_l = cells[1];
            // signed center distance along the face normal; <= 0 means the
            // circumcenters coincide or sit on the wrong sides, i.e. the
            // pair violates the Delaunay/admissibility condition
            const Point &ck = m.cells_[static_cast<size_t>(f.cell_k)].center,
                        &cl = m.cells_[static_cast<size_t>(f.cell_l)].center;
            double nx = pv[1] - pu[1], ny = -(pv[0] - pu[0]);
            const double nn = std::hypot(nx, ny);
            nx /= nn;
            ny /= nn;
            // orient the normal from K towards L using the opposite vertex of K
            const auto& trik = m.cell_points_[static_cast<size_t>(f.cell_k)];
            for (int v : trik)
                if (v != edge.first && v != edge.second) {
                    const Point& opp = m.points_[static_cast<size_t>(v)];
                    if ((opp[0] - f.center[0]) * nx + (opp[1] - f.center[1]) * ny > 0.0) {
                        nx = -nx;
                        ny = -ny;
                    }
                }
            const double signed_d = (cl[0] - ck[0]) * nx + (cl[1] - ck[1]) * ny;
            if (!(signed_d > 1e-12 * f.measure))
                throw MeshError(label + ": non-Delaunay face between triangles " +
                                std::to_string(f.cell_k) + " and " + std::to_string(f.cell_l) +
                                " (signed center distance " + std::to_string(signed_d) + ")");
            f.d_kl = signed_d;
        }
        m.faces_.push_back(f);
    }

    m.finalize(1e-6);
    return m;
}

void Mesh::finalize(double ortho_tol)
{
    interior_faces_.clear();
    cell_faces_.assign(cells_.size(), {});
    if (domain_measure_ == 0.0)
        for (const Cell& c : cells_)
            domain_measure_ += c.measure;

    for (int f = 0; f < num_faces(); ++f) {
        Face& face = faces_[static_cast<size_t>(f)];
        cell_faces_[static_cast<size_t>(face.cell_k)].push_back(f);
        if (face.interior()) {
            cell_faces_[static_cast<size_t>(face.cell_l)].push_back(f);
            if (face.d_kl == 0.0)
                face.d_kl = dist(cells_[static_cast<size_t>(face.cell_k)].center,
                                 cells_[static_cast<size_t>(face.cell_l)].center);
            face.tau = face.measure / face.d_kl;
            interior_faces_.push_back(f);
        }
    }
    validate(ortho_tol);
}

double Mesh::transmissibility(int f) const
{
    const Face& face = faces_.at(static_cast<size_t>(f));
    if (!face.interior())
        throw MeshError("transmissibility requested for boundary face " + std::to_string(f));
    return face.tau;
}

void Mesh::validate(double ortho_tol) const
{
    for (int k = 0; k < num_cells(); ++k)
        if (!(cells_[static_cast<size_t>(k)].measure > 0.0))
            throw MeshError("cell " + std::to_string(k) + " has non-positive measure");

    double sum = 0.0;
    for (const Cell& c : cells_)
        sum += c.measure;
    if (std::abs(sum - domain_measure_) > 1e-12 * domain_measure_)
        throw MeshError("cell measures do not sum to the domain measure");

    for (int f = 0; f < num_faces(); ++f) {
        const Face& face = faces_[static_cast<size_t>(f)];
        if (face.cell_k < 0 || face.cell_k >= num_cells())
            throw MeshError("face " + std::to_string(f) + " has invalid adjacency");
        if (!face.interior())
            continue;
        if (face.cell_l == face.cell_k)
            throw MeshError("face " + std::to_string(f) + " joins a cell to itself");
        if (!(face.d_kl > 0.0) || !(face.tau > 0.0))
            throw MeshError("face " + std::to_string(f) + " has non-positive d_KL or transmissibility");
        // adjacency symmetry
        for (int c : {face.cell_k, face.cell_l}) {
            const auto& fl = cell_faces_[static_cast<size_t>(c)];
            if (std::find(fl.begin(), fl.end(), f) == fl.end())
                throw MeshError("face " + std::to_string(f) + " missing from cell adjacency");
        }
        if (dim_ == 2) {
            // orthogonality: the center segment must align with the face normal
            const Point &ck = cells_[static_cast<size_t>(face.cell_k)].center,
                        &cl = cells_[static_cast<size_t>(face.cell_l)].center;
            const double sx = (cl[0] - ck[0]) / face.d_kl, sy = (cl[1] - ck[1]) / face.d_kl;
            // reconstruct the face tangent from the stored geometry: for both
            // Cartesian and triangle meshes the tangent is orthogonal to the
            // segment if and only if the sine of the angle defect vanishes
            double tx, ty;
            if (!cell_points_.empty()) {
                tx = ty = 0.0;
                // locate the two shared vertices of K and L
                const auto& pk = cell_points_[static_cast<size_t>(face.cell_k)];
                const auto& pl = cell_points_[static_cast<size_t>(face.cell_l)];
                std::vector<int> shared;
                for (int u : pk)
                    if (std::find(pl.begin(), pl.end(), u) != pl.end())
                        shared.push_back(u);
                if (shared.size() == 2) {
                    const Point &a = points_[static_cast<size_t>(shared[0])],
                                &b = points_[static_cast<size_t>(shared[1])];
                    const double len = dist(a, b);
                    tx = (b[0] - a[0]) / len;
                    ty = (b[1] - a[1]) / len;
                } else {
                    continue; // no shared geometric edge recorded (not expected)
                }
            } else {
                continue;
            }
            const double sine = std::abs(sx * tx + sy * ty);
            if (sine > ortho_tol)
                throw MeshError("face " + std::to_string(f) + " violates orthogonality (sin angle = " +
                                std::to_string(sine) + ")");
        }
    }
}

} // namespace chfv
