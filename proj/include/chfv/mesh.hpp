#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace chfv {

using Point = std::array<double, 2>;

struct Cell {
    double measure = 0.0; // |K|: length in 1D, area in 2D
    Point center{0.0, 0.0}; // collocation point (centroid / circumcenter)
};

struct Face {
    double measure = 0.0;   // |sigma|: 1 in 1D, edge length in 2D
    int cell_k = -1;        // first adjacent cell
    int cell_l = -1;        // second adjacent cell, -1 for boundary faces
    double d_kl = 0.0;      // distance between adjacent cell centers (interior only)
    double tau = 0.0;       // transmissibility |sigma| / d_kl (interior only)
    Point center{0.0, 0.0};

    bool interior() const { return cell_l >= 0; }
};

/// Admissible TPFA mesh: 1D/2D Cartesian or imported Delaunay triangulation.
/// Immutable after construction; all accessors are safe for concurrent reads.
class Mesh {
public:
    static Mesh cartesian1d(int nx, double lx);
    static Mesh cartesian2d(int nx, int ny, double lx, double ly);

    /// Reads the text format `dim npoints ntriangles` + point lines + triangle
    /// lines (see docs/mesh_format.md). Cell centers are circumcenters;
    /// non-Delaunay face pairs (non-positive center distance) are rejected.
    static Mesh import_delaunay(const std::string& path);
    static Mesh import_delaunay(std::istream& in, const std::string& label);

    int dim() const { return dim_; }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }
    const Cell& cell(int k) const { return cells_[static_cast<size_t>(k)]; }
    const Face& face(int f) const { return faces_[static_cast<size_t>(f)]; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<Face>& faces() const { return faces_; }
    const std::vector<int>& interior_faces() const { return interior_faces_; }
    const std::vector<int>& faces_of_cell(int k) const { return cell_faces_[static_cast<size_t>(k)]; }

    double domain_measure() const { return domain_measure_; }

    /// |sigma|/d_KL for an interior face; throws MeshError on a boundary face
    /// (no-flux boundaries carry no transmissibility).
    double transmissibility(int f) const;

    /// Number of triangles whose circumcenter fell outside the triangle
    /// (accepted but worth knowing about for imported meshes).
    int exterior_center_count() const { return exterior_center_count_; }

    /// Vertex coordinates and per-cell vertex loops, kept for VTK output.
    const std::vector<Point>& points() const { return points_; }
    const std::vector<std::vector<int>>& cell_points() const { return cell_points_; }

    /// Re-checks the admissibility invariants (adjacency symmetry, positive
    /// measures/transmissibilities, orthogonality, measure sum). Throws
    /// MeshError naming the first offending entity. Generated and imported
    /// meshes both pass through here at build time.
    void validate(double ortho_tol) const;

private:
    Mesh() = default;
    void finalize(double ortho_tol);

    int dim_ = 0;
    std::vector<Cell> cells_;
    std::vector<Face> faces_;
    std::vector<int> interior_faces_;
    std::vector<std::vector<int>> cell_faces_;
    std::vector<Point> points_;
    std::vector<std::vector<int>> cell_points_;
    double domain_measure_ = 0.0;
    int exterior_center_count_ = 0;
};

} // namespace chfv
