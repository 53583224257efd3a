#include "chfv/vtk.hpp"

#include "chfv/errors.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace chfv {

namespace {

int vtk_cell_type(size_t nverts)
{
    switch (nverts) {
    case 2:
        return 3; // VTK_LINE
    case 3:
        return 5; // VTK_TRIANGLE
    case 4:
        return 9; // VTK_QUAD
    default:
        return 7; // VTK_POLYGON
    }
}

void write_scalar_field(std::ostream& out, const std::string& name, const std::vector<double>& v)
{
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    char buf[64];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", x);
        out << buf;
    }
}

} // namespace

void write_vtk(std::ostream& out, const Mesh& mesh, const State& state, const std::string& title)
{
    if (state.num_cells() != mesh.num_cells())
        throw std::invalid_argument("write_vtk: state/mesh size mismatch");

    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.points().size() << " double\n";
    char buf[128];
    for (const Point& p : mesh.points()) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g 0\n", p[0], p[1]);
        out << buf;
    }
    size_t list_size = 0;
    for (const auto& cp : mesh.cell_points())
        list_size += cp.size() + 1;
    out << "CELLS " << mesh.cell_points().size() << " " << list_size << "\n";
    for (const auto& cp : mesh.cell_points()) {
        out << cp.size();
        for (int p : cp)
            out << " " << p;
        out << "\n";
    }
    out << "CELL_TYPES " << mesh.cell_points().size() << "\n";
    for (const auto& cp : mesh.cell_points())
        out << vtk_cell_type(cp.size()) << "\n";

    out << "CELL_DATA " << mesh.num_cells() << "\n";
    write_scalar_field(out, "c1", state.c1);
    if (state.kind == ModelKind::nonlocal) {
        write_scalar_field(out, "mu1", state.mu1);
        write_scalar_field(out, "mu2", state.mu2);
    } else {
        write_scalar_field(out, "mu", state.mu1);
    }
}

void write_vtk_file(const std::string& path, const Mesh& mesh, const State& state,
                    const std::string& title)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open output file: " + path);
    write_vtk(out, mesh, state, title);
}

} // namespace chfv
