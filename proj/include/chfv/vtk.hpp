#pragma once

#include "chfv/mesh.hpp"
#include "chfv/model.hpp"

#include <iosfwd>
#include <string>

namespace chfv {

/// Legacy-ASCII VTK unstructured grid with cell data `c1` and the potentials
/// (`mu1`, `mu2` for non-local states, `mu` for local ones).
void write_vtk(std::ostream& out, const Mesh& mesh, const State& state,
               const std::string& title);

void write_vtk_file(const std::string& path, const Mesh& mesh, const State& state,
                    const std::string& title);

} // namespace chfv
