#pragma once

// Output writers: legacy ASCII VTK for nodal fields, plus helpers for files.

#include "fracmeasure/fem.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fracmeasure {

/// Unstructured grid with every mesh vertex (boundary values 0) and one
/// POINT_DATA scalar array per named field; all fields must share the mesh.
inline void write_vtk(std::ostream& out, const std::vector<std::pair<std::string, FEFunction>>& fields,
                      const std::string& title = "fracmeasure") {
    if (fields.empty()) throw DomainError("write_vtk: no fields");
    const Mesh& mesh = *fields.front().second.mesh();
    for (const auto& [name, f] : fields) {
        if (f.mesh().get() != &mesh) throw DimensionMismatch("write_vtk: fields live on different meshes");
        if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
            throw DomainError("write_vtk: field names must be non-empty without whitespace");
        }
    }
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& [name, f] : fields) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        const Vector values = f.nodal_values();
        for (Eigen::Index v = 0; v < values.size(); ++v) out << values[v] << '\n';
    }
}

inline void write_vtk(std::ostream& out, const std::string& name, const FEFunction& field) {
    write_vtk(out, {{name, field}});
}

/// Number of points declared by a legacy VTK file.
inline std::size_t read_vtk_point_count(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream words(line);
        std::string keyword;
        words >> keyword;
        if (keyword != "POINTS") continue;
        long count = -1;
        if (!(words >> count) || count < 0) throw ParseError("malformed POINTS line", line_no);
        return static_cast<std::size_t>(count);
    }
    throw ParseError("no POINTS section", line_no);
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace fracmeasure
