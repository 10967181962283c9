#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "atop/anisotropy.hpp"
#include "atop/errors.hpp"
#include "atop/mesh.hpp"

namespace atop {

/// Write a whole file atomically: temp file in the same directory, then
/// rename over the target.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

namespace iodetail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace iodetail

/// Legacy ASCII VTK export of the triangle mesh with named nodal scalar and
/// vector fields. Floats carry 9 significant digits.
inline void write_vtk(const FeMesh& m,
                      const std::vector<std::pair<std::string, const ScalarField*>>& scalars,
                      const std::vector<std::pair<std::string, const VectorField*>>& vectors,
                      const std::filesystem::path& path) {
    std::string out;
    out.reserve(static_cast<size_t>(m.node_count()) * 40);
    out += "# vtk DataFile Version 3.0\n";
    out += "aniso_topo fields\n";
    out += "ASCII\n";
    out += "DATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(m.node_count()) + " double\n";
    for (const Vec2& p : m.nodes)
        out += iodetail::num(p.x) + " " + iodetail::num(p.y) + " 0\n";
    out += "CELLS " + std::to_string(m.element_count()) + " " + std::to_string(4 * m.element_count()) + "\n";
    for (const Triangle& t : m.elements)
        out += "3 " + std::to_string(t.v[0]) + " " + std::to_string(t.v[1]) + " " + std::to_string(t.v[2]) + "\n";
    out += "CELL_TYPES " + std::to_string(m.element_count()) + "\n";
    for (int e = 0; e < m.element_count(); ++e) out += "5\n";
    if (!scalars.empty() || !vectors.empty())
        out += "POINT_DATA " + std::to_string(m.node_count()) + "\n";
    for (const auto& [name, field] : scalars) {
        out += "SCALARS " + name + " double 1\n";
        out += "LOOKUP_TABLE default\n";
        for (double v : *field) out += iodetail::num(v) + "\n";
    }
    for (const auto& [name, field] : vectors) {
        out += "VECTORS " + name + " double\n";
        for (size_t i = 0; i + 1 < field->size(); i += 2)
            out += iodetail::num((*field)[i]) + " " + iodetail::num((*field)[i + 1]) + " 0\n";
    }
    write_text_atomic(path, out);
}

/// Read one named scalar POINT_DATA block back from a legacy VTK file as
/// written above; used by init = from_file.
inline ScalarField read_vtk_scalar(const std::filesystem::path& path, const std::string& name) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string token;
    long points = -1;
    while (is >> token) {
        if (token == "POINT_DATA") {
            is >> points;
        } else if (token == "SCALARS" && points > 0) {
            std::string field_name, type;
            is >> field_name >> type;
            // consume tokens up to and including LOOKUP_TABLE <table-name>
            std::string t;
            while (is >> t && t != "LOOKUP_TABLE") {}
            is >> t;
            if (field_name != name) continue;
            ScalarField f(static_cast<size_t>(points));
            for (long i = 0; i < points; ++i)
                if (!(is >> f[static_cast<size_t>(i)]))
                    throw IoError("truncated SCALARS block in " + path.string());
            return f;
        }
    }
    throw IoError("scalar field " + name + " not found in " + path.string());
}

/// Diagram sample CSV: header x,y then one point per line with the first
/// point repeated at the end to close the curve.
inline std::string diagram_csv(const DiagramSample& d) {
    std::string out = "x,y\n";
    for (const Vec2& p : d.points) out += iodetail::num(p.x) + "," + iodetail::num(p.y) + "\n";
    if (!d.points.empty())
        out += iodetail::num(d.points.front().x) + "," + iodetail::num(d.points.front().y) + "\n";
    return out;
}

inline void write_diagram_csv(const DiagramSample& d, const std::filesystem::path& path) {
    write_text_atomic(path, diagram_csv(d));
}

}  // namespace atop
