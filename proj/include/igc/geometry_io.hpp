#pragma once

// Structured-text import/export for NURBS geometry patches.
//
// Format (line oriented, '#' starts a comment):
//   dim <d>
//   degree <p_1> ... <p_d>
//   knots <t_0> <t_1> ...        (one line per direction)
//   cp <x_1> ... <x_d> <w>       (one line per control point, row-major
//                                 lattice order with the last direction fastest)

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "igc/nurbs.hpp"
#include "igc/spline_core.hpp"

namespace igc {

inline GeometryMap read_geometry(std::istream& in) {
    int dim = 0;
    std::vector<int> degrees;
    std::vector<std::vector<double>> knot_lines;
    std::vector<std::vector<double>> comps;
    std::vector<double> weights;

    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("geometry import: " + what + " (line " + std::to_string(lineno) + ")");
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "dim") {
            if (!(ls >> dim) || dim < 1 || dim > 3) fail("bad dimension");
            comps.resize(static_cast<std::size_t>(dim));
        } else if (key == "degree") {
            int p;
            while (ls >> p) degrees.push_back(p);
            if (static_cast<int>(degrees.size()) != dim) fail("degree count must equal dim");
        } else if (key == "knots") {
            std::vector<double> t;
            double v;
            while (ls >> v) t.push_back(v);
            knot_lines.push_back(std::move(t));
        } else if (key == "cp") {
            if (dim == 0) fail("cp before dim");
            for (int c = 0; c < dim; ++c) {
                double x;
                if (!(ls >> x)) fail("control point needs dim coordinates and a weight");
                comps[static_cast<std::size_t>(c)].push_back(x);
            }
            double w;
            if (!(ls >> w)) fail("control point needs a weight");
            weights.push_back(w);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (dim == 0) throw std::invalid_argument("geometry import: missing dim");
    if (static_cast<int>(knot_lines.size()) != dim)
        throw std::invalid_argument("geometry import: expected one knots line per direction");
    std::vector<KnotVector> kvs;
    for (int a = 0; a < dim; ++a)
        kvs.emplace_back(degrees[static_cast<std::size_t>(a)], knot_lines[static_cast<std::size_t>(a)]);
    TensorKnotGrid grid(std::move(kvs));
    if (static_cast<long>(weights.size()) != grid.basis_count())
        throw std::invalid_argument("geometry import: control point count must equal basis count");
    return GeometryMap(std::move(grid), std::move(weights), std::move(comps));
}

inline GeometryMap read_geometry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("geometry import: cannot open " + path);
    return read_geometry(in);
}

inline void write_geometry(std::ostream& out, const GeometryMap& g) {
    const int d = g.dim();
    out << "dim " << d << "\n";
    out << "degree";
    for (int a = 0; a < d; ++a) out << " " << g.grid().direction(a).degree();
    out << "\n";
    out.precision(17);
    for (int a = 0; a < d; ++a) {
        out << "knots";
        for (double t : g.grid().direction(a).knots()) out << " " << t;
        out << "\n";
    }
    const auto n = static_cast<std::size_t>(g.grid().basis_count());
    for (std::size_t i = 0; i < n; ++i) {
        out << "cp";
        for (int c = 0; c < d; ++c) out << " " << g.components()[static_cast<std::size_t>(c)][i];
        out << " " << g.weights()[i] << "\n";
    }
}

}  // namespace igc
