#pragma once

#include <crdual/mesh.hpp>

#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace crdual {

// Text format:
//   crdual-mesh 1
//   vertices <n>          then n lines "x y"
//   elements <m>          then m lines "v0 v1 v2 refinement_edge"
//   boundary <k>          then k lines "a b dirichlet|neumann"

inline void write_mesh(std::ostream& out, const Triangulation& mesh)
{
    out << "crdual-mesh 1\n";
    out << "vertices " << mesh.num_vertices() << '\n';
    out << std::setprecision(17);
    for (const auto& p : mesh.vertices()) {
        out << p.x() << ' ' << p.y() << '\n';
    }
    out << "elements " << mesh.num_elements() << '\n';
    for (const auto& e : mesh.elements()) {
        out << e.vertices[0] << ' ' << e.vertices[1] << ' ' << e.vertices[2] << ' '
            << e.refinement_edge << '\n';
    }
    Index nb = 0;
    for (const auto& s : mesh.sides()) {
        nb += s.is_boundary() ? 1 : 0;
    }
    out << "boundary " << nb << '\n';
    for (const auto& s : mesh.sides()) {
        if (s.is_boundary()) {
            out << s.vertices[0] << ' ' << s.vertices[1] << ' ' << to_string(s.label) << '\n';
        }
    }
}

namespace detail {

inline void expect_token(std::istream& in, const std::string& token)
{
    std::string word;
    if (!(in >> word) || word != token) {
        throw MeshError("mesh file: expected '" + token + "'");
    }
}

inline BoundaryLabel parse_label(const std::string& word)
{
    if (word == "dirichlet") {
        return BoundaryLabel::Dirichlet;
    }
    if (word == "neumann") {
        return BoundaryLabel::Neumann;
    }
    throw MeshError("mesh file: unknown boundary label '" + word + "'");
}

} // namespace detail

inline Triangulation read_mesh(std::istream& in)
{
    detail::expect_token(in, "crdual-mesh");
    int version = 0;
    if (!(in >> version) || version != 1) {
        throw MeshError("mesh file: unsupported version");
    }
    Index n = 0;
    detail::expect_token(in, "vertices");
    if (!(in >> n) || n < 0) {
        throw MeshError("mesh file: bad vertex count");
    }
    std::vector<Point2> vertices(n);
    for (auto& p : vertices) {
        if (!(in >> p.x() >> p.y())) {
            throw MeshError("mesh file: truncated vertex list");
        }
    }
    detail::expect_token(in, "elements");
    if (!(in >> n) || n < 0) {
        throw MeshError("mesh file: bad element count");
    }
    std::vector<Element> elements(n);
    for (auto& e : elements) {
        if (!(in >> e.vertices[0] >> e.vertices[1] >> e.vertices[2] >> e.refinement_edge)) {
            throw MeshError("mesh file: truncated element list");
        }
    }
    detail::expect_token(in, "boundary");
    if (!(in >> n) || n < 0) {
        throw MeshError("mesh file: bad boundary count");
    }
    std::map<VertexPair, BoundaryLabel> labels;
    for (Index i = 0; i < n; ++i) {
        Index a = 0;
        Index b = 0;
        std::string word;
        if (!(in >> a >> b >> word)) {
            throw MeshError("mesh file: truncated boundary list");
        }
        labels[make_pair_sorted(a, b)] = detail::parse_label(word);
    }
    return detail::assemble(std::move(vertices), std::move(elements),
                            [&](Index a, Index b, const Point2&) -> std::optional<BoundaryLabel> {
                                const auto it = labels.find(make_pair_sorted(a, b));
                                if (it == labels.end()) {
                                    return std::nullopt;
                                }
                                return it->second;
                            });
}

inline std::string mesh_to_string(const Triangulation& mesh)
{
    std::ostringstream out;
    write_mesh(out, mesh);
    return out.str();
}

inline Triangulation mesh_from_string(const std::string& text)
{
    std::istringstream in(text);
    return read_mesh(in);
}

/// FNV-1a over coordinates, connectivity and labels; identifies the mesh a field lives on.
inline std::uint64_t mesh_checksum(const Triangulation& mesh)
{
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& p : mesh.vertices()) {
        const double xy[2] = {p.x(), p.y()};
        mix(xy, sizeof xy);
    }
    for (const auto& e : mesh.elements()) {
        mix(e.vertices.data(), sizeof(Index) * 3);
        mix(&e.refinement_edge, sizeof e.refinement_edge);
    }
    for (const auto& s : mesh.sides()) {
        const int label = static_cast<int>(s.label);
        mix(&label, sizeof label);
    }
    return h;
}

} // namespace crdual
