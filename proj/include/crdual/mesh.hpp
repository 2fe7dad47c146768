#pragma once

#include <crdual/types.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crdual {

enum class BoundaryLabel { Interior, Dirichlet, Neumann };

inline const char* to_string(BoundaryLabel label)
{
    switch (label) {
    case BoundaryLabel::Interior: return "interior";
    case BoundaryLabel::Dirichlet: return "dirichlet";
    case BoundaryLabel::Neumann: return "neumann";
    }
    return "?";
}

/// Counterclockwise triangle. Local side k is opposite local vertex k; the
/// refinement edge is the side bisected next.
struct Element {
    std::array<Index, 3> vertices{};
    int refinement_edge = 0;
};

/// Global normal points out of elements[0] (the lower element index) and
/// outward on the boundary.
struct Side {
    std::array<Index, 2> vertices{};
    std::array<Index, 2> elements{kNoIndex, kNoIndex};
    BoundaryLabel label = BoundaryLabel::Interior;
    Vec2 normal = Vec2::Zero();

    bool is_boundary() const { return elements[1] == kNoIndex; }
};

/// Sides of an element in local order with orientation sign: +1 when the
/// global side normal is the outward normal of this element.
struct ElementSides {
    std::array<Index, 3> sides{};
    std::array<int, 3> signs{};
};

struct ElementGeometry {
    double area = 0.0;
    Point2 centroid = Point2::Zero();
    double diameter = 0.0;
};

struct SideGeometry {
    double length = 0.0;
    Point2 midpoint = Point2::Zero();
    Vec2 normal = Vec2::Zero();
};

using VertexPair = std::pair<Index, Index>;

struct VertexPairHash {
    std::size_t operator()(const VertexPair& p) const noexcept
    {
        return std::hash<Index>{}(p.first * 0x9E3779B97F4A7C15ULL ^ p.second);
    }
};

using SideIndexMap = std::unordered_map<VertexPair, Index, VertexPairHash>;

inline VertexPair make_pair_sorted(Index a, Index b)
{
    return a < b ? VertexPair{a, b} : VertexPair{b, a};
}

/// Assigns a label to a boundary side from its midpoint.
using Labeler = std::function<BoundaryLabel(const Point2& midpoint)>;

class Triangulation;

namespace detail {
inline Triangulation assemble(std::vector<Point2> vertices, std::vector<Element> elements,
                       const std::function<std::optional<BoundaryLabel>(Index, Index, const Point2&)>& label_of);
}

/// Conforming simplicial mesh of a polygonal domain. Immutable once built.
class Triangulation {
public:
    Triangulation() = default;

    Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
    Index num_elements() const { return static_cast<Index>(elements_.size()); }
    Index num_sides() const { return static_cast<Index>(sides_.size()); }

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Side>& sides() const { return sides_; }

    const Point2& vertex(Index v) const { return vertices_[v]; }
    const Element& element(Index t) const { return elements_[t]; }
    const Side& side(Index s) const { return sides_[s]; }
    const ElementSides& element_sides(Index t) const { return element_sides_[t]; }

    const ElementGeometry& element_geometry(Index t) const { return element_geometry_[t]; }
    const SideGeometry& side_geometry(Index s) const { return side_geometry_[s]; }

    Point2 element_vertex(Index t, int k) const { return vertices_[elements_[t].vertices[k]]; }

    /// Outward unit normal of local side k of element t.
    Vec2 outward_normal(Index t, int k) const
    {
        const auto& es = element_sides_[t];
        return static_cast<double>(es.signs[k]) * sides_[es.sides[k]].normal;
    }

    /// Local index of side s within element t.
    int local_side(Index t, Index s) const
    {
        const auto& es = element_sides_[t];
        for (int k = 0; k < 3; ++k) {
            if (es.sides[k] == s) {
                return k;
            }
        }
        throw Error("local_side: side is not a side of the element");
    }

    bool is_dirichlet_side(Index s) const { return sides_[s].label == BoundaryLabel::Dirichlet; }
    bool is_neumann_side(Index s) const { return sides_[s].label == BoundaryLabel::Neumann; }

    /// Vertices on the closure of the Dirichlet (resp. Neumann) boundary part.
    const std::vector<bool>& dirichlet_vertex_mask() const { return dirichlet_vertices_; }
    const std::vector<bool>& neumann_vertex_mask() const { return neumann_vertices_; }

    Index num_dirichlet_sides() const { return count_label(BoundaryLabel::Dirichlet); }
    Index num_neumann_sides() const { return count_label(BoundaryLabel::Neumann); }

    double total_area() const
    {
        double a = 0.0;
        for (const auto& g : element_geometry_) {
            a += g.area;
        }
        return a;
    }

    double max_diameter() const
    {
        double h = 0.0;
        for (const auto& g : element_geometry_) {
            h = std::max(h, g.diameter);
        }
        return h;
    }

    /// Smallest interior angle over all elements, in radians.
    double min_angle() const
    {
        double m = std::numbers::pi;
        for (Index t = 0; t < num_elements(); ++t) {
            for (int k = 0; k < 3; ++k) {
                const Vec2 a = element_vertex(t, (k + 1) % 3) - element_vertex(t, k);
                const Vec2 b = element_vertex(t, (k + 2) % 3) - element_vertex(t, k);
                const double c = a.dot(b) / (a.norm() * b.norm());
                m = std::min(m, std::acos(std::clamp(c, -1.0, 1.0)));
            }
        }
        return m;
    }

    /// Index of the side with the given endpoints, if such a side exists.
    std::optional<Index> find_side(Index a, Index b) const
    {
        const auto it = side_index_.find(make_pair_sorted(a, b));
        if (it == side_index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

private:
    friend Triangulation detail::assemble(
        std::vector<Point2>, std::vector<Element>,
        const std::function<std::optional<BoundaryLabel>(Index, Index, const Point2&)>&);

    Index count_label(BoundaryLabel label) const
    {
        return static_cast<Index>(std::count_if(sides_.begin(), sides_.end(),
                                                [label](const Side& s) { return s.label == label; }));
    }

    std::vector<Point2> vertices_;
    std::vector<Element> elements_;
    std::vector<Side> sides_;
    std::vector<ElementSides> element_sides_;
    std::vector<ElementGeometry> element_geometry_;
    std::vector<SideGeometry> side_geometry_;
    std::vector<bool> dirichlet_vertices_;
    std::vector<bool> neumann_vertices_;
    SideIndexMap side_index_;
};

inline ElementGeometry element_geometry(const Triangulation& mesh, Index t)
{
    if (t < 0 || t >= mesh.num_elements()) {
        throw Error("element_geometry: invalid element index");
    }
    return mesh.element_geometry(t);
}

inline SideGeometry side_geometry(const Triangulation& mesh, Index s)
{
    if (s < 0 || s >= mesh.num_sides()) {
        throw Error("side_geometry: invalid side index");
    }
    return mesh.side_geometry(s);
}

namespace detail {

inline double signed_area(const Point2& a, const Point2& b, const Point2& c)
{
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

inline int longest_edge(const std::array<Point2, 3>& p)
{
    int best = 0;
    double len = -1.0;
    for (int k = 0; k < 3; ++k) {
        const double l = (p[(k + 2) % 3] - p[(k + 1) % 3]).squaredNorm();
        if (l > len * (1.0 + 1e-12)) {
            len = l;
            best = k;
        }
    }
    return best;
}

inline Triangulation assemble(
    std::vector<Point2> vertices, std::vector<Element> elements,
    const std::function<std::optional<BoundaryLabel>(Index, Index, const Point2&)>& label_of)
{
    Triangulation mesh;
    const Index nv = static_cast<Index>(vertices.size());
    for (const auto& p : vertices) {
        if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
            throw MeshError("non-finite vertex coordinate");
        }
    }
    for (auto& e : elements) {
        for (Index v : e.vertices) {
            if (v < 0 || v >= nv) {
                throw MeshError("element references a vertex index out of range");
            }
        }
        if (e.vertices[0] == e.vertices[1] || e.vertices[1] == e.vertices[2] ||
            e.vertices[0] == e.vertices[2]) {
            throw MeshError("degenerate element: repeated vertex index");
        }
        if (e.refinement_edge < 0 || e.refinement_edge > 2) {
            throw MeshError("refinement edge must be a local index in {0,1,2}");
        }
        double area = signed_area(vertices[e.vertices[0]], vertices[e.vertices[1]],
                                  vertices[e.vertices[2]]);
        if (area < 0.0) {
            // Swap local vertices 1 and 2; local side 1 <-> 2 as well.
            std::swap(e.vertices[1], e.vertices[2]);
            if (e.refinement_edge != 0) {
                e.refinement_edge = 3 - e.refinement_edge;
            }
            area = -area;
        }
        const double scale = (vertices[e.vertices[1]] - vertices[e.vertices[0]]).squaredNorm() +
                             (vertices[e.vertices[2]] - vertices[e.vertices[0]]).squaredNorm();
        if (!(area > 1e-14 * scale)) {
            throw MeshError("degenerate element: zero area");
        }
    }

    const Index ne = static_cast<Index>(elements.size());
    std::vector<Side> sides;
    SideIndexMap side_index;
    side_index.reserve(elements.size() * 2);
    std::vector<ElementSides> element_sides(ne);
    for (Index t = 0; t < ne; ++t) {
        const auto& e = elements[t];
        for (int k = 0; k < 3; ++k) {
            const Index a = e.vertices[(k + 1) % 3];
            const Index b = e.vertices[(k + 2) % 3];
            const VertexPair key = make_pair_sorted(a, b);
            auto it = side_index.find(key);
            if (it == side_index.end()) {
                Side s;
                s.vertices = {a, b};
                s.elements = {t, kNoIndex};
                side_index.emplace(key, static_cast<Index>(sides.size()));
                element_sides[t].sides[k] = static_cast<Index>(sides.size());
                sides.push_back(s);
            }
            else {
                Side& s = sides[it->second];
                if (s.elements[1] != kNoIndex) {
                    throw MeshError("non-conforming input: side shared by more than two elements");
                }
                // A consistently oriented neighbour traverses the side backwards.
                if (s.vertices[0] != b || s.vertices[1] != a) {
                    throw MeshError("non-conforming input: inconsistent orientation across a side");
                }
                s.elements[1] = t;
                element_sides[t].sides[k] = it->second;
            }
        }
    }

    // Hanging nodes: a boundary side whose midsection is covered by two other boundary sides.
    {
        std::unordered_map<Index, std::vector<Index>> boundary_neighbours;
        for (const auto& s : sides) {
            if (s.is_boundary()) {
                boundary_neighbours[s.vertices[0]].push_back(s.vertices[1]);
                boundary_neighbours[s.vertices[1]].push_back(s.vertices[0]);
            }
        }
        for (const auto& s : sides) {
            if (!s.is_boundary()) {
                continue;
            }
            const Index a = s.vertices[0];
            const Index b = s.vertices[1];
            for (Index v : boundary_neighbours[a]) {
                if (v == b) {
                    continue;
                }
                const auto& nb = boundary_neighbours[v];
                if (std::find(nb.begin(), nb.end(), b) == nb.end()) {
                    continue;
                }
                const Vec2 ab = vertices[b] - vertices[a];
                const Vec2 av = vertices[v] - vertices[a];
                const double cross = ab.x() * av.y() - ab.y() * av.x();
                const double t = av.dot(ab) / ab.squaredNorm();
                if (std::abs(cross) <= 1e-12 * ab.squaredNorm() && t > 0.0 && t < 1.0) {
                    throw MeshError("non-conforming input: hanging node");
                }
            }
        }
    }

    std::vector<SideGeometry> side_geometry(sides.size());
    for (std::size_t i = 0; i < sides.size(); ++i) {
        Side& s = sides[i];
        const Point2& a = vertices[s.vertices[0]];
        const Point2& b = vertices[s.vertices[1]];
        const Vec2 tangent = b - a;
        const double length = tangent.norm();
        // Vertices are stored in the counterclockwise order of elements[0],
        // so the right-hand normal is outward for that element.
        const Vec2 normal = Vec2(tangent.y(), -tangent.x()) / length;
        s.normal = normal;
        side_geometry[i] = {length, 0.5 * (a + b), normal};
        if (s.is_boundary()) {
            const auto label = label_of(s.vertices[0], s.vertices[1], side_geometry[i].midpoint);
            if (!label || *label == BoundaryLabel::Interior) {
                throw MeshError("unlabeled boundary side");
            }
            s.label = *label;
        }
        else {
            s.label = BoundaryLabel::Interior;
        }
    }

    for (Index t = 0; t < ne; ++t) {
        for (int k = 0; k < 3; ++k) {
            const Side& s = sides[element_sides[t].sides[k]];
            element_sides[t].signs[k] = (s.elements[0] == t) ? 1 : -1;
        }
    }

    std::vector<ElementGeometry> element_geometry(ne);
    for (Index t = 0; t < ne; ++t) {
        const auto& e = elements[t];
        const Point2& a = vertices[e.vertices[0]];
        const Point2& b = vertices[e.vertices[1]];
        const Point2& c = vertices[e.vertices[2]];
        ElementGeometry g;
        g.area = signed_area(a, b, c);
        g.centroid = (a + b + c) / 3.0;
        g.diameter = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
        element_geometry[t] = g;
    }

    std::vector<bool> dirichlet(nv, false);
    std::vector<bool> neumann(nv, false);
    bool has_dirichlet = false;
    for (const auto& s : sides) {
        if (s.label == BoundaryLabel::Dirichlet) {
            dirichlet[s.vertices[0]] = dirichlet[s.vertices[1]] = true;
            has_dirichlet = true;
        }
        else if (s.label == BoundaryLabel::Neumann) {
            neumann[s.vertices[0]] = neumann[s.vertices[1]] = true;
        }
    }
    if (!has_dirichlet) {
        throw MeshError("the Dirichlet boundary part must contain at least one side");
    }

    mesh.vertices_ = std::move(vertices);
    mesh.elements_ = std::move(elements);
    mesh.sides_ = std::move(sides);
    mesh.element_sides_ = std::move(element_sides);
    mesh.element_geometry_ = std::move(element_geometry);
    mesh.side_geometry_ = std::move(side_geometry);
    mesh.dirichlet_vertices_ = std::move(dirichlet);
    mesh.neumann_vertices_ = std::move(neumann);
    mesh.side_index_ = std::move(side_index);
    return mesh;
}

inline std::vector<Element> with_longest_edges(const std::vector<Point2>& vertices,
                                               const std::vector<std::array<Index, 3>>& triples)
{
    std::vector<Element> elements;
    elements.reserve(triples.size());
    for (const auto& tri : triples) {
        Element e;
        e.vertices = tri;
        bool valid = true;
        for (Index v : tri) {
            valid = valid && v >= 0 && v < static_cast<Index>(vertices.size());
        }
        if (valid) {
            e.refinement_edge =
                longest_edge({vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]});
        }
        elements.push_back(e);
    }
    return elements;
}

} // namespace detail

/// Builds a mesh from vertex-index triples; every boundary side must be listed
/// in `boundary_labels` (keyed by either vertex order). Refinement edges are
/// initialised to the longest edge of each element.
inline Triangulation build_triangulation(std::vector<Point2> vertices,
                                         const std::vector<std::array<Index, 3>>& triples,
                                         const std::map<VertexPair, BoundaryLabel>& boundary_labels)
{
    std::map<VertexPair, BoundaryLabel> labels;
    for (const auto& [pair, label] : boundary_labels) {
        labels[make_pair_sorted(pair.first, pair.second)] = label;
    }
    auto elements = detail::with_longest_edges(vertices, triples);
    return detail::assemble(
        std::move(vertices), std::move(elements),
        [&](Index a, Index b, const Point2&) -> std::optional<BoundaryLabel> {
            const auto it = labels.find(make_pair_sorted(a, b));
            if (it == labels.end()) {
                return std::nullopt;
            }
            return it->second;
        });
}

/// Same, with labels from a geometric predicate on side midpoints.
inline Triangulation build_triangulation(std::vector<Point2> vertices,
                                         const std::vector<std::array<Index, 3>>& triples,
                                         const Labeler& labeler)
{
    auto elements = detail::with_longest_edges(vertices, triples);
    return detail::assemble(std::move(vertices), std::move(elements),
                            [&](Index, Index, const Point2& mid) -> std::optional<BoundaryLabel> {
                                return labeler(mid);
                            });
}

/// Unit square with n x n cells, each split along the diagonal (0,0)-(1,1) direction.
inline Triangulation structured_square_mesh(int n, const Labeler& labeler)
{
    if (n < 1) {
        throw MeshError("structured_square_mesh: n must be positive");
    }
    std::vector<Point2> vertices;
    vertices.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    }
    const auto id = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
    std::vector<std::array<Index, 3>> triples;
    triples.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            triples.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            triples.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return build_triangulation(std::move(vertices), triples, labeler);
}

/// Structured triangulation of the image of the unit square under `map`
/// with nx x ny cells, two triangles per cell.
inline Triangulation structured_mapped_mesh(int nx, int ny,
                                            const std::function<Point2(double, double)>& map,
                                            const Labeler& labeler)
{
    if (nx < 1 || ny < 1) {
        throw MeshError("structured_mapped_mesh: cell counts must be positive");
    }
    std::vector<Point2> vertices;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            vertices.push_back(map(static_cast<double>(i) / nx, static_cast<double>(j) / ny));
        }
    }
    const auto id = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
    std::vector<std::array<Index, 3>> triples;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            triples.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            triples.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return build_triangulation(std::move(vertices), triples, labeler);
}

/// L-shaped domain (-1,1)^2 minus [0,1]x[-1,0] from three n x n unit-square blocks.
/// Diagonals point towards the re-entrant corner in every block.
inline Triangulation lshape_mesh(int n, const Labeler& labeler)
{
    if (n < 1) {
        throw MeshError("lshape_mesh: n must be positive");
    }
    // Grid on [-1,1]^2 with spacing 1/n; cells in the lower-right quadrant are skipped.
    const int m = 2 * n;
    std::vector<Point2> vertices;
    std::vector<Index> id((m + 1) * (m + 1), kNoIndex);
    const auto inside_vertex = [n](int i, int j) { return !(i > n && j < n); };
    for (int j = 0; j <= m; ++j) {
        for (int i = 0; i <= m; ++i) {
            if (inside_vertex(i, j)) {
                id[j * (m + 1) + i] = static_cast<Index>(vertices.size());
                vertices.emplace_back(-1.0 + static_cast<double>(i) / n,
                                      -1.0 + static_cast<double>(j) / n);
            }
        }
    }
    const auto v = [&](int i, int j) { return id[j * (m + 1) + i]; };
    std::vector<std::array<Index, 3>> triples;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (i >= n && j < n) {
                continue;
            }
            // Cells with (i < n) == (j < n) get the "/" diagonal, the others "\",
            // so every diagonal line passes through the origin.
            const bool slash = (i < n) == (j < n);
            if (slash) {
                triples.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
                triples.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
            }
            else {
                triples.push_back({v(i, j), v(i + 1, j), v(i, j + 1)});
                triples.push_back({v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)});
            }
        }
    }
    return build_triangulation(std::move(vertices), triples, labeler);
}

/// Outcome of one bisection sweep; children[t] lists the new elements covering old element t.
struct RefinementResult {
    Triangulation mesh;
    std::vector<std::vector<Index>> children;
};

/// How a marked element is split before closure.
enum class MarkedSplit {
    Once,     ///< bisect the refinement edge
    AllSides  ///< bisect all three sides (four children)
};

/// Newest-vertex bisection of the marked elements with conforming closure.
/// Every marked element is bisected at least once; elements whose sides carry a
/// new midpoint are bisected up to three times.
inline RefinementResult refine_bisection(const Triangulation& mesh, const std::vector<Index>& marked,
                                         MarkedSplit split = MarkedSplit::Once)
{
    const Index ne = mesh.num_elements();
    std::vector<bool> edge_marked(mesh.num_sides(), false);
    std::vector<Index> work;
    const auto mark_side = [&](Index s) {
        if (!edge_marked[s]) {
            edge_marked[s] = true;
            for (Index t : mesh.side(s).elements) {
                if (t != kNoIndex) {
                    work.push_back(t);
                }
            }
        }
    };
    for (Index t : marked) {
        if (t < 0 || t >= ne) {
            throw Error("refine_bisection: invalid element index");
        }
        const auto& es = mesh.element_sides(t);
        if (split == MarkedSplit::AllSides) {
            for (Index s : es.sides) {
                mark_side(s);
            }
        }
        else {
            mark_side(es.sides[mesh.element(t).refinement_edge]);
        }
    }
    // Closure: an element with any marked side must have its refinement edge marked.
    while (!work.empty()) {
        const Index t = work.back();
        work.pop_back();
        mark_side(mesh.element_sides(t).sides[mesh.element(t).refinement_edge]);
    }

    std::vector<Point2> vertices = mesh.vertices();
    std::vector<Index> midpoint(mesh.num_sides(), kNoIndex);
    std::unordered_map<Index, Index> parent_side_of_midpoint;
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        if (edge_marked[s]) {
            midpoint[s] = static_cast<Index>(vertices.size());
            parent_side_of_midpoint.emplace(midpoint[s], s);
            vertices.push_back(mesh.side_geometry(s).midpoint);
        }
    }
    const auto midpoint_of = [&](Index a, Index b) -> Index {
        const auto s = mesh.find_side(a, b);
        if (!s || !edge_marked[*s]) {
            return kNoIndex;
        }
        return midpoint[*s];
    };

    std::vector<Element> elements;
    elements.reserve(2 * ne);
    std::vector<std::vector<Index>> children(ne);
    // Recursive bisection along marked refinement edges.
    std::function<void(const Element&, Index)> bisect = [&](const Element& e, Index parent) {
        const int r = e.refinement_edge;
        const Index peak = e.vertices[r];
        const Index a = e.vertices[(r + 1) % 3];
        const Index b = e.vertices[(r + 2) % 3];
        const Index m = midpoint_of(a, b);
        if (m == kNoIndex) {
            children[parent].push_back(static_cast<Index>(elements.size()));
            elements.push_back(e);
            return;
        }
        // Children (peak, a, m) and (peak, m, b); the new vertex m is the newest,
        // so the refinement edge of each child is the side opposite m.
        Element left;
        left.vertices = {peak, a, m};
        left.refinement_edge = 2;
        Element right;
        right.vertices = {peak, m, b};
        right.refinement_edge = 1;
        bisect(left, parent);
        bisect(right, parent);
    };
    for (Index t = 0; t < ne; ++t) {
        bisect(mesh.element(t), t);
    }

    const auto label_of = [&](Index a, Index b, const Point2&) -> std::optional<BoundaryLabel> {
        if (auto s = mesh.find_side(a, b)) {
            return mesh.side(*s).label;
        }
        // Half of a bisected parent side.
        for (Index v : {a, b}) {
            const auto it = parent_side_of_midpoint.find(v);
            if (it == parent_side_of_midpoint.end()) {
                continue;
            }
            const Side& parent = mesh.side(it->second);
            const Index other = (v == a) ? b : a;
            if (parent.vertices[0] == other || parent.vertices[1] == other) {
                return parent.label;
            }
        }
        return std::nullopt;
    };
    RefinementResult result;
    result.mesh = detail::assemble(std::move(vertices), std::move(elements), label_of);
    result.children = std::move(children);
    return result;
}

/// Uniform refinement: every side is bisected, so each element has exactly
/// four children and h halves.
inline RefinementResult refine_uniform(const Triangulation& mesh)
{
    std::vector<Index> all(mesh.num_elements());
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        all[t] = t;
    }
    return refine_bisection(mesh, all, MarkedSplit::AllSides);
}

/// Checks the structural invariants of a triangulation; returns a description
/// of the first violation or an empty string.
inline std::string check_conformity(const Triangulation& mesh)
{
    std::vector<int> count(mesh.num_sides(), 0);
    for (Index t = 0; t < mesh.num_elements(); ++t) {
        if (!(mesh.element_geometry(t).area > 0.0)) {
            return "element with non-positive area";
        }
        for (Index s : mesh.element_sides(t).sides) {
            ++count[s];
        }
    }
    for (Index s = 0; s < mesh.num_sides(); ++s) {
        const Side& side = mesh.side(s);
        const int expected = side.is_boundary() ? 1 : 2;
        if (count[s] != expected) {
            return "side adjacency count mismatch";
        }
        if (side.is_boundary() == (side.label == BoundaryLabel::Interior)) {
            return "boundary label inconsistent with adjacency";
        }
        if (std::abs(side.normal.norm() - 1.0) > 1e-14) {
            return "side normal is not a unit vector";
        }
        if (!side.is_boundary() && side.elements[0] > side.elements[1]) {
            return "interior side normal not oriented from lower to higher element";
        }
    }
    return {};
}

} // namespace crdual
