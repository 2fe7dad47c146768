#pragma once

#include <crdual/mesh_io.hpp>
#include <crdual/spaces.hpp>

#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace crdual {

// Text format: "crdual-field <space> <mesh checksum> <count>" then one
// "index value0 value1" line per degree of freedom.

namespace detail {

inline void write_vec2_field(std::ostream& out, const char* space, const Triangulation& mesh,
                             const std::vector<Vec2>& values)
{
    out << "crdual-field " << space << ' ' << mesh_checksum(mesh) << ' ' << values.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << i << ' ' << values[i].x() << ' ' << values[i].y() << '\n';
    }
}

inline std::vector<Vec2> read_vec2_field(std::istream& in, const std::string& space, const Triangulation& mesh)
{
    std::string magic;
    std::string got;
    std::uint64_t checksum = 0;
    std::size_t count = 0;
    if (!(in >> magic >> got >> checksum >> count) || magic != "crdual-field") {
        throw Error("field file: bad header");
    }
    if (got != space) {
        throw Error("field file: expected space '" + space + "', found '" + got + "'");
    }
    if (checksum != mesh_checksum(mesh)) {
        throw Error("field file: mesh checksum mismatch");
    }
    std::vector<Vec2> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t index = 0;
        if (!(in >> index >> values[i].x() >> values[i].y()) || index != i) {
            throw Error("field file: truncated or out-of-order entries");
        }
    }
    return values;
}

} // namespace detail

inline void write_field(std::ostream& out, const Triangulation& mesh, const CRField& v)
{
    detail::write_vec2_field(out, "cr", mesh, v.values);
}

inline void write_field(std::ostream& out, const Triangulation& mesh, const RTField& tau)
{
    detail::write_vec2_field(out, "rt", mesh, tau.flux);
}

inline void write_field(std::ostream& out, const Triangulation& mesh, const P1Field& v)
{
    detail::write_vec2_field(out, "p1", mesh, v.values);
}

inline CRField read_cr_field(std::istream& in, const Triangulation& mesh)
{
    CRField out;
    out.values = detail::read_vec2_field(in, "cr", mesh);
    if (out.size() != mesh.num_sides()) {
        throw Error("field file: wrong number of CR values");
    }
    return out;
}

inline RTField read_rt_field(std::istream& in, const Triangulation& mesh)
{
    RTField out;
    out.flux = detail::read_vec2_field(in, "rt", mesh);
    if (out.size() != mesh.num_sides()) {
        throw Error("field file: wrong number of RT fluxes");
    }
    return out;
}

} // namespace crdual
