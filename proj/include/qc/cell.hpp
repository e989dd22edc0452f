#pragma once

// Cell and database data model shared by the generator, parser and slicer.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qc/icosa_lattice.hpp"
#include "qc/vec3.hpp"

namespace qc {

/// Inclusive integer interval of grid-plane indices along each generating axis.
struct IndexRange {
    int lo = -2;
    int hi = 2;

    int width() const { return hi - lo + 1; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Dual-method identity of a generated cell.
struct CellKey {
    AxisTriple triple{0, 1, 2};
    std::array<int, 3> n{};           ///< plane indices on the triple's axes (ascending axis order)
    std::array<int, 3> complement{};  ///< grid indices on the other three axes (ascending axis order)
    Vec3 seed;                        ///< the plane-triple intersection point
    bool singular = false;            ///< a fourth plane passes within tolerance of the seed

    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct TypeFlag {
    int code = 1;  ///< 1 thin, 2 fat
    friend bool operator==(const TypeFlag&, const TypeFlag&) = default;
};

struct SignedVolume {
    double value = 0.0;
    friend bool operator==(const SignedVolume&, const SignedVolume&) = default;
};

/// Last field of a legacy record: either the class flag or the cell's signed volume.
using RecordTail = std::variant<TypeFlag, SignedVolume>;

/// Vertex order inside a cell: bit 0 of the position selects edge A, bit 1 B, bit 2 C,
/// following (0,0,0),(1,0,0),(0,1,0),(0,0,1),(1,1,0),(1,0,1),(0,1,1),(1,1,1).
inline constexpr std::array<std::array<int, 3>, 8> kEpsilonOrder{{
    {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1},
}};

/// One golden rhombohedron.
struct QCCell {
    std::size_t id = 0;
    std::array<Vec3, 8> verts{};
    CellClass cls = CellClass::Thin;
    double signed_volume = 0.0;
    std::optional<CellKey> key;
    std::optional<RecordTail> tail;   ///< as read from a legacy file
    std::optional<long> source_index; ///< record index printed in the source file

    Vec3 edge_a() const { return verts[1] - verts[0]; }
    Vec3 edge_b() const { return verts[2] - verts[0]; }
    Vec3 edge_c() const { return verts[3] - verts[0]; }
    Vec3 centroid() const;
    /// det[A, B, C] of the three edges leaving vertex 0.
    double edge_determinant() const;
};

struct Counters {
    std::size_t cells = 0;
    std::size_t singularities = 0;
    std::size_t fat = 0;
    std::size_t thin = 0;

    friend bool operator==(const Counters&, const Counters&) = default;
};

/// Counts cells by class and singular keys.
Counters tally(const std::vector<QCCell>& cells);

enum class SourceFormat { Generated, CanonicalCsv, LegacyText, Json };

struct Provenance {
    std::optional<std::array<double, 6>> offsets;
    std::optional<IndexRange> range;
    std::string generator_version;
    std::string source = "generated";  ///< "generated" or "parsed:<name>"
    SourceFormat format = SourceFormat::Generated;
    std::vector<std::string> history;  ///< operations applied after creation, e.g. slices
    bool legacy_data = false;          ///< derived from legacy text, possibly via another format

    /// True when coordinates carry legacy single-precision noise.
    bool legacy_precision() const { return legacy_data || format == SourceFormat::LegacyText; }
};

struct CellDatabase {
    std::vector<QCCell> cells;
    Provenance meta;
    Counters counters;

    std::size_t size() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
    /// Reassigns ids 1..N in order.
    void renumber();
};

std::string_view library_version();

}  // namespace qc
