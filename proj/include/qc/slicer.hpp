#pragma once

// Whole-cell slicing, cell topology and vertex welding.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "qc/cell.hpp"
#include "qc/region.hpp"

namespace qc {

using EdgeIndex = std::array<int, 2>;
using QuadIndex = std::array<int, 4>;

/// The 12 edges of a cell as 0-based vertex positions: pairs differing in one ε bit.
const std::array<EdgeIndex, 12>& cell_edges();
std::array<EdgeIndex, 12> cell_edges(const QCCell& cell);

/// The six faces, wound counter-clockwise seen from outside.
std::array<QuadIndex, 6> cell_faces(const QCCell& cell);

/// Printed vertex connection list of the original description (1-based). It
/// does not agree with the vertex order of the data and is kept for reference.
const std::vector<EdgeIndex>& printed_connectivity();

bool cell_in_region(const QCCell& cell, const Region& region, SliceMode mode);

/// Cells kept whole by the mode's predicate, renumbered, with the operation in meta.history.
CellDatabase slice(const CellDatabase& db, const Region& region,
                   SliceMode mode = SliceMode::AllVertices);

struct WeldedMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 8>> cells;  ///< per cell, in ε order
    std::vector<EdgeIndex> edges;           ///< globally deduplicated, ascending pairs
    std::vector<QuadIndex> quads;           ///< per cell, 6 each, not deduplicated
    std::vector<CellClass> classes;         ///< per cell
};

/// 1e-3 for legacy text data, 1e-6 otherwise.
double default_weld_tolerance(const CellDatabase& db);

/// Merges vertices within tol in the max norm; first occurrence keeps its index.
/// Throws std::invalid_argument when tol <= 0 and WeldToleranceTooCoarse when a
/// cell ends up with fewer than 8 distinct vertices.
WeldedMesh weld(const CellDatabase& db, double tol);

struct BoundingBox {
    Vec3 lo;
    Vec3 hi;
    bool empty = true;
};

struct DatabaseStats {
    Counters counts;
    BoundingBox bounds;
    std::size_t welded_vertices = 0;
    double edge_min = 0.0;
    double edge_max = 0.0;
    double total_volume = 0.0;  ///< sum of |signed volume|
};

DatabaseStats stats(const CellDatabase& db);
DatabaseStats stats(const CellDatabase& db, double weld_tol);

}  // namespace qc
