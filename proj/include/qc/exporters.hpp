#pragma once

// OBJ and viewer JSON output.

#include <iosfwd>
#include <optional>
#include <string>

#include "qc/cell.hpp"

namespace qc {

enum class ObjContent { Faces, Edges, Both };

struct ObjOptions {
    ObjContent content = ObjContent::Both;
    bool group_by_class = false;  ///< emit "g thin" and "g fat" groups
    bool triangulate = false;     ///< split each quad into two triangles
    std::optional<double> weld_tol;  ///< default_weld_tolerance(db) when unset
};

/// Welded vertices as "v", then "f" quads (shared faces once) and/or "l" edges,
/// 1-based indices. Propagates WeldToleranceTooCoarse.
void export_obj(std::ostream& out, const CellDatabase& db, const ObjOptions& options = {});
std::string export_obj(const CellDatabase& db, const ObjOptions& options = {});

/// The viewer schema
/// {"meta":{"offsets","range","counts"},"cells":[{"id","type","verts"}]}
/// with numbers rounded to significant_digits (0 keeps full precision).
/// Unknown offsets or range are written as null.
std::string database_json(const CellDatabase& db, int significant_digits = 0);

inline constexpr int kViewerDigits = 9;

void export_json(std::ostream& out, const CellDatabase& db);
std::string export_json(const CellDatabase& db);

}  // namespace qc
