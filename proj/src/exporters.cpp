#include "qc/exporters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "qc/slicer.hpp"

namespace qc {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
    return buf;
}

struct EdgeHash {
    std::size_t operator()(const EdgeIndex& e) const noexcept {
        return std::hash<long long>()((static_cast<long long>(e[0]) << 32) ^ e[1]);
    }
};

}  // namespace

void export_obj(std::ostream& out, const CellDatabase& db, const ObjOptions& options) {
    const WeldedMesh mesh = weld(db, options.weld_tol.value_or(default_weld_tolerance(db)));
    const bool faces = options.content != ObjContent::Edges;
    const bool edges = options.content != ObjContent::Faces;

    out << "# quasicrystal cells: " << db.size() << '\n';
    for (const auto& v : mesh.vertices) out << "v " << num(v.x) << ' ' << num(v.y) << ' ' << num(v.z) << '\n';

    std::set<std::array<int, 4>> seen_faces;
    std::unordered_set<EdgeIndex, EdgeHash> seen_edges;

    auto emit = [&](std::optional<CellClass> only) {
        if (faces)
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                if (only && mesh.classes[c] != *only) continue;
                for (std::size_t f = 0; f < 6; ++f) {
                    const QuadIndex& q = mesh.quads[c * 6 + f];
                    std::array<int, 4> key = q;
                    std::sort(key.begin(), key.end());
                    if (!seen_faces.insert(key).second) continue;
                    if (options.triangulate) {
                        out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << '\n';
                        out << "f " << q[0] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
                    } else {
                        out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
                    }
                }
            }
        if (edges)
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                if (only && mesh.classes[c] != *only) continue;
                for (const auto& e : cell_edges()) {
                    int a = mesh.cells[c][static_cast<std::size_t>(e[0])];
                    int b = mesh.cells[c][static_cast<std::size_t>(e[1])];
                    if (a > b) std::swap(a, b);
                    if (seen_edges.insert({a, b}).second) out << "l " << a + 1 << ' ' << b + 1 << '\n';
                }
            }
    };

    if (options.group_by_class) {
        out << "g thin\n";
        emit(CellClass::Thin);
        out << "g fat\n";
        emit(CellClass::Fat);
    } else {
        emit(std::nullopt);
    }
}

std::string export_obj(const CellDatabase& db, const ObjOptions& options) {
    std::ostringstream out;
    export_obj(out, db, options);
    return out.str();
}

std::string database_json(const CellDatabase& db, int significant_digits) {
    using nlohmann::json;
    auto round = [&](double v) {
        if (significant_digits <= 0 || v == 0.0) return v;
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
        return std::strtod(buf, nullptr);
    };

    json meta;
    if (db.meta.offsets) {
        json o = json::array();
        for (double g : *db.meta.offsets) o.push_back(round(g));
        meta["offsets"] = o;
    } else {
        meta["offsets"] = nullptr;
    }
    meta["range"] = db.meta.range ? json::array({db.meta.range->lo, db.meta.range->hi}) : json(nullptr);
    meta["counts"] = {{"cells", db.counters.cells},
                      {"fat", db.counters.fat},
                      {"thin", db.counters.thin},
                      {"singularities", db.counters.singularities}};

    json cells = json::array();
    for (const auto& c : db.cells) {
        json verts = json::array();
        for (const auto& v : c.verts) verts.push_back({round(v.x), round(v.y), round(v.z)});
        cells.push_back({{"id", c.id}, {"type", legacy_code(c.cls)}, {"verts", std::move(verts)}});
    }
    json doc;
    doc["meta"] = std::move(meta);
    doc["cells"] = std::move(cells);
    return doc.dump();
}

void export_json(std::ostream& out, const CellDatabase& db) { out << export_json(db); }

std::string export_json(const CellDatabase& db) { return database_json(db, kViewerDigits) + "\n"; }

}  // namespace qc
