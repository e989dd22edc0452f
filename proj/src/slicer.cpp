#include "qc/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "qc/errors.hpp"

namespace qc {

// ---------------------------------------------------------------------------
// Regions

namespace {

Vec3 unit_normal(const Vec3& n, double& scale) {
    if (!is_finite(n)) throw std::invalid_argument("region normal must be finite");
    scale = norm(n);
    if (!(scale > 1e-12)) throw std::invalid_argument("region normal must be non-zero");
    return n / scale;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

// A non-unit normal is scaled to unit length together with its offsets, so the
// described point set is unchanged.
Region make_half_space(Vec3 normal, double offset) {
    require_finite(offset, "half-space offset");
    double s = 1.0;
    const Vec3 n = unit_normal(normal, s);
    return HalfSpace{n, offset / s};
}

Region make_slab(Vec3 normal, double lo, double hi) {
    require_finite(lo, "slab bound");
    require_finite(hi, "slab bound");
    if (lo > hi) throw std::invalid_argument("slab requires lo <= hi");
    double s = 1.0;
    const Vec3 n = unit_normal(normal, s);
    return Slab{n, lo / s, hi / s};
}

Region make_ball(Vec3 center, double radius) {
    if (!is_finite(center)) throw std::invalid_argument("ball center must be finite");
    require_finite(radius, "ball radius");
    if (radius < 0.0) throw std::invalid_argument("ball radius must be >= 0");
    return Ball{center, radius};
}

Region make_convex(std::vector<HalfSpace> planes) {
    for (auto& h : planes) h = std::get<HalfSpace>(make_half_space(h.normal, h.offset));
    return ConvexIntersection{std::move(planes)};
}

bool contains(const Region& region, const Vec3& p) {
    struct Visitor {
        const Vec3& p;
        bool operator()(const AllSpace&) const { return true; }
        bool operator()(const HalfSpace& h) const { return dot(h.normal, p) <= h.offset; }
        bool operator()(const Slab& s) const {
            const double d = dot(s.normal, p);
            return s.lo <= d && d <= s.hi;
        }
        bool operator()(const Ball& b) const {
            const Vec3 d = p - b.center;
            return dot(d, d) <= b.radius * b.radius;
        }
        bool operator()(const ConvexIntersection& c) const {
            return std::all_of(c.planes.begin(), c.planes.end(),
                               [&](const HalfSpace& h) { return (*this)(h); });
        }
    };
    return std::visit(Visitor{p}, region);
}

std::string describe(const Region& region) {
    struct Visitor {
        std::ostringstream& os;
        void operator()(const AllSpace&) const { os << "all"; }
        void operator()(const HalfSpace& h) const { os << "half_space n=" << h.normal << " d=" << h.offset; }
        void operator()(const Slab& s) const {
            os << "slab n=" << s.normal << " " << s.lo << ".." << s.hi;
        }
        void operator()(const Ball& b) const { os << "ball c=" << b.center << " r=" << b.radius; }
        void operator()(const ConvexIntersection& c) const {
            os << "convex[";
            for (std::size_t i = 0; i < c.planes.size(); ++i) {
                if (i) os << "; ";
                (*this)(c.planes[i]);
            }
            os << "]";
        }
    };
    std::ostringstream os;
    os.precision(10);
    std::visit(Visitor{os}, region);
    return os.str();
}

std::string_view to_string(SliceMode mode) {
    switch (mode) {
        case SliceMode::AllVertices: return "all_vertices";
        case SliceMode::AnyVertex: return "any_vertex";
        case SliceMode::Centroid: return "centroid";
    }
    return "?";
}

SliceMode parse_slice_mode(std::string_view text) {
    if (text == "all_vertices") return SliceMode::AllVertices;
    if (text == "any_vertex") return SliceMode::AnyVertex;
    if (text == "centroid") return SliceMode::Centroid;
    throw std::invalid_argument("unknown slice mode '" + std::string(text) +
                                "' (expected all_vertices, any_vertex or centroid)");
}

// ---------------------------------------------------------------------------
// Cell topology

const std::array<EdgeIndex, 12>& cell_edges() {
    static constexpr std::array<EdgeIndex, 12> edges{{
        {0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 4}, {2, 6}, {3, 5}, {3, 6}, {4, 7}, {5, 7}, {6, 7},
    }};
    return edges;
}

std::array<EdgeIndex, 12> cell_edges(const QCCell&) { return cell_edges(); }

std::array<QuadIndex, 6> cell_faces(const QCCell& cell) {
    std::array<QuadIndex, 6> faces{{
        {0, 3, 6, 2}, {1, 4, 7, 5}, {0, 1, 5, 3}, {2, 6, 7, 4}, {0, 2, 4, 1}, {3, 5, 7, 6},
    }};
    if (cell.edge_determinant() < 0.0)
        for (auto& f : faces) std::reverse(f.begin(), f.end());
    return faces;
}

const std::vector<EdgeIndex>& printed_connectivity() {
    static const std::vector<EdgeIndex> list{
        {1, 2}, {1, 4}, {1, 6}, {2, 3}, {2, 5}, {3, 4}, {3, 8}, {4, 7}, {5, 6}, {5, 8}, {6, 7}, {7, 8},
    };
    return list;
}

// ---------------------------------------------------------------------------
// Slicing

bool cell_in_region(const QCCell& cell, const Region& region, SliceMode mode) {
    switch (mode) {
        case SliceMode::AllVertices:
            return std::all_of(cell.verts.begin(), cell.verts.end(),
                               [&](const Vec3& v) { return contains(region, v); });
        case SliceMode::AnyVertex:
            return std::any_of(cell.verts.begin(), cell.verts.end(),
                               [&](const Vec3& v) { return contains(region, v); });
        case SliceMode::Centroid:
            return contains(region, cell.centroid());
    }
    return false;
}

CellDatabase slice(const CellDatabase& db, const Region& region, SliceMode mode) {
    CellDatabase out;
    out.meta = db.meta;
    for (const auto& c : db.cells)
        if (cell_in_region(c, region, mode)) out.cells.push_back(c);
    out.renumber();
    out.counters = tally(out.cells);
    // Parsed cells carry no key; keep the stored singularity count for an identity slice.
    if (std::holds_alternative<AllSpace>(region)) out.counters.singularities = db.counters.singularities;
    out.meta.history.push_back("slice " + describe(region) + " mode=" + std::string(to_string(mode)));
    return out;
}

// ---------------------------------------------------------------------------
// Welding

namespace {

struct GridKey {
    long long x, y, z;
    bool operator==(const GridKey&) const = default;
};

struct GridKeyHash {
    std::size_t operator()(const GridKey& k) const noexcept {
        return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
    }
};

struct PairHash {
    std::size_t operator()(const EdgeIndex& e) const noexcept {
        return std::hash<long long>()((static_cast<long long>(e[0]) << 32) ^ e[1]);
    }
};

}  // namespace

double default_weld_tolerance(const CellDatabase& db) {
    return db.meta.legacy_precision() ? 1e-3 : 1e-6;
}

WeldedMesh weld(const CellDatabase& db, double tol) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw std::invalid_argument("weld tolerance must be positive");
    WeldedMesh mesh;
    std::unordered_map<GridKey, std::vector<int>, GridKeyHash> grid;
    auto key_of = [&](const Vec3& p) {
        return GridKey{static_cast<long long>(std::floor(p.x / tol)),
                       static_cast<long long>(std::floor(p.y / tol)),
                       static_cast<long long>(std::floor(p.z / tol))};
    };
    auto index_of = [&](const Vec3& p) {
        const GridKey k = key_of(p);
        int best = -1;
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == grid.end()) continue;
                    for (int i : it->second)
                        if (max_abs(mesh.vertices[static_cast<std::size_t>(i)] - p) <= tol &&
                            (best < 0 || i < best))
                            best = i;
                }
        if (best >= 0) return best;
        const int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        grid[k].push_back(idx);
        return idx;
    };

    std::unordered_set<EdgeIndex, PairHash> seen_edges;
    mesh.cells.reserve(db.cells.size());
    for (const auto& c : db.cells) {
        std::array<int, 8> idx{};
        for (std::size_t v = 0; v < 8; ++v) idx[v] = index_of(c.verts[v]);
        std::array<int, 8> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw WeldToleranceTooCoarse(c.id, tol);
        mesh.cells.push_back(idx);
        mesh.classes.push_back(c.cls);
        for (const auto& e : cell_edges()) {
            int a = idx[static_cast<std::size_t>(e[0])];
            int b = idx[static_cast<std::size_t>(e[1])];
            if (a > b) std::swap(a, b);
            if (seen_edges.insert({a, b}).second) mesh.edges.push_back({a, b});
        }
        for (const auto& f : cell_faces(c))
            mesh.quads.push_back({idx[static_cast<std::size_t>(f[0])], idx[static_cast<std::size_t>(f[1])],
                                  idx[static_cast<std::size_t>(f[2])], idx[static_cast<std::size_t>(f[3])]});
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// Statistics

DatabaseStats stats(const CellDatabase& db, double weld_tol) {
    DatabaseStats s;
    s.counts = tally(db.cells);
    s.counts.singularities = std::max(s.counts.singularities, db.counters.singularities);
    if (db.cells.empty()) return s;

    constexpr double inf = std::numeric_limits<double>::infinity();
    s.bounds = {{inf, inf, inf}, {-inf, -inf, -inf}, false};
    s.edge_min = inf;
    s.edge_max = 0.0;
    for (const auto& c : db.cells) {
        for (const auto& v : c.verts) {
            s.bounds.lo = {std::min(s.bounds.lo.x, v.x), std::min(s.bounds.lo.y, v.y), std::min(s.bounds.lo.z, v.z)};
            s.bounds.hi = {std::max(s.bounds.hi.x, v.x), std::max(s.bounds.hi.y, v.y), std::max(s.bounds.hi.z, v.z)};
        }
        for (const auto& e : cell_edges()) {
            const double len = norm(c.verts[static_cast<std::size_t>(e[1])] - c.verts[static_cast<std::size_t>(e[0])]);
            s.edge_min = std::min(s.edge_min, len);
            s.edge_max = std::max(s.edge_max, len);
        }
        s.total_volume += std::abs(c.edge_determinant());
    }
    s.welded_vertices = weld(db, weld_tol).vertices.size();
    return s;
}

DatabaseStats stats(const CellDatabase& db) { return stats(db, default_weld_tolerance(db)); }

}  // namespace qc
