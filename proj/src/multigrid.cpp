#include "qc/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "qc/errors.hpp"
#include "qc/slicer.hpp"

namespace qc {

// ---------------------------------------------------------------------------
// Conventions

int AxisLabeling::physical_axis(int label) const {
    if (label < 0 || label >= kAxisCount) throw std::out_of_range("axis label");
    const int pole_label = pole_last ? 5 : 0;
    if (label == pole_label) return 0;
    const int i = pole_last ? label : label - 1;  // position on the ring, 0..4
    const int r = ((ring_reflected ? -i : i) + ring_rotation) % 5;
    return 1 + (r + 5) % 5;
}

int AxisLabeling::label_of(int axis) const {
    for (int label = 0; label < kAxisCount; ++label)
        if (physical_axis(label) == axis) return label;
    throw std::out_of_range("axis index");
}

std::vector<AxisLabeling> AxisLabeling::all() {
    std::vector<AxisLabeling> out;
    for (bool pole_last : {false, true})
        for (bool reflected : {false, true})
            for (int rot = 0; rot < 5; ++rot) out.push_back({pole_last, rot, reflected});
    return out;
}

std::string Convention::describe() const {
    std::ostringstream os;
    os << "rounding=" << (rounding == Rounding::Ceil ? "ceil" : "floor")
       << " span_base=" << span_base
       << " edges=" << (sense == EdgeSense::Ascending ? "ascending" : "descending")
       << " pole=" << (labeling.pole_last ? "last" : "first")
       << " ring_rotation=" << labeling.ring_rotation
       << " ring_reflected=" << (labeling.ring_reflected ? "yes" : "no");
    return os.str();
}

Convention Convention::canonical() { return {}; }

Convention Convention::legacy() {
    // Recovered by calibrate() from the published records; the acceptance suite
    // re-derives it and checks it against this value.
    Convention c;
    c.rounding = Rounding::Floor;
    c.span_base = -1;
    c.sense = EdgeSense::Descending;
    c.labeling = {true, 3, false};
    return c;
}

std::vector<Convention> Convention::search_space() {
    std::vector<Convention> out;
    for (const auto& labeling : AxisLabeling::all())
        for (Rounding r : {Rounding::Ceil, Rounding::Floor})
            for (int base : {0, -1})
                for (EdgeSense s : {EdgeSense::Ascending, EdgeSense::Descending})
                    out.push_back({r, base, s, labeling});
    return out;
}

// ---------------------------------------------------------------------------
// Grid specification

void check(const GridSpec& spec) {
    if (spec.range.lo > spec.range.hi)
        throw std::invalid_argument("index range is empty: " + std::to_string(spec.range.lo) +
                                    ".." + std::to_string(spec.range.hi));
    for (double g : spec.offsets)
        if (!std::isfinite(g)) throw std::invalid_argument("offsets must be finite");
    if (!(spec.singularity_tol > 0.0) || !(spec.classify_tol > 0.0))
        throw std::invalid_argument("tolerances must be positive");
}

std::vector<std::string> normalize_offsets(Offsets& offsets) {
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double g = offsets[i];
        if (!std::isfinite(g) || (g >= 0.0 && g < 1.0)) continue;
        double r = g - std::floor(g);
        if (r >= 1.0) r = 0.0;
        offsets[i] = r;
        std::ostringstream os;
        os << "offset " << i << " = " << g << " reduced mod 1 to " << r;
        warnings.push_back(os.str());
    }
    return warnings;
}

Offsets physical_offsets(const Offsets& labelled, const AxisLabeling& labeling) {
    Offsets out{};
    for (int label = 0; label < kAxisCount; ++label)
        out[static_cast<std::size_t>(labeling.physical_axis(label))] =
            labelled[static_cast<std::size_t>(label)];
    return out;
}

std::size_t projected_cell_count(const IndexRange& range) {
    if (range.lo > range.hi) return 0;
    const auto w = static_cast<std::size_t>(range.width());
    return kTripleCount * w * w * w;
}

// ---------------------------------------------------------------------------
// Dual construction

Vec3 intersect_planes(const AxisTriple& t, const std::array<int, 3>& n, const Offsets& gamma,
                      const StarBasis& basis) {
    // Gaussian elimination with partial pivoting on the rows e_j, e_k, e_l.
    double a[3][4];
    for (int r = 0; r < 3; ++r) {
        const Vec3& e = basis[t[r]];
        a[r][0] = e.x;
        a[r][1] = e.y;
        a[r][2] = e.z;
        a[r][3] = n[static_cast<std::size_t>(r)] + gamma[static_cast<std::size_t>(t[r])];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12) throw SingularMatrix("plane triple has no unique intersection");
        if (piv != col)
            for (int c = 0; c < 4; ++c) std::swap(a[piv][c], a[col][c]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    double x[3];
    for (int r = 2; r >= 0; --r) {
        double s = a[r][3];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return {x[0], x[1], x[2]};
}

GridIndex grid_index(const Vec3& x, int m, double gamma_m, Rounding rounding, double tol,
                     const StarBasis& basis) {
    const double s = dot(basis[m], x) - gamma_m;
    const double nearest = std::round(s);
    if (std::abs(s - nearest) < tol) return {static_cast<long>(nearest), true};
    const double v = rounding == Rounding::Ceil ? std::ceil(s) : std::floor(s);
    return {static_cast<long>(v), false};
}

bool is_singular(const Vec3& x, const AxisTriple& t, const Offsets& gamma, double tol,
                 const StarBasis& basis) {
    for (int m : t.complement()) {
        const double s = dot(basis[m], x) - gamma[static_cast<std::size_t>(m)];
        if (std::abs(s - std::round(s)) < tol) return true;
    }
    return false;
}

namespace {

// Axes of the triple in edge order A, B, C: sorted by external label.
std::array<int, 3> edge_axes(const AxisTriple& t, const AxisLabeling& labeling) {
    std::array<int, 3> axes = t.axes();
    std::sort(axes.begin(), axes.end(),
              [&](int a, int b) { return labeling.label_of(a) < labeling.label_of(b); });
    return axes;
}

long plane_value(const CellKey& key, int axis) {
    for (int i = 0; i < 3; ++i)
        if (key.triple[i] == axis) return key.n[static_cast<std::size_t>(i)];
    throw std::logic_error("axis not in triple");
}

}  // namespace

std::array<std::array<long, kAxisCount>, 8> lattice_coordinates(const CellKey& key,
                                                                const Convention& convention) {
    std::array<long, kAxisCount> base{};
    const auto comp = key.triple.complement();
    for (int i = 0; i < 3; ++i)
        base[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] =
            key.complement[static_cast<std::size_t>(i)];
    const auto axes = edge_axes(key.triple, convention.labeling);

    std::array<std::array<long, kAxisCount>, 8> out{};
    for (std::size_t v = 0; v < 8; ++v) {
        out[v] = base;
        for (std::size_t i = 0; i < 3; ++i) {
            const int axis = axes[i];
            const int eps = kEpsilonOrder[v][i];
            const int step = convention.sense == EdgeSense::Ascending ? eps : 1 - eps;
            out[v][static_cast<std::size_t>(axis)] =
                plane_value(key, axis) + convention.span_base + step;
        }
    }
    return out;
}

Vec3 lattice_point(const std::array<long, kAxisCount>& coords, const StarBasis& basis) {
    Vec3 p;
    for (int m = 0; m < kAxisCount; ++m)
        p += static_cast<double>(coords[static_cast<std::size_t>(m)]) * basis[m];
    return p;
}

QCCell build_cell(const AxisTriple& t, const std::array<int, 3>& n, const Offsets& gamma,
                  const StarBasis& basis, const Convention& convention,
                  const BuildOptions& options) {
    CellKey key;
    key.triple = t;
    key.n = n;
    key.seed = intersect_planes(t, n, gamma, basis);
    const auto comp = t.complement();
    for (std::size_t i = 0; i < 3; ++i) {
        const int m = comp[i];
        const GridIndex g = grid_index(key.seed, m, gamma[static_cast<std::size_t>(m)],
                                       convention.rounding, options.singularity_tol, basis);
        key.complement[i] = static_cast<int>(g.value);
        key.singular = key.singular || g.on_plane;
    }

    QCCell cell;
    const auto coords = lattice_coordinates(key, convention);
    for (std::size_t v = 0; v < 8; ++v) cell.verts[v] = lattice_point(coords[v], basis);
    cell.signed_volume = cell.edge_determinant();
    cell.cls = classify_volume(cell.signed_volume, options.classify_tol);
    cell.key = key;
    return cell;
}

GenerationResult generate(const GridSpec& spec, const StarBasis& basis,
                          const Convention& convention) {
    check(spec);
    const Offsets gamma = physical_offsets(spec.offsets, convention.labeling);
    const BuildOptions options{spec.singularity_tol, spec.classify_tol};

    GenerationResult result;
    auto& cells = result.db.cells;
    cells.reserve(projected_cell_count(spec.range));
    for (const auto& t : all_triples()) {
        for (int a = spec.range.lo; a <= spec.range.hi; ++a)
            for (int b = spec.range.lo; b <= spec.range.hi; ++b)
                for (int c = spec.range.lo; c <= spec.range.hi; ++c) {
                    QCCell cell = build_cell(t, {a, b, c}, gamma, basis, convention, options);
                    ++result.counters.cells;
                    (cell.cls == CellClass::Fat ? result.counters.fat : result.counters.thin)++;
                    if (cell.key->singular) ++result.counters.singularities;
                    if (spec.region && !cell_in_region(cell, *spec.region, spec.region_mode))
                        continue;
                    cells.push_back(std::move(cell));
                }
    }
    result.db.renumber();
    result.db.counters = spec.region ? tally(cells) : result.counters;
    result.db.meta.offsets = spec.offsets;
    result.db.meta.range = spec.range;
    result.db.meta.generator_version = std::string(library_version());
    result.db.meta.source = "generated";
    result.db.meta.format = SourceFormat::Generated;
    if (convention != Convention::canonical())
        result.db.meta.history.push_back("convention " + convention.describe());
    if (spec.region)
        result.db.meta.history.push_back("region " + describe(*spec.region) + " mode=" +
                                         std::string(to_string(spec.region_mode)));
    return result;
}

// ---------------------------------------------------------------------------
// Matching and calibration

namespace {

struct CornerKey {
    long x, y, z;
    bool operator==(const CornerKey&) const = default;
};

struct CornerHash {
    std::size_t operator()(const CornerKey& k) const noexcept {
        std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
        h ^= static_cast<std::size_t>(k.y) * 19349663u;
        h ^= static_cast<std::size_t>(k.z) * 83492791u;
        return h;
    }
};

double cell_deviation(const QCCell& a, const QCCell& b) {
    double worst = 0.0;
    for (std::size_t v = 0; v < 8; ++v) worst = std::max(worst, max_abs(a.verts[v] - b.verts[v]));
    return worst;
}

}  // namespace

CellMatching match_cells(const std::vector<QCCell>& reference,
                         const std::vector<QCCell>& candidates, double tol) {
    const double bucket = std::max(tol, 1e-6) * 4.0;
    auto key_of = [&](const Vec3& p) {
        return CornerKey{static_cast<long>(std::floor(p.x / bucket)),
                         static_cast<long>(std::floor(p.y / bucket)),
                         static_cast<long>(std::floor(p.z / bucket))};
    };
    std::unordered_map<CornerKey, std::vector<std::size_t>, CornerHash> grid;
    grid.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        grid[key_of(candidates[i].verts[0])].push_back(i);

    CellMatching out;
    out.candidate_for.assign(reference.size(), std::nullopt);
    std::vector<bool> used(candidates.size(), false);
    for (std::size_t r = 0; r < reference.size(); ++r) {
        const CornerKey k = key_of(reference[r].verts[0]);
        std::optional<std::size_t> best;
        double best_dev = std::numeric_limits<double>::infinity();
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == grid.end()) continue;
                    for (std::size_t i : it->second) {
                        if (used[i]) continue;
                        const double dev = cell_deviation(reference[r], candidates[i]);
                        if (dev <= tol && dev < best_dev) {
                            best_dev = dev;
                            best = i;
                        }
                    }
                }
        if (best) {
            used[*best] = true;
            out.candidate_for[r] = best;
            ++out.matched;
            out.worst_deviation = std::max(out.worst_deviation, best_dev);
        }
    }
    return out;
}

CalibrationResult calibrate(const CellDatabase& published, const GridSpec& spec,
                            const StarBasis& basis, double tol) {
    check(spec);
    if (published.cells.empty()) throw CalibrationFailed("no published cells to calibrate against");

    std::vector<QCCell> reference{published.cells.front()};
    if (published.cells.size() > 1) reference.push_back(published.cells.back());

    std::optional<CalibrationResult> best;
    for (const Convention& conv : Convention::search_space()) {
        GridSpec plain = spec;
        plain.region.reset();
        const auto generated = generate(plain, basis, conv).db.cells;
        const CellMatching ends = match_cells(reference, generated, tol);
        if (ends.matched != reference.size()) continue;

        const CellMatching all = match_cells(published.cells, generated, tol);
        if (best && all.matched <= best->cells_reproduced) continue;
        CalibrationResult r;
        r.convention = conv;
        r.cells_compared = published.cells.size();
        r.cells_reproduced = all.matched;
        r.reference_deviation = ends.worst_deviation;
        for (std::size_t i = 0; i < published.cells.size(); ++i)
            if (!all.candidate_for[i]) r.unmatched_ids.push_back(published.cells[i].id);
        best = std::move(r);
        if (best->cells_reproduced == published.cells.size()) break;
    }
    if (!best)
        throw CalibrationFailed("no convention in the search space reproduces the first and last "
                                "published cells within " + std::to_string(tol));
    return *best;
}

}  // namespace qc
