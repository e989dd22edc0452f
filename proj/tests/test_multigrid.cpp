#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "qc/cell_database.hpp"
#include "qc/errors.hpp"
#include "qc/multigrid.hpp"
#include "qc/slicer.hpp"

using namespace qc;

namespace {

Offsets reference_offsets() {
    Offsets o{};
    std::copy(std::begin(fixture::kReferenceOffsets), std::end(fixture::kReferenceOffsets), o.begin());
    return o;
}

GridSpec reference_spec(IndexRange range = {-2, 2}) {
    GridSpec s;
    s.offsets = reference_offsets();
    s.range = range;
    return s;
}

CellDatabase published() { return load_database(fixture::data_path("published_records.txt")); }

double residual(const Vec3& x, const AxisTriple& t, const std::array<int, 3>& n, const Offsets& g) {
    double worst = 0.0;
    const auto ref = oracle::basis();
    for (int i = 0; i < 3; ++i) {
        const auto m = static_cast<std::size_t>(t[i]);
        worst = std::max(worst, std::abs(oracle::dot(ref[m], {x.x, x.y, x.z}) - (n[static_cast<std::size_t>(i)] + g[m])));
    }
    return worst;
}

}  // namespace

TEST_CASE("intersect_planes examples") {
    const Offsets zero{};
    const Vec3 origin = intersect_planes(AxisTriple(1, 2, 3), {0, 0, 0}, zero);
    CHECK(max_abs(origin) <= 1e-15);

    const AxisTriple t(0, 1, 2);
    const Vec3 x = intersect_planes(t, {1, 0, 0}, zero);
    CHECK(residual(x, t, {1, 0, 0}, zero) < 1e-12);
    const auto ref = oracle::basis();
    const auto want = oracle::cramer(ref[0], ref[1], ref[2], {1.0, 0.0, 0.0});
    CHECK(std::abs(x.x - want[0]) < 1e-12);
    CHECK(std::abs(x.y - want[1]) < 1e-12);
    CHECK(std::abs(x.z - want[2]) < 1e-12);

    const Offsets g = reference_offsets();
    const AxisTriple u(1, 2, 3);
    const Vec3 y = intersect_planes(u, {0, 0, 0}, g);
    CHECK(std::abs(dot(star_basis()[1], y) - 0.02) < 1e-12);
    CHECK(std::abs(dot(star_basis()[2], y) - 0.01) < 1e-12);
    CHECK(std::abs(dot(star_basis()[3], y) - 0.03) < 1e-12);
}

TEST_CASE("intersect_planes residuals over every triple and index") {
    const Offsets g = reference_offsets();
    for (const auto& t : all_triples())
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; b += 2)
                CHECK(residual(intersect_planes(t, {a, b, -a}, g), t, {a, b, -a}, g) <= 1e-10);
}

TEST_CASE("intersect_planes rejects a degenerate basis") {
    StarBasis bad = star_basis();
    bad.e[2] = bad.e[1];
    CHECK_THROWS_AS(intersect_planes(AxisTriple(0, 1, 2), {0, 0, 0}, Offsets{}, bad), SingularMatrix);
}

TEST_CASE("grid_index examples") {
    const GridIndex a = grid_index({0, 0, 10}, 0, 0.1);
    CHECK(a.value == 10);
    CHECK_FALSE(a.on_plane);
    CHECK(grid_index({0, 0, 0}, 0, 0.1).value == 0);
    CHECK(grid_index({0, 0, 0}, 0, 0.1, Rounding::Floor).value == -1);

    const GridIndex on = grid_index({0, 0, 3.1}, 0, 0.1);
    CHECK(on.on_plane);
    CHECK(on.value == 3);
    const GridIndex near = grid_index({0, 0, 3.1 + 5e-7}, 0, 0.1);
    CHECK(near.on_plane);
    CHECK(near.value == 3);
    const GridIndex below = grid_index({0, 0, 3.1 - 5e-7}, 0, 0.1, Rounding::Floor);
    CHECK(below.on_plane);
    CHECK(below.value == 3);
}

TEST_CASE("is_singular") {
    const Offsets zero{};
    CHECK(is_singular({0, 0, 0}, AxisTriple(1, 2, 3), zero));

    const Offsets g = reference_offsets();
    std::size_t singular = 0;
    for (const auto& t : all_triples())
        for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b)
                for (int c = -2; c <= 2; ++c)
                    singular += is_singular(intersect_planes(t, {a, b, c}, g), t, g);
    CHECK(singular == 0);

    // Shift γ4 so that plane family 4 passes exactly through a probe point.
    const AxisTriple t(1, 2, 3);
    const Vec3 x = intersect_planes(t, {0, 0, 0}, g);
    Offsets h = g;
    const double s = dot(star_basis()[4], x);
    h[4] = s - std::floor(s);
    CHECK(is_singular(x, t, h));
    CHECK_FALSE(is_singular(x, t, g));
}

TEST_CASE("axis labelings are the twenty pole and ring symmetries") {
    const auto all = AxisLabeling::all();
    CHECK(all.size() == 20);
    std::set<std::vector<int>> perms;
    for (const auto& l : all) {
        std::vector<int> p;
        for (int label = 0; label < kAxisCount; ++label) p.push_back(l.physical_axis(label));
        std::vector<int> sorted = p;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
        CHECK(p[l.pole_last ? 5 : 0] == 0);
        for (int m = 0; m < kAxisCount; ++m) CHECK(l.physical_axis(l.label_of(m)) == m);
        perms.insert(p);
    }
    CHECK(perms.size() == 20);
    const AxisLabeling identity;
    for (int m = 0; m < kAxisCount; ++m) CHECK(identity.physical_axis(m) == m);
    CHECK(Convention::search_space().size() == 160);
    CHECK(Convention::search_space().front() == Convention::canonical());
}

TEST_CASE("build_cell reproduces published cells 1 and 2500 under the legacy convention") {
    const Convention legacy = Convention::legacy();
    const Offsets g = physical_offsets(reference_offsets(), legacy.labeling);

    const QCCell first = build_cell(AxisTriple(1, 2, 3), {-2, -2, -2}, g, star_basis(), legacy);
    CHECK(first.cls == CellClass::Thin);
    CHECK(max_abs(first.verts[0] - Vec3{0.4471809, 1.376398, -10.36656}) <= 1e-3);
    CHECK(max_abs(first.verts[7] - Vec3{-2.709031e-5, 1.966953e-5, -11.70820}) <= 1e-3);
    CHECK(std::abs(first.signed_volume - (-0.470231076)) <= 1e-4);

    const QCCell last = build_cell(AxisTriple(0, 4, 5), {2, 2, 2}, g, star_basis(), legacy);
    CHECK(last.cls == CellClass::Fat);
    CHECK(std::abs(last.signed_volume - (-0.760845848)) <= 1e-4);
    CHECK(max_abs(last.verts[0] - Vec3{-1.170789, -3.603422, 3.341641}) <= 1e-3);
    CHECK(max_abs(last.verts[7] - Vec3{-0.7235897, -2.227037, 1.447214}) <= 1e-3);
}

TEST_CASE("generated cells satisfy the cell invariants") {
    for (const Convention& conv : {Convention::canonical(), Convention::legacy()}) {
        const auto result = generate(reference_spec({-1, 1}), star_basis(), conv);
        for (const auto& c : result.db.cells) {
            for (const auto& e : cell_edges())
                CHECK(std::abs(norm(c.verts[static_cast<std::size_t>(e[1])] - c.verts[static_cast<std::size_t>(e[0])]) - 1.0) <= 1e-9);
            CHECK(std::abs(c.signed_volume - c.edge_determinant()) == 0.0);
            CHECK(classify_volume(c.signed_volume) == c.cls);
            CHECK(std::abs(std::abs(c.signed_volume) - std::abs(triple_volume(c.key->triple))) <= 1e-9);
        }
    }
}

TEST_CASE("generate counts follow 20 R^3 with equal fat and thin") {
    for (int w : {0, 1, 2, 3}) {
        const auto r = generate(reference_spec({-w, w}));
        const std::size_t R = static_cast<std::size_t>(2 * w + 1);
        CHECK(r.counters.cells == 20 * R * R * R);
        CHECK(r.counters.fat == 10 * R * R * R);
        CHECK(r.counters.thin == 10 * R * R * R);
        CHECK(r.db.counters == r.counters);
        CHECK(projected_cell_count({-w, w}) == 20 * R * R * R);
    }
    const auto reference = generate(reference_spec());
    CHECK(reference.counters == Counters{2500, 0, 1250, 1250});
    const auto single = generate(reference_spec({0, 0}));
    CHECK(single.db.size() == 20);
    CHECK(single.counters.fat == 10);
    // Asymmetric ranges work too.
    CHECK(generate(reference_spec({3, 4})).counters.cells == 160);
    CHECK(projected_cell_count({1, 0}) == 0);
}

TEST_CASE("generate rejects invalid specs") {
    CHECK_THROWS_AS(generate(reference_spec({1, 0})), std::invalid_argument);
    GridSpec bad = reference_spec();
    bad.offsets[2] = std::nan("");
    CHECK_THROWS_AS(generate(bad), std::invalid_argument);
    GridSpec neg = reference_spec();
    neg.singularity_tol = 0.0;
    CHECK_THROWS_AS(generate(neg), std::invalid_argument);
}

TEST_CASE("zero offsets are maximally singular") {
    GridSpec s;
    s.range = {0, 0};
    const auto r = generate(s);
    CHECK(r.counters.cells == 20);
    CHECK(r.counters.singularities == 20);
    CHECK(r.db.counters.singularities == 20);
}

TEST_CASE("generation order is triple-major then n-lexicographic with ids from 1") {
    const auto db = generate(reference_spec({-1, 1})).db;
    REQUIRE(db.size() == 540);
    std::size_t i = 0;
    for (const auto& t : all_triples())
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
                for (int c = -1; c <= 1; ++c) {
                    const QCCell& cell = db.cells[i++];
                    CHECK(cell.id == i);
                    CHECK(cell.key->triple == t);
                    CHECK(cell.key->n == std::array<int, 3>{a, b, c});
                }
}

TEST_CASE("generate is deterministic") {
    const auto a = write_database(generate(reference_spec()).db, DbFormat::CanonicalCsv);
    const auto b = write_database(generate(reference_spec()).db, DbFormat::CanonicalCsv);
    CHECK(a == b);
}

TEST_CASE("generated vertices are integer combinations of the star vectors") {
    const auto ref = oracle::basis();
    for (const Convention& conv : {Convention::canonical(), Convention::legacy()}) {
        const auto db = generate(reference_spec(), star_basis(), conv).db;
        double worst = 0.0;
        for (const auto& c : db.cells) {
            const auto coords = lattice_coordinates(*c.key, conv);
            for (std::size_t v = 0; v < 8; ++v) {
                oracle::V p{0, 0, 0};
                for (std::size_t m = 0; m < 6; ++m)
                    for (int k = 0; k < 3; ++k) p[static_cast<std::size_t>(k)] += double(coords[v][m]) * ref[m][static_cast<std::size_t>(k)];
                worst = std::max({worst, std::abs(p[0] - c.verts[v].x), std::abs(p[1] - c.verts[v].y),
                                  std::abs(p[2] - c.verts[v].z)});
            }
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("dual consistency: re-deriving grid indices reproduces every key") {
    const GridSpec spec = reference_spec();
    const auto db = generate(spec).db;
    const Offsets g = physical_offsets(spec.offsets, AxisLabeling{});
    for (const auto& c : db.cells) {
        const CellKey& k = *c.key;
        REQUIRE_FALSE(k.singular);
        const auto ref = oracle::basis();
        const auto t = k.triple;
        const auto x = oracle::cramer(ref[static_cast<std::size_t>(t[0])], ref[static_cast<std::size_t>(t[1])],
                                      ref[static_cast<std::size_t>(t[2])],
                                      {k.n[0] + g[static_cast<std::size_t>(t[0])], k.n[1] + g[static_cast<std::size_t>(t[1])],
                                       k.n[2] + g[static_cast<std::size_t>(t[2])]});
        const auto comp = t.complement();
        for (std::size_t i = 0; i < 3; ++i) {
            const auto m = static_cast<std::size_t>(comp[i]);
            CHECK(static_cast<long>(std::ceil(oracle::dot(ref[m], x) - g[m])) == k.complement[i]);
        }
    }
}

TEST_CASE("perturbing offsets below the singularity tolerance changes no key") {
    const GridSpec spec = reference_spec();
    const auto base = generate(spec);
    REQUIRE(base.counters.singularities == 0);
    GridSpec moved = spec;
    for (std::size_t i = 0; i < 6; ++i) moved.offsets[i] += (i % 2 ? -1.0 : 1.0) * spec.singularity_tol / 20.0;
    const auto other = generate(moved).db;
    REQUIRE(other.size() == base.db.size());
    for (std::size_t i = 0; i < other.size(); ++i) {
        CHECK(other.cells[i].key->complement == base.db.cells[i].key->complement);
        CHECK(other.cells[i].key->n == base.db.cells[i].key->n);
    }
}

TEST_CASE("generate applies an optional region filter after counting") {
    GridSpec spec = reference_spec();
    spec.region = make_ball({0, 0, 0}, 4.0);
    const auto r = generate(spec);
    CHECK(r.counters.cells == 2500);
    const auto all = generate(reference_spec()).db;
    const auto expect = std::count_if(all.cells.begin(), all.cells.end(), [&](const QCCell& c) {
        return std::all_of(c.verts.begin(), c.verts.end(), [](const Vec3& v) { return norm(v) <= 4.0; });
    });
    CHECK(r.db.size() == static_cast<std::size_t>(expect));
    CHECK(r.db.size() > 0);
    CHECK(r.db.size() < 2500);
    CHECK(r.db.counters.cells == r.db.size());
    CHECK(r.db.cells.back().id == r.db.size());
}

TEST_CASE("normalize_offsets reduces values modulo one") {
    Offsets o{1.25, -0.25, 0.5, 0.0, 0.999, 3.0};
    const auto warnings = normalize_offsets(o);
    CHECK(warnings.size() == 3);
    CHECK(o[0] == doctest::Approx(0.25));
    CHECK(o[1] == doctest::Approx(0.75));
    CHECK(o[2] == 0.5);
    CHECK(o[5] == 0.0);
    for (double g : o) {
        CHECK(g >= 0.0);
        CHECK(g < 1.0);
    }
}

TEST_CASE("match_cells pairs each candidate at most once") {
    const auto db = generate(reference_spec({0, 0})).db;
    const auto self = match_cells(db.cells, db.cells, 1e-9);
    CHECK(self.matched == 20);
    CHECK(self.worst_deviation == 0.0);
    std::vector<QCCell> twice{db.cells[3], db.cells[3]};
    const auto m = match_cells(twice, db.cells, 1e-9);
    CHECK(m.matched == 1);
    CHECK(m.candidate_for[0] == std::optional<std::size_t>(3));
    CHECK_FALSE(m.candidate_for[1].has_value());
}

TEST_CASE("calibrate recovers the legacy convention from the published records") {
    const CalibrationResult r = calibrate(published(), reference_spec());
    CHECK(r.convention == Convention::legacy());
    CHECK(r.cells_compared == 11);
    CHECK(r.reference_deviation <= 5e-4);
    // Frozen from the calibration run: 6 of the 11 printed cells are reproduced.
    CHECK(r.cells_reproduced == 6);
    CHECK(r.unmatched_ids == std::vector<std::size_t>{2, 5, 6, 7, 10});
}

TEST_CASE("calibrate on the tool's own output picks the canonical convention") {
    const auto db = generate(reference_spec({-1, 1})).db;
    const CalibrationResult r = calibrate(db, reference_spec({-1, 1}));
    CHECK(r.convention == Convention::canonical());
    CHECK(r.cells_reproduced == db.size());
    CHECK(r.reference_deviation == 0.0);

    const auto legacy_db = generate(reference_spec({-1, 1}), star_basis(), Convention::legacy()).db;
    CHECK(calibrate(legacy_db, reference_spec({-1, 1})).convention == Convention::legacy());
}

TEST_CASE("calibrate fails on corrupted or empty input") {
    CellDatabase db = published();
    for (auto& c : db.cells) std::swap(c.verts[1], c.verts[5]);
    CHECK_THROWS_AS(calibrate(db, reference_spec()), CalibrationFailed);
    CHECK_THROWS_AS(calibrate(CellDatabase{}, reference_spec()), CalibrationFailed);
}
