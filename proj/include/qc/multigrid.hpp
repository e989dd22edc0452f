#pragma once

// De Bruijn dual construction over the six icosahedral plane families.
//
// Every triple of plane families meets in isolated points. Each such point is
// mapped back to integer grid indices on the other three families, and the
// resulting six integers pick out one rhombohedron of the tiling.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qc/cell.hpp"
#include "qc/icosa_lattice.hpp"
#include "qc/region.hpp"

namespace qc {

using Offsets = std::array<double, kAxisCount>;

enum class Rounding { Ceil, Floor };
enum class EdgeSense { Ascending, Descending };

/// How the external axis labels (offset list order, edge order inside a cell)
/// map onto the physical axes of the star basis. Twenty choices: pole labelled
/// first or last, times the ten symmetries of the five-fold ring.
struct AxisLabeling {
    bool pole_last = false;
    int ring_rotation = 0;  ///< 0..4
    bool ring_reflected = false;

    int physical_axis(int label) const;
    int label_of(int axis) const;

    static std::vector<AxisLabeling> all();
    friend bool operator==(const AxisLabeling&, const AxisLabeling&) = default;
};

/// The conventions the construction leaves open.
struct Convention {
    Rounding rounding = Rounding::Ceil;
    /// Along a generating axis the cell spans [n + base, n + base + 1].
    int span_base = 0;
    /// Ascending puts vertex 0 at the low end of every generating axis.
    EdgeSense sense = EdgeSense::Ascending;
    AxisLabeling labeling;

    std::string describe() const;

    /// Ceil, span [n, n+1], ascending edges, identity labelling.
    static Convention canonical();
    /// The convention recovered from the published legacy records.
    static Convention legacy();
    /// Every convention the calibrator tries, canonical first.
    static std::vector<Convention> search_space();

    friend bool operator==(const Convention&, const Convention&) = default;
};

struct GridSpec {
    Offsets offsets{};  ///< in label order, each in [0, 1)
    IndexRange range{};
    double singularity_tol = 1e-6;
    double classify_tol = kDefaultClassifyTol;
    std::optional<Region> region;  ///< optional spatial filter on emitted cells
    SliceMode region_mode = SliceMode::AllVertices;
};

/// Throws std::invalid_argument when the range is empty, an offset is not
/// finite, or a tolerance is not positive.
void check(const GridSpec& spec);

/// Reduces offsets into [0, 1); returns one warning per adjusted value.
std::vector<std::string> normalize_offsets(Offsets& offsets);

/// Offsets indexed by physical axis.
Offsets physical_offsets(const Offsets& labelled, const AxisLabeling& labeling);

/// 20·R³ for a range of width R.
std::size_t projected_cell_count(const IndexRange& range);

/// Solves e_m·x = n_m + γ_m for the three axes of t.
/// Throws SingularMatrix when the system is numerically singular.
Vec3 intersect_planes(const AxisTriple& t, const std::array<int, 3>& n, const Offsets& gamma,
                      const StarBasis& basis = star_basis());

struct GridIndex {
    long value = 0;
    bool on_plane = false;  ///< x lies on a plane of the family within tolerance
};

/// Index of the slab of family m containing x. On a plane the value is that plane's index.
GridIndex grid_index(const Vec3& x, int m, double gamma_m, Rounding rounding = Rounding::Ceil,
                     double tol = 1e-6, const StarBasis& basis = star_basis());

/// True when some family outside t has a plane within tol of x.
bool is_singular(const Vec3& x, const AxisTriple& t, const Offsets& gamma, double tol = 1e-6,
                 const StarBasis& basis = star_basis());

/// Integer coordinates (one per axis) of the eight vertices, in cell vertex order.
std::array<std::array<long, kAxisCount>, 8> lattice_coordinates(const CellKey& key,
                                                                const Convention& convention);

Vec3 lattice_point(const std::array<long, kAxisCount>& coords,
                   const StarBasis& basis = star_basis());

struct BuildOptions {
    double singularity_tol = 1e-6;
    double classify_tol = kDefaultClassifyTol;
};

/// The cell dual to the intersection of planes n on the axes of t.
/// gamma is indexed by physical axis.
QCCell build_cell(const AxisTriple& t, const std::array<int, 3>& n, const Offsets& gamma,
                  const StarBasis& basis = star_basis(),
                  const Convention& convention = Convention::canonical(),
                  const BuildOptions& options = {});

struct GenerationResult {
    CellDatabase db;
    Counters counters;  ///< over every visited combination, before any region filter
};

/// All 20 triples in lexicographic order, and for each all n in the range cubed,
/// lexicographically. Ids run from 1 in that order.
GenerationResult generate(const GridSpec& spec, const StarBasis& basis = star_basis(),
                          const Convention& convention = Convention::canonical());

/// Pairing of reference cells with candidate cells that share vertex 0 and agree
/// on all 24 coordinates within tol. Each candidate is used at most once.
struct CellMatching {
    std::vector<std::optional<std::size_t>> candidate_for;  ///< index into candidates
    std::size_t matched = 0;
    double worst_deviation = 0.0;  ///< over matched pairs
};

CellMatching match_cells(const std::vector<QCCell>& reference,
                         const std::vector<QCCell>& candidates, double tol);

struct CalibrationResult {
    Convention convention;
    std::size_t cells_compared = 0;
    std::size_t cells_reproduced = 0;
    double reference_deviation = 0.0;  ///< worst coordinate error on the first and last cells
    std::vector<std::size_t> unmatched_ids;
};

/// Finds the convention under which the generator reproduces the first and last
/// published cells within tol per coordinate. Among passing conventions the one
/// reproducing the most published cells wins; ties go to the earlier one in
/// Convention::search_space(). Throws CalibrationFailed when none passes.
CalibrationResult calibrate(const CellDatabase& published, const GridSpec& spec,
                            const StarBasis& basis = star_basis(), double tol = 5e-4);

}  // namespace qc
