#pragma once

// Icosahedral star of six generating axes and the two golden rhombohedra it spans.

#include <array>
#include <cstdint>
#include <string_view>

#include "qc/vec3.hpp"

namespace qc {

inline constexpr int kAxisCount = 6;
inline constexpr int kTripleCount = 20;

/// Six unit axis vectors through opposite face pairs of a dodecahedron.
///
/// Axis 0 is the pole (0, 0, 1); axes 1..5 form a ring at azimuth 72°·(m-1),
/// counter-clockwise from +x, with horizontal radius 2/√5 and height 1/√5.
struct StarBasis {
    std::array<Vec3, kAxisCount> e;

    const Vec3& operator[](int m) const { return e[static_cast<std::size_t>(m)]; }
};

const StarBasis& star_basis();

/// Three distinct axes in strictly increasing order.
class AxisTriple {
public:
    /// Throws std::invalid_argument unless 0 <= j < k < l <= 5.
    AxisTriple(int j, int k, int l);

    int j() const { return axes_[0]; }
    int k() const { return axes_[1]; }
    int l() const { return axes_[2]; }
    const std::array<int, 3>& axes() const { return axes_; }
    int operator[](int i) const { return axes_[static_cast<std::size_t>(i)]; }

    bool contains(int m) const { return m == axes_[0] || m == axes_[1] || m == axes_[2]; }
    /// The three axes not in the triple, ascending.
    std::array<int, 3> complement() const;

    friend bool operator==(const AxisTriple&, const AxisTriple&) = default;
    friend auto operator<=>(const AxisTriple&, const AxisTriple&) = default;

private:
    std::array<int, 3> axes_;
};

/// All 20 triples in lexicographic order.
const std::array<AxisTriple, kTripleCount>& all_triples();

enum class CellClass : std::uint8_t { Thin = 1, Fat = 2 };

/// Legacy integer code: Thin -> 1, Fat -> 2.
constexpr int legacy_code(CellClass c) { return static_cast<int>(c); }
std::string_view to_string(CellClass c);

/// det[e_a, e_b, e_c] for any three axis indices (order matters, repeats give 0).
double axes_determinant(int a, int b, int c, const StarBasis& basis = star_basis());

/// det[e_j, e_k, e_l] for an ordered triple.
double triple_volume(const AxisTriple& t, const StarBasis& basis = star_basis());

/// Canonical cell volumes, derived once from the basis.
double thin_volume();
double fat_volume();
double golden_ratio();

inline constexpr double kDefaultClassifyTol = 1e-3;

/// Thin or fat by |v|; throws UnclassifiableVolume when neither is within tol.
CellClass classify_volume(double v, double tol = kDefaultClassifyTol);

}  // namespace qc
