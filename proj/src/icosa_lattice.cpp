#include "qc/icosa_lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "qc/errors.hpp"

namespace qc {

namespace {

StarBasis make_star_basis() {
    StarBasis b;
    const double h = 1.0 / std::sqrt(5.0);
    const double r = 2.0 / std::sqrt(5.0);
    b.e[0] = {0.0, 0.0, 1.0};
    for (int k = 0; k < 5; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / 5.0;
        b.e[static_cast<std::size_t>(k + 1)] = {r * std::cos(phi), r * std::sin(phi), h};
    }
    return b;
}

struct CanonicalVolumes {
    double thin;
    double fat;
};

// Sorted |det| over all triples: the smallest is thin, the largest fat.
CanonicalVolumes derive_volumes() {
    double lo = INFINITY;
    double hi = 0.0;
    for (const auto& t : all_triples()) {
        const double v = std::abs(triple_volume(t));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

const CanonicalVolumes& volumes() {
    static const CanonicalVolumes v = derive_volumes();
    return v;
}

AxisTriple triple_at(std::size_t index) {
    std::size_t i = 0;
    for (int j = 0; j < kAxisCount; ++j)
        for (int k = j + 1; k < kAxisCount; ++k)
            for (int l = k + 1; l < kAxisCount; ++l)
                if (i++ == index) return AxisTriple(j, k, l);
    throw std::out_of_range("triple index");
}

template <std::size_t... I>
std::array<AxisTriple, kTripleCount> make_triples(std::index_sequence<I...>) {
    return {triple_at(I)...};
}

}  // namespace

const StarBasis& star_basis() {
    static const StarBasis basis = make_star_basis();
    return basis;
}

AxisTriple::AxisTriple(int j, int k, int l) : axes_{j, k, l} {
    if (!(0 <= j && j < k && k < l && l < kAxisCount)) {
        throw std::invalid_argument("axis triple must satisfy 0 <= j < k < l <= 5, got (" +
                                    std::to_string(j) + "," + std::to_string(k) + "," +
                                    std::to_string(l) + ")");
    }
}

std::array<int, 3> AxisTriple::complement() const {
    std::array<int, 3> out{};
    std::size_t n = 0;
    for (int m = 0; m < kAxisCount; ++m)
        if (!contains(m)) out[n++] = m;
    return out;
}

const std::array<AxisTriple, kTripleCount>& all_triples() {
    static const auto triples = make_triples(std::make_index_sequence<kTripleCount>{});
    return triples;
}

std::string_view to_string(CellClass c) { return c == CellClass::Thin ? "thin" : "fat"; }

double axes_determinant(int a, int b, int c, const StarBasis& basis) {
    return triple_product(basis[a], basis[b], basis[c]);
}

double triple_volume(const AxisTriple& t, const StarBasis& basis) {
    return axes_determinant(t.j(), t.k(), t.l(), basis);
}

double thin_volume() { return volumes().thin; }
double fat_volume() { return volumes().fat; }
double golden_ratio() { return (1.0 + std::sqrt(5.0)) / 2.0; }

CellClass classify_volume(double v, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("classification tolerance must be positive");
    const double a = std::abs(v);
    if (std::abs(a - thin_volume()) <= tol) return CellClass::Thin;
    if (std::abs(a - fat_volume()) <= tol) return CellClass::Fat;
    throw UnclassifiableVolume(v);
}

}  // namespace qc
