#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qc/vec3.hpp"

namespace qc {

struct AllSpace {};

/// Points p with normal·p <= offset.
struct HalfSpace {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;
};

/// Points p with lo <= normal·p <= hi.
struct Slab {
    Vec3 normal{0.0, 0.0, 1.0};
    double lo = 0.0;
    double hi = 0.0;
};

struct Ball {
    Vec3 center;
    double radius = 0.0;
};

struct ConvexIntersection {
    std::vector<HalfSpace> planes;
};

using Region = std::variant<AllSpace, HalfSpace, Slab, Ball, ConvexIntersection>;

/// Which vertices of a cell must lie in a region for the cell to be kept.
enum class SliceMode { AllVertices, AnyVertex, Centroid };

// Factories validate and normalise; they throw std::invalid_argument on a zero normal,
// negative radius or inverted slab.
Region make_half_space(Vec3 normal, double offset);
Region make_slab(Vec3 normal, double lo, double hi);
Region make_ball(Vec3 center, double radius);
Region make_convex(std::vector<HalfSpace> planes);

/// Boundaries are inclusive.
bool contains(const Region& region, const Vec3& p);

std::string describe(const Region& region);

std::string_view to_string(SliceMode mode);
/// Accepts all_vertices, any_vertex, centroid; throws std::invalid_argument otherwise.
SliceMode parse_slice_mode(std::string_view text);

}  // namespace qc
