#pragma once

#include <vector>

#include "citygwr/gwr.hpp"
#include "citygwr/trips.hpp"
#include "citygwr/utm.hpp"

namespace citygwr {

struct Generator {
    NeuronId id;
    PlanarPoint site;
};

struct VoronoiCell {
    NeuronId id;
    PlanarPoint site;
    std::vector<PlanarPoint> polygon;  ///< counter-clockwise, not closed
};

/// Bounded Voronoi diagram. Cells are closed convex polygons clipped to the
/// bounding box; points on a shared edge belong to the lower id (locate()).
class VoronoiPartition {
public:
    VoronoiPartition(BoundingBox bbox, std::vector<VoronoiCell> cells)
        : bbox_(bbox), cells_(std::move(cells)) {}

    const BoundingBox& bbox() const { return bbox_; }
    const std::vector<VoronoiCell>& cells() const { return cells_; }
    /// nullptr if id has no cell.
    const VoronoiCell* find(NeuronId id) const;
    /// Id of the nearest site; equidistant sites resolve to the lower id.
    NeuronId locate(PlanarPoint p) const;

private:
    BoundingBox bbox_;
    std::vector<VoronoiCell> cells_;  // sorted by id
};

/// Half-plane intersection per cell, O(n^2) worst case. Throws
/// DegeneratePartitionError when two sites coincide and ConfigError for fewer
/// than two sites or a degenerate box.
VoronoiPartition voronoi(std::vector<Generator> generators, const BoundingBox& bbox);
/// Partition of a two-dimensional network's weights.
VoronoiPartition voronoi(const Network& net, const BoundingBox& bbox);

double polygon_area(const std::vector<PlanarPoint>& polygon);
/// Inclusive point-in-convex-polygon test (counter-clockwise vertices).
bool convex_contains(const std::vector<PlanarPoint>& polygon, PlanarPoint p, double tol = 0.0);

}  // namespace citygwr
