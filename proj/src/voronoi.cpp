#include "citygwr/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "citygwr/errors.hpp"

namespace citygwr {

namespace {

struct Vec {
    double x, y;
};

// Keeps the part of `poly` where n . p <= c (Sutherland-Hodgman, one edge).
std::vector<Vec> clip(const std::vector<Vec>& poly, Vec n, double c) {
    std::vector<Vec> out;
    if (poly.empty()) return out;
    out.reserve(poly.size() + 1);
    auto side = [&](Vec p) { return n.x * p.x + n.y * p.y - c; };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec a = poly[i];
        const Vec b = poly[(i + 1) % poly.size()];
        const double sa = side(a), sb = side(b);
        if (sa <= 0) out.push_back(a);
        if ((sa < 0 && sb > 0) || (sa > 0 && sb < 0)) {
            const double t = sa / (sa - sb);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    if (out.size() < 3) out.clear();
    return out;
}

double sq(double v) { return v * v; }

}  // namespace

const VoronoiCell* VoronoiPartition::find(NeuronId id) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), id,
                               [](const VoronoiCell& c, NeuronId v) { return c.id < v; });
    return it != cells_.end() && it->id == id ? &*it : nullptr;
}

NeuronId VoronoiPartition::locate(PlanarPoint p) const {
    if (cells_.empty()) throw InputError("empty partition");
    NeuronId best = cells_.front().id;
    double best_d = sq(p.x - cells_.front().site.x) + sq(p.y - cells_.front().site.y);
    for (const auto& c : cells_) {
        const double d = sq(p.x - c.site.x) + sq(p.y - c.site.y);
        if (d < best_d) {
            best_d = d;
            best = c.id;
        }
    }
    return best;
}

VoronoiPartition voronoi(std::vector<Generator> gens, const BoundingBox& bbox) {
    if (gens.size() < 2) throw ConfigError("a partition needs at least two sites");
    if (bbox.degenerate()) throw ConfigError("bounding box is degenerate");
    std::sort(gens.begin(), gens.end(),
              [](const Generator& a, const Generator& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < gens.size(); ++i) {
        if (gens[i].id == gens[i - 1].id) {
            throw ConfigError("site id " + std::to_string(gens[i].id) + " listed twice");
        }
    }

    // Work relative to the box centre; UTM northings are large.
    const Vec o{(bbox.min_x + bbox.max_x) / 2, (bbox.min_y + bbox.max_y) / 2};
    std::vector<Vec> local(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        local[i] = {gens[i].site.x - o.x, gens[i].site.y - o.y};
    }

    // Sorting by x makes duplicate detection O(n log n).
    std::vector<std::size_t> by_x(gens.size());
    for (std::size_t i = 0; i < by_x.size(); ++i) by_x[i] = i;
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) {
        if (local[a].x != local[b].x) return local[a].x < local[b].x;
        if (local[a].y != local[b].y) return local[a].y < local[b].y;
        return gens[a].id < gens[b].id;
    });
    for (std::size_t k = 1; k < by_x.size(); ++k) {
        const std::size_t a = by_x[k - 1], b = by_x[k];
        if (gens[a].site == gens[b].site) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "regions " << gens[a].id << " and " << gens[b].id
                << " share the same weight (" << gens[a].site.x << ", " << gens[a].site.y << ")";
            throw DegeneratePartitionError(msg.str());
        }
    }

    const std::vector<Vec> box{{bbox.min_x - o.x, bbox.min_y - o.y},
                               {bbox.max_x - o.x, bbox.min_y - o.y},
                               {bbox.max_x - o.x, bbox.max_y - o.y},
                               {bbox.min_x - o.x, bbox.max_y - o.y}};

    std::vector<VoronoiCell> cells;
    cells.reserve(gens.size());
    std::vector<std::pair<double, std::size_t>> order(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const Vec wi = local[i];
        for (std::size_t j = 0; j < gens.size(); ++j) {
            order[j] = {sq(local[j].x - wi.x) + sq(local[j].y - wi.y), j};
        }
        std::sort(order.begin(), order.end());

        std::vector<Vec> poly = box;
        double reach = 0;  // squared distance from wi to the farthest vertex
        for (const auto& v : poly) reach = std::max(reach, sq(v.x - wi.x) + sq(v.y - wi.y));
        for (const auto& [d2, j] : order) {
            if (j == i) continue;
            // A bisector farther than every vertex cannot cut the cell.
            if (d2 > 4 * reach) break;
            const Vec wj = local[j];
            const Vec n{wj.x - wi.x, wj.y - wi.y};
            const double c = (sq(wj.x) + sq(wj.y) - sq(wi.x) - sq(wi.y)) / 2;
            poly = clip(poly, n, c);
            if (poly.empty()) break;
            reach = 0;
            for (const auto& v : poly) reach = std::max(reach, sq(v.x - wi.x) + sq(v.y - wi.y));
        }

        VoronoiCell cell{gens[i].id, gens[i].site, {}};
        cell.polygon.reserve(poly.size());
        for (const auto& v : poly) cell.polygon.push_back({v.x + o.x, v.y + o.y});
        cells.push_back(std::move(cell));
    }
    return VoronoiPartition(bbox, std::move(cells));
}

VoronoiPartition voronoi(const Network& net, const BoundingBox& bbox) {
    if (net.input_dim() != 2) throw InputError("partition requires a two-dimensional network");
    std::vector<Generator> gens;
    gens.reserve(net.size());
    for (NeuronId id : net.ids()) {
        const auto w = net.weight(id);
        gens.push_back({id, {w[0], w[1]}});
    }
    return voronoi(std::move(gens), bbox);
}

double polygon_area(const std::vector<PlanarPoint>& poly) {
    if (poly.size() < 3) return 0.0;
    const PlanarPoint o = poly.front();
    double twice = 0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const double ax = poly[i].x - o.x, ay = poly[i].y - o.y;
        const double bx = poly[i + 1].x - o.x, by = poly[i + 1].y - o.y;
        twice += ax * by - ay * bx;
    }
    return twice / 2;
}

bool convex_contains(const std::vector<PlanarPoint>& poly, PlanarPoint p, double tol) {
    if (poly.size() < 3) return false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const PlanarPoint a = poly[i];
        const PlanarPoint b = poly[(i + 1) % poly.size()];
        const double ex = b.x - a.x, ey = b.y - a.y;
        const double len = std::hypot(ex, ey);
        if (len == 0) continue;
        const double cross = (ex * (p.y - a.y) - ey * (p.x - a.x)) / len;
        if (cross < -tol) return false;
    }
    return true;
}

}  // namespace citygwr
