#pragma once

namespace citygwr {

/// Geographic WGS84 position in degrees.
struct LonLat {
    double lon;
    double lat;
};

/// Planar UTM position in kilometres (easting, northing).
struct PlanarPoint {
    double x;
    double y;
    friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

/// Fixed-zone Universal Transverse Mercator on the WGS84 ellipsoid, using the
/// 6th-order Krueger series (sub-millimetre within a zone). Output is scaled
/// to kilometres so the learning code never sees metres.
class UtmProjection {
public:
    UtmProjection(int zone = 29, bool north = true);

    PlanarPoint forward(LonLat p) const;
    LonLat inverse(PlanarPoint km) const;

    int zone() const { return zone_; }
    bool north() const { return north_; }
    double central_meridian() const { return lon0_; }

private:
    int zone_;
    bool north_;
    double lon0_;
};

}  // namespace citygwr
