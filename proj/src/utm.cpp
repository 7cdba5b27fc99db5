#include "citygwr/utm.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "citygwr/errors.hpp"

namespace citygwr {

namespace {

constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;
constexpr double kK0 = 0.9996;
constexpr double kFalseEasting = 500000.0;
constexpr double kFalseNorthingSouth = 10000000.0;
constexpr double kDeg = std::numbers::pi / 180.0;

struct Series {
    double rect_radius;           // A, radius of the rectifying circle
    double ecc;                   // first eccentricity
    std::array<double, 6> alpha;  // forward
    std::array<double, 6> beta;   // inverse, to conformal coordinates
    std::array<double, 6> delta;  // conformal latitude -> geodetic latitude
};

Series make_series() {
    const double n = kF / (2.0 - kF);
    const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
    Series s{};
    s.rect_radius = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    s.ecc = std::sqrt(kF * (2.0 - kF));
    s.alpha = {
        n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
        13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
        61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
        49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
        34729 * n5 / 80640 - 3418889 * n6 / 1995840,
        212378941 * n6 / 319334400,
    };
    s.beta = {
        n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
        n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
        17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
        4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
        4583 * n5 / 161280 - 108847 * n6 / 3991680,
        20648693 * n6 / 638668800,
    };
    s.delta = {
        2 * n - 2 * n2 / 3 - 2 * n3 + 116 * n4 / 45 + 26 * n5 / 45 - 2854 * n6 / 675,
        7 * n2 / 3 - 8 * n3 / 5 - 227 * n4 / 45 + 2704 * n5 / 315 + 2323 * n6 / 945,
        56 * n3 / 15 - 136 * n4 / 35 - 1262 * n5 / 105 + 73814 * n6 / 2835,
        4279 * n4 / 630 - 332 * n5 / 35 - 399572 * n6 / 14175,
        4174 * n5 / 315 - 144838 * n6 / 6237,
        601676 * n6 / 22275,
    };
    return s;
}

const Series& series() {
    static const Series s = make_series();
    return s;
}

}  // namespace

UtmProjection::UtmProjection(int zone, bool north) : zone_(zone), north_(north) {
    if (zone < 1 || zone > 60) {
        throw ConfigError("UTM zone must lie in 1..60, got " + std::to_string(zone));
    }
    lon0_ = -183.0 + 6.0 * zone;
}

PlanarPoint UtmProjection::forward(LonLat p) const {
    const Series& s = series();
    const double phi = p.lat * kDeg;
    const double lam = (p.lon - lon0_) * kDeg;
    const double sin_phi = std::sin(phi);
    const double t = std::sinh(std::atanh(sin_phi) - s.ecc * std::atanh(s.ecc * sin_phi));
    const double xi_p = std::atan2(t, std::cos(lam));
    const double eta_p = std::atanh(std::sin(lam) / std::sqrt(1.0 + t * t));

    double xi = xi_p, eta = eta_p;
    for (int j = 1; j <= 6; ++j) {
        const double a = s.alpha[j - 1];
        xi += a * std::sin(2 * j * xi_p) * std::cosh(2 * j * eta_p);
        eta += a * std::cos(2 * j * xi_p) * std::sinh(2 * j * eta_p);
    }
    const double easting = kFalseEasting + kK0 * s.rect_radius * eta;
    double northing = kK0 * s.rect_radius * xi;
    if (!north_) northing += kFalseNorthingSouth;
    return {easting / 1000.0, northing / 1000.0};
}

LonLat UtmProjection::inverse(PlanarPoint km) const {
    const Series& s = series();
    const double northing = km.y * 1000.0 - (north_ ? 0.0 : kFalseNorthingSouth);
    const double xi = northing / (kK0 * s.rect_radius);
    const double eta = (km.x * 1000.0 - kFalseEasting) / (kK0 * s.rect_radius);

    double xi_p = xi, eta_p = eta;
    for (int j = 1; j <= 6; ++j) {
        const double b = s.beta[j - 1];
        xi_p -= b * std::sin(2 * j * xi) * std::cosh(2 * j * eta);
        eta_p -= b * std::cos(2 * j * xi) * std::sinh(2 * j * eta);
    }
    const double chi = std::asin(std::sin(xi_p) / std::cosh(eta_p));
    double phi = chi;
    for (int j = 1; j <= 6; ++j) phi += s.delta[j - 1] * std::sin(2 * j * chi);
    const double lam = std::atan2(std::sinh(eta_p), std::cos(xi_p));
    return {lon0_ + lam / kDeg, phi / kDeg};
}

}  // namespace citygwr
