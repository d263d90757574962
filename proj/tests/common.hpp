#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include "gpx/radial.hpp"

namespace testutil {

inline const gpx::RadialProfile& profile(double q) {
    static std::map<double, gpx::RadialProfile> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, gpx::shoot_soliton(q)).first;
    return it->second;
}

inline gpx::SolitonConstants consts(double q) { return gpx::soliton_constants(profile(q), profile(2.0)); }

/// Sum of a few random Gaussian bumps inside the box, scaled to unit mass.
inline gpx::Field smooth_field(const gpx::Grid& g, std::uint64_t seed, int bumps = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const gpx::Point c = g.center();
    const double wx = g.hx * (g.nx - 1), wy = g.hy * (g.ny - 1);
    std::vector<std::array<double, 5>> b;
    for (int k = 0; k < bumps; ++k)
        b.push_back({c.x() + (U(rng) - 0.5) * 0.4 * wx, c.y() + (U(rng) - 0.5) * 0.4 * wy,
                     0.05 * wx * (1.0 + U(rng)), 0.5 + U(rng), U(rng) < 0.3 ? -0.4 : 1.0});
    gpx::Field u = gpx::sample(g, [&](const gpx::Point& x) {
        double s = 0.0;
        for (const auto& p : b) {
            const double r2 = (x.x() - p[0]) * (x.x() - p[0]) + (x.y() - p[1]) * (x.y() - p[1]);
            s += p[3] * p[4] * std::exp(-r2 / (2 * p[2] * p[2]));
        }
        return s;
    });
    u.values() /= std::sqrt(gpx::mass(u));
    return u;
}

}  // namespace testutil
