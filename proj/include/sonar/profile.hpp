#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/numerics.hpp"

namespace sonar {

// A function of the radial variable sampled on a strictly increasing grid in [0, inf).
class RadialProfile {
public:
    RadialProfile() = default;
    RadialProfile(std::vector<double> grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (grid_.size() != values_.size())
            throw DomainError("RadialProfile: grid and values differ in length");
        if (grid_.empty()) throw DomainError("RadialProfile: empty grid");
        if (!(grid_[0] >= 0)) throw DomainError("RadialProfile: grid must be nonnegative");
        check_increasing(grid_, "RadialProfile");
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }

    // Cubic interpolation; extrapolates from the edge cells outside the grid.
    double operator()(double y) const { return detail::interpolate_cubic(grid_, values_, y); }

    static void check_increasing(const std::vector<double>& g, const char* who) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i])) throw DomainError(std::string(who) + ": non-finite grid point");
            if (i > 0 && !(g[i] > g[i - 1]))
                throw DomainError(std::string(who) + ": grid must be strictly increasing");
        }
    }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

// A function of the plane angle beta sampled strictly inside (0, pi/2).
class AngularProfile {
public:
    AngularProfile() = default;
    AngularProfile(std::vector<double> grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (grid_.size() != values_.size())
            throw DomainError("AngularProfile: grid and values differ in length");
        if (grid_.empty()) throw DomainError("AngularProfile: empty grid");
        RadialProfile::check_increasing(grid_, "AngularProfile");
        if (!(grid_.front() > 0) || !(grid_.back() < std::numbers::pi / 2))
            throw DomainError("AngularProfile: grid must lie inside (0, pi/2)");
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }

    double operator()(double beta) const { return detail::interpolate_cubic(grid_, values_, beta); }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

}  // namespace sonar
