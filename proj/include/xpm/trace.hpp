#pragma once

#include <string>
#include <vector>

#include "xpm/model.hpp"

namespace xpm {

// Uniformly sampled probe phase, optionally with per-sample standard errors
// and the matching intensity transmission.
struct PhaseTrace {
    TimeGrid grid;
    std::vector<double> phase;          // rad
    std::vector<double> stderr_rad;     // empty when unknown
    std::vector<double> transmission;   // empty when not computed
    std::vector<std::string> notes;     // accuracy warnings and similar metadata

    bool has_stderr() const { return !stderr_rad.empty(); }
    bool has_transmission() const { return !transmission.empty(); }
    std::size_t size() const { return phase.size(); }
    double time(std::size_t i) const { return grid.time(i); }

    void validate() const;
};

// Linear interpolation of a uniformly sampled series; clamps outside the grid.
double interpolate(const TimeGrid& grid, const std::vector<double>& values, double t);

}  // namespace xpm
