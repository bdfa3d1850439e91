#pragma once

#include <string>
#include <vector>

namespace gravkit {

/// Experimental lower bound on the mass-density regularisation radius R0.
struct ExperimentBound {
    std::string name;
    double r0_lower_m = 0.0;
    std::string note;
};

/// The five published lower bounds on R0 (diffusion-type observables).
const std::vector<ExperimentBound>& builtin_bounds();

/// Bounds violated by the given R0, i.e. entries whose lower limit exceeds
/// it. Empty iff R0 is at or above the strongest bound. Antitone in R0.
std::vector<ExperimentBound> r0_excluded(double r0);
std::vector<ExperimentBound> r0_excluded(double r0, const std::vector<ExperimentBound>& table);

const ExperimentBound& strongest_bound(const std::vector<ExperimentBound>& table);

/// CSV override: header `name,r0_lower_m,note`, one bound per line.
std::vector<ExperimentBound> load_bounds_csv(const std::string& path);

}  // namespace gravkit
