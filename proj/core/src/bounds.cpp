#include "gravkit/bounds.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gravkit/errors.hpp"

namespace gravkit {

const std::vector<ExperimentBound>& builtin_bounds() {
    static const std::vector<ExperimentBound> table = {
        {"gravitational-wave-detectors", 4.0e-14, "interferometer mirror diffusion"},
        {"neutron-stars", 1.0e-13, "radiated power"},
        {"germanium", 0.54e-10, "spontaneous photon emission from Ge detectors"},
        {"neptune", 3.7e-12, "planetary radiated power"},
        {"cryostat", 4.6e-12, "residual heat leak in ultralow-temperature cryostats"},
    };
    return table;
}

std::vector<ExperimentBound> r0_excluded(double r0) { return r0_excluded(r0, builtin_bounds()); }

std::vector<ExperimentBound> r0_excluded(double r0, const std::vector<ExperimentBound>& table) {
    if (r0 <= 0.0) throw validation_error("r0_excluded: R0 must be positive");
    std::vector<ExperimentBound> violated;
    for (const auto& b : table)
        if (b.r0_lower_m > r0) violated.push_back(b);
    return violated;
}

const ExperimentBound& strongest_bound(const std::vector<ExperimentBound>& table) {
    if (table.empty()) throw validation_error("strongest_bound: empty table");
    return *std::max_element(table.begin(), table.end(),
                             [](const ExperimentBound& a, const ExperimentBound& b) {
                                 return a.r0_lower_m < b.r0_lower_m;
                             });
}

std::vector<ExperimentBound> load_bounds_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("load_bounds_csv: cannot open " + path);
    std::vector<ExperimentBound> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("name", 0) == 0) continue;  // header row optional
        }
        std::istringstream ss(line);
        ExperimentBound b;
        std::string field;
        if (!std::getline(ss, b.name, ',')) continue;
        if (!std::getline(ss, field, ','))
            throw validation_error("load_bounds_csv: missing r0_lower_m in '" + line + "'");
        try {
            b.r0_lower_m = std::stod(field);
        } catch (const std::exception&) {
            throw validation_error("load_bounds_csv: bad number '" + field + "'");
        }
        if (b.r0_lower_m <= 0.0)
            throw validation_error("load_bounds_csv: bound must be positive in '" + line + "'");
        std::getline(ss, b.note);
        out.push_back(std::move(b));
    }
    if (out.empty()) throw validation_error("load_bounds_csv: no bounds in " + path);
    return out;
}

}  // namespace gravkit
