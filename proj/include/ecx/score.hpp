#ifndef ECX_SCORE_HPP
#define ECX_SCORE_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace ecx {

enum class Axis { Geo, Activity };

enum class Method {
    Reflections,
    Eci,
    Pci,
    Fitness,
    Complexity,
    ExogenousFitness,
    SectoralFitness,
};

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Reflections: return "reflections";
        case Method::Eci: return "eci";
        case Method::Pci: return "pci";
        case Method::Fitness: return "fitness";
        case Method::Complexity: return "complexity";
        case Method::ExogenousFitness: return "exogenous-fitness";
        case Method::SectoralFitness: return "sectoral-fitness";
    }
    return "unknown";
}

enum class Normalization { Standardized, MeanOne, DummyReferenced };

inline std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::Standardized: return "standardized";
        case Normalization::MeanOne: return "mean-one";
        case Normalization::DummyReferenced: return "dummy-referenced";
    }
    return "unknown";
}

struct ConvergenceRecord {
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
    // Iteration from which rankings stayed unchanged through termination;
    // -1 when they were still moving.
    int ranks_stable_since = -1;
};

// Per-identifier scores on one axis, with enough metadata to make the
// normalization and provenance reproducible.
struct ScoreVector {
    Axis axis = Axis::Geo;
    std::vector<std::string> ids;
    Eigen::VectorXd values;
    Method method = Method::Fitness;
    Normalization normalization = Normalization::MeanOne;
    std::string reference_id;          // dummy geo name when dummy-referenced
    std::string subset_name;           // sectoral variants record the mask
    ConvergenceRecord convergence;
    bool non_unique = false;           // ECI/PCI: degenerate second eigenvalue
    std::vector<std::string> extremal_ids;  // EFC: activities pinned at the cap
    std::vector<std::string> warnings;

    std::size_t size() const { return ids.size(); }
};

}  // namespace ecx

#endif  // ECX_SCORE_HPP
