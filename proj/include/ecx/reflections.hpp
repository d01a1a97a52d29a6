#ifndef ECX_REFLECTIONS_HPP
#define ECX_REFLECTIONS_HPP

#include <Eigen/Dense>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/numeric.hpp"

namespace ecx {

// One averaging step of the coupled iteration:
//   k_g <- (1/d_g) * sum_a M_ga k_a        (geo side)
//   k_a <- (1/u_a) * sum_g M_ga k_g        (activity side)
// Free functions so tests and the trivial-fixed-point checks can drive the
// map with arbitrary starting vectors.
template <typename DerivedM, typename DerivedV>
Eigen::VectorXd reflect_geo(const Eigen::MatrixBase<DerivedM>& m,
                            const Eigen::MatrixBase<DerivedV>& activity_scores,
                            const Eigen::VectorXd& diversification) {
    return (m.derived().template cast<double>() * activity_scores.derived().template cast<double>())
               .cwiseQuotient(diversification);
}

template <typename DerivedM, typename DerivedV>
Eigen::VectorXd reflect_activity(const Eigen::MatrixBase<DerivedM>& m,
                                 const Eigen::MatrixBase<DerivedV>& geo_scores,
                                 const Eigen::VectorXd& ubiquity) {
    return (m.derived().template cast<double>().transpose() *
            geo_scores.derived().template cast<double>())
        .cwiseQuotient(ubiquity);
}

struct ReflectionsTrace {
    // geo[n] and activity[n] are the exact iterates at step n; the iteration
    // starts from diversification and ubiquity (n = 0) and the two chains
    // leapfrog: geo[n] uses activity[n-1] and vice versa.
    std::vector<Eigen::VectorXd> geo;
    std::vector<Eigen::VectorXd> activity;
    // Standardized copies (mean 0, variance 1); all-zero when an iterate is
    // constant and the flag below is false for that index.
    std::vector<Eigen::VectorXd> geo_std;
    std::vector<Eigen::VectorXd> activity_std;
    std::vector<bool> geo_std_ok;
    std::vector<bool> activity_std_ok;
};

inline ReflectionsTrace reflections(const BinaryBipartite& m, int iterations) {
    require_positive_degrees(m, "reflections");
    DegreeProfile deg = degrees(m);
    ReflectionsTrace tr;
    tr.geo.push_back(deg.diversification);
    tr.activity.push_back(deg.ubiquity);
    for (int n = 1; n <= iterations; ++n) {
        tr.geo.push_back(reflect_geo(m.entries, tr.activity[static_cast<std::size_t>(n - 1)],
                                     deg.diversification));
        tr.activity.push_back(reflect_activity(m.entries, tr.geo[static_cast<std::size_t>(n - 1)],
                                               deg.ubiquity));
    }
    for (const auto& v : tr.geo) {
        bool ok = false;
        tr.geo_std.push_back(standardize(v, &ok));
        tr.geo_std_ok.push_back(ok);
    }
    for (const auto& v : tr.activity) {
        bool ok = false;
        tr.activity_std.push_back(standardize(v, &ok));
        tr.activity_std_ok.push_back(ok);
    }
    return tr;
}

}  // namespace ecx

#endif  // ECX_REFLECTIONS_HPP
