#ifndef ECX_PROXIMITY_HPP
#define ECX_PROXIMITY_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/errors.hpp"

namespace ecx {

struct ProximityNetwork {
    std::vector<std::string> activities;
    // Symmetric, unit diagonal for activities with nonzero ubiquity.
    Eigen::MatrixXd phi;
    // Pairs forced to zero because one side has no specializations.
    std::vector<std::string> zero_ubiquity;
};

// phi_aa' = co(a,a') / max(u_a, u_a'), the conditional-probability form that
// takes the smaller of the two conditionals. co counts geos specialized in
// both activities.
template <typename Derived>
Eigen::MatrixXd proximity_values(const Eigen::MatrixBase<Derived>& m,
                                 std::vector<Eigen::Index>* zero_out = nullptr) {
    const Eigen::MatrixXd md = m.derived().template cast<double>();
    const Eigen::MatrixXd co = md.transpose() * md;  // co-occurrence counts
    const Eigen::VectorXd u = co.diagonal();
    const Eigen::Index na = co.cols();

    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(na, na);
    for (Eigen::Index a = 0; a < na; ++a) {
        if (u(a) == 0.0) {
            if (zero_out) zero_out->push_back(a);
            continue;
        }
        phi(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < na; ++b) {
            if (u(b) == 0.0) continue;
            const double p = co(a, b) / std::max(u(a), u(b));
            phi(a, b) = p;
            phi(b, a) = p;
        }
    }
    return phi;
}

inline ProximityNetwork proximity(const BinaryBipartite& m) {
    ProximityNetwork net;
    net.activities = m.activities;
    std::vector<Eigen::Index> zero;
    net.phi = proximity_values(m.entries, &zero);
    for (Eigen::Index a : zero) net.zero_ubiquity.push_back(m.activities[static_cast<std::size_t>(a)]);
    return net;
}

struct DensityMatrix {
    std::vector<std::string> geos;
    std::vector<std::string> activities;
    Eigen::MatrixXd omega;
    // True where the density denominator was positive.
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> defined;
};

// omega_ga = sum_a' phi_aa' M_ga' / sum_a' phi_aa', the proximity-weighted
// share of activity a's neighborhood the geo already occupies. The sums run
// over every activity including a itself.
inline DensityMatrix relatedness_density(const BinaryBipartite& m, const ProximityNetwork& net) {
    if (net.activities != m.activities)
        throw data_error("density: proximity network and matrix list different activities");

    DensityMatrix d;
    d.geos = m.geos;
    d.activities = m.activities;
    const Eigen::MatrixXd& md = m.entries;
    const Eigen::VectorXd denom = net.phi.rowwise().sum();
    d.omega = Eigen::MatrixXd::Zero(m.n_geos(), m.n_activities());
    d.defined = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
        m.n_geos(), m.n_activities(), false);
    const Eigen::MatrixXd numer = md * net.phi;
    for (Eigen::Index a = 0; a < d.omega.cols(); ++a) {
        if (denom(a) <= 0.0) continue;
        d.omega.col(a) = numer.col(a) / denom(a);
        d.defined.col(a).setConstant(true);
    }
    return d;
}

}  // namespace ecx

#endif  // ECX_PROXIMITY_HPP
