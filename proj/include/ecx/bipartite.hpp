#ifndef ECX_BIPARTITE_HPP
#define ECX_BIPARTITE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ecx/codes.hpp"
#include "ecx/errors.hpp"

namespace ecx {

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Raw geography x activity volumes for one layer and one period.
// Rows are geographies, columns are activities; both label lists are unique
// and lexicographically sorted by the ingest stage.
struct WeightedBipartite {
    std::vector<std::string> geos;
    std::vector<std::string> activities;   // canonical code strings
    Scheme scheme = Scheme::Custom;
    Eigen::MatrixXd weights;               // W_ga >= 0
    int period = 0;
    std::string layer;
};

// Comparative-advantage ratios.  Cells in a zero-marginal row or column are
// not 0/0-collapsed: they are flagged undefined and kept out of every
// downstream contract.
struct RcaMatrix {
    std::vector<std::string> geos;
    std::vector<std::string> activities;
    Scheme scheme = Scheme::Custom;
    Eigen::MatrixXd values;
    BoolGrid defined;
    std::vector<Eigen::Index> zero_geos;        // rows with zero marginal
    std::vector<Eigen::Index> zero_activities;  // columns with zero marginal
    int period = 0;
    std::string layer;
};

// 0/1 specialization matrix (entries stored as exact 0.0/1.0 doubles so the
// matrix can enter Eigen products directly).
struct BinaryBipartite {
    std::vector<std::string> geos;
    std::vector<std::string> activities;
    Scheme scheme = Scheme::Custom;
    Eigen::MatrixXd entries;
    double threshold = 1.0;
    int period = 0;
    std::string layer;

    Eigen::Index n_geos() const { return entries.rows(); }
    Eigen::Index n_activities() const { return entries.cols(); }
};

struct DegreeProfile {
    Eigen::VectorXd diversification;  // d_g, row sums
    Eigen::VectorXd ubiquity;         // u_a, column sums
};

// RCA_ga = W_ga * total / (row_g * col_a) on the cells where both marginals
// are positive.
template <typename Derived>
Eigen::MatrixXd rca_values(const Eigen::MatrixBase<Derived>& weights, BoolGrid* defined = nullptr) {
    const Eigen::MatrixXd w = weights.derived().template cast<double>();
    const double total = w.sum();
    if (!(total > 0.0)) throw data_error("RCA: matrix grand total is zero");
    const Eigen::VectorXd row = w.rowwise().sum();
    const Eigen::VectorXd col = w.colwise().sum();
    Eigen::MatrixXd rca = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    if (defined) defined->setConstant(w.rows(), w.cols(), true);
    for (Eigen::Index g = 0; g < w.rows(); ++g) {
        for (Eigen::Index a = 0; a < w.cols(); ++a) {
            if (row(g) > 0.0 && col(a) > 0.0) {
                rca(g, a) = w(g, a) * total / (row(g) * col(a));
            } else if (defined) {
                (*defined)(g, a) = false;
            }
        }
    }
    return rca;
}

inline RcaMatrix compute_rca(const WeightedBipartite& m) {
    if (m.weights.rows() == 0 || m.weights.cols() == 0)
        throw data_error("RCA: empty matrix");
    RcaMatrix out;
    out.geos = m.geos;
    out.activities = m.activities;
    out.scheme = m.scheme;
    out.period = m.period;
    out.layer = m.layer;
    out.values = rca_values(m.weights, &out.defined);
    const Eigen::VectorXd row = m.weights.rowwise().sum();
    const Eigen::VectorXd col = m.weights.colwise().sum();
    for (Eigen::Index g = 0; g < row.size(); ++g)
        if (!(row(g) > 0.0)) out.zero_geos.push_back(g);
    for (Eigen::Index a = 0; a < col.size(); ++a)
        if (!(col(a) > 0.0)) out.zero_activities.push_back(a);
    return out;
}

// M_ga = 1 iff RCA_ga is defined and >= threshold (equality maps to 1).
inline BinaryBipartite binarize(const RcaMatrix& rca, double threshold = 1.0) {
    if (!(threshold > 0.0)) throw config_error("binarize: threshold must be positive");
    BinaryBipartite out;
    out.geos = rca.geos;
    out.activities = rca.activities;
    out.scheme = rca.scheme;
    out.threshold = threshold;
    out.period = rca.period;
    out.layer = rca.layer;
    out.entries = Eigen::MatrixXd::Zero(rca.values.rows(), rca.values.cols());
    for (Eigen::Index g = 0; g < rca.values.rows(); ++g)
        for (Eigen::Index a = 0; a < rca.values.cols(); ++a)
            if (rca.defined(g, a) && rca.values(g, a) >= threshold) out.entries(g, a) = 1.0;
    return out;
}

template <typename Derived>
DegreeProfile degree_profile(const Eigen::MatrixBase<Derived>& m) {
    DegreeProfile p;
    p.diversification = m.derived().template cast<double>().rowwise().sum();
    p.ubiquity = m.derived().template cast<double>().colwise().sum();
    return p;
}

inline DegreeProfile degrees(const BinaryBipartite& m) { return degree_profile(m.entries); }

// Offending row/column labels for matrices that must not contain zero-degree
// geos or activities (the iterative solvers divide by the degrees).
inline void require_positive_degrees(const BinaryBipartite& m, const std::string& who) {
    DegreeProfile p = degrees(m);
    std::string bad;
    for (Eigen::Index g = 0; g < p.diversification.size(); ++g)
        if (p.diversification(g) == 0.0) bad += (bad.empty() ? "" : ", ") + m.geos[static_cast<std::size_t>(g)];
    for (Eigen::Index a = 0; a < p.ubiquity.size(); ++a)
        if (p.ubiquity(a) == 0.0) bad += (bad.empty() ? "" : ", ") + m.activities[static_cast<std::size_t>(a)];
    if (!bad.empty())
        throw data_error(who + ": zero-degree rows/columns present (" + bad +
                         "); drop them before calling");
}

// Removes zero-degree rows and columns, preserving order of the survivors.
inline BinaryBipartite drop_zero_degrees(const BinaryBipartite& m) {
    DegreeProfile p = degrees(m);
    std::vector<Eigen::Index> gi, ai;
    for (Eigen::Index g = 0; g < p.diversification.size(); ++g)
        if (p.diversification(g) > 0.0) gi.push_back(g);
    for (Eigen::Index a = 0; a < p.ubiquity.size(); ++a)
        if (p.ubiquity(a) > 0.0) ai.push_back(a);
    BinaryBipartite out;
    out.scheme = m.scheme;
    out.threshold = m.threshold;
    out.period = m.period;
    out.layer = m.layer;
    out.entries.resize(static_cast<Eigen::Index>(gi.size()), static_cast<Eigen::Index>(ai.size()));
    for (std::size_t r = 0; r < gi.size(); ++r) {
        out.geos.push_back(m.geos[static_cast<std::size_t>(gi[r])]);
        for (std::size_t c = 0; c < ai.size(); ++c)
            out.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m.entries(gi[r], ai[c]);
    }
    for (std::size_t c = 0; c < ai.size(); ++c)
        out.activities.push_back(m.activities[static_cast<std::size_t>(ai[c])]);
    return out;
}

}  // namespace ecx

#endif  // ECX_BIPARTITE_HPP
