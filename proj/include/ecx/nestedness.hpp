#ifndef ECX_NESTEDNESS_HPP
#define ECX_NESTEDNESS_HPP

#include <Eigen/Dense>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/numeric.hpp"

namespace ecx {

struct NestednessReport {
    std::vector<Eigen::Index> row_order;  // geos by descending diversification
    std::vector<Eigen::Index> col_order;  // activities by descending ubiquity
    double score = 0.0;                   // NODF in [0, 100]
    bool defined = true;                  // false when < 2 rows or < 2 columns
};

// NODF: for every unordered pair with strictly decreasing fill, the paired
// overlap is |intersection| / smaller fill; pairs with equal (or zero) fill
// contribute 0.  The score averages row pairs and column pairs together and
// is scaled to [0, 100].  Permutation-invariant by construction.
template <typename Derived>
double nodf(const Eigen::MatrixBase<Derived>& m) {
    const Eigen::MatrixXd b = m.derived().template cast<double>();
    const Eigen::Index rows = b.rows(), cols = b.cols();
    const Eigen::VectorXd rfill = b.rowwise().sum();
    const Eigen::VectorXd cfill = b.colwise().sum();
    double total = 0.0;
    long pairs = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = i + 1; j < rows; ++j) {
            ++pairs;
            if (rfill(i) == rfill(j)) continue;
            const Eigen::Index hi = rfill(i) > rfill(j) ? i : j;
            const Eigen::Index lo = hi == i ? j : i;
            if (rfill(lo) == 0.0) continue;
            const double shared = b.row(hi).dot(b.row(lo));
            total += 100.0 * shared / rfill(lo);
        }
    }
    for (Eigen::Index i = 0; i < cols; ++i) {
        for (Eigen::Index j = i + 1; j < cols; ++j) {
            ++pairs;
            if (cfill(i) == cfill(j)) continue;
            const Eigen::Index hi = cfill(i) > cfill(j) ? i : j;
            const Eigen::Index lo = hi == i ? j : i;
            if (cfill(lo) == 0.0) continue;
            const double shared = b.col(hi).dot(b.col(lo));
            total += 100.0 * shared / cfill(lo);
        }
    }
    return pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
}

inline NestednessReport nestedness(const BinaryBipartite& m) {
    NestednessReport rep;
    DegreeProfile p = degrees(m);
    rep.row_order = ranking(p.diversification);  // descending, stable
    rep.col_order = ranking(p.ubiquity);         // descending, stable
    if (m.n_geos() < 2 || m.n_activities() < 2) {
        rep.defined = false;
        rep.score = 0.0;
        return rep;
    }
    rep.score = nodf(m.entries);
    return rep;
}

}  // namespace ecx

#endif  // ECX_NESTEDNESS_HPP
