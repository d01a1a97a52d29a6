#ifndef ECX_ASSIST_HPP
#define ECX_ASSIST_HPP

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/errors.hpp"

namespace ecx {

struct AssistMatrix {
    std::vector<std::string> source_activities;
    std::vector<std::string> target_activities;
    // b(a, a'): probability-like weight that specialization in source
    // activity a accompanies target activity a'. Rows with positive source
    // ubiquity sum to one.
    Eigen::MatrixXd b;
    // Source activities held by no retained geo; their rows are all zero.
    std::vector<std::string> zero_rows;
    // Geos the computation actually ran over.
    std::vector<std::string> geos;
    std::vector<std::string> warnings;
};

// B_aa' = sum_g (Ms_ga / u_a) (Mt_ga' / d_g) over the geos common to both
// matrices, skipping geos that hold source activities but nothing in the
// target. Ubiquities are recomputed over the retained geo set so each
// defined row is an exact probability distribution.
inline AssistMatrix assist_matrix(const BinaryBipartite& source, const BinaryBipartite& target) {
    AssistMatrix out;
    out.source_activities = source.activities;
    out.target_activities = target.activities;

    std::unordered_map<std::string, Eigen::Index> target_row;
    for (std::size_t g = 0; g < target.geos.size(); ++g)
        target_row.emplace(target.geos[g], static_cast<Eigen::Index>(g));

    std::vector<Eigen::Index> src_rows, tgt_rows;
    bool mismatch = source.geos.size() != target.geos.size();
    for (std::size_t g = 0; g < source.geos.size(); ++g) {
        auto it = target_row.find(source.geos[g]);
        if (it == target_row.end()) {
            mismatch = true;
            continue;
        }
        const Eigen::Index sg = static_cast<Eigen::Index>(g);
        if (target.entries.row(it->second).sum() == 0.0) {
            if (source.entries.row(sg).sum() > 0.0)
                out.warnings.push_back("assist: dropped " + source.geos[g] +
                                       ", no target specializations");
            continue;
        }
        src_rows.push_back(sg);
        tgt_rows.push_back(it->second);
        out.geos.push_back(source.geos[g]);
    }
    if (mismatch)
        out.warnings.push_back("assist: matrices list different geos, using the intersection");
    if (src_rows.empty()) throw data_error("assist: no usable geo is present in both matrices");

    const Eigen::Index ng = static_cast<Eigen::Index>(src_rows.size());
    Eigen::MatrixXd ms(ng, source.n_activities()), mt(ng, target.n_activities());
    for (Eigen::Index g = 0; g < ng; ++g) {
        ms.row(g) = source.entries.row(src_rows[static_cast<std::size_t>(g)]);
        mt.row(g) = target.entries.row(tgt_rows[static_cast<std::size_t>(g)]);
    }

    const Eigen::VectorXd u = ms.colwise().sum().transpose();
    const Eigen::VectorXd d = mt.rowwise().sum();
    Eigen::VectorXd inv_u(u.size());
    for (Eigen::Index a = 0; a < u.size(); ++a) {
        if (u(a) == 0.0) {
            inv_u(a) = 0.0;
            out.zero_rows.push_back(source.activities[static_cast<std::size_t>(a)]);
        } else {
            inv_u(a) = 1.0 / u(a);
        }
    }
    // Retained geos all have d > 0 by construction.
    out.b = inv_u.asDiagonal() * ms.transpose() * d.cwiseInverse().asDiagonal() * mt;
    return out;
}

}  // namespace ecx

#endif  // ECX_ASSIST_HPP
