#ifndef ECX_BICM_HPP
#define ECX_BICM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/errors.hpp"
#include "ecx/score.hpp"

namespace ecx {

struct BicmOptions {
    double tol = 1e-10;
    int max_iter = 100000;
    double damping = 0.5;
};

struct BicmModel {
    std::vector<std::string> geos;
    std::vector<std::string> activities;
    std::string layer;
    int period = 0;
    // Independent link probabilities reproducing the observed degree
    // sequences in expectation.
    Eigen::MatrixXd p;
    // Rows and columns pinned to 0/1 by degree alone, before any fitting.
    Eigen::Index pinned_rows = 0;
    Eigen::Index pinned_cols = 0;
    ConvergenceRecord convergence;
};

// Maximum-entropy null model with the observed degree sequences as soft
// constraints: p_ga = x_g y_a / (1 + x_g y_a). Rows and columns that are
// empty or full relative to the remaining grid admit only p of exactly 0 or
// 1, so they are peeled off first and the multipliers are fitted on the
// irreducible core by a damped fixed point.
inline BicmModel fit_bicm(const BinaryBipartite& m, BicmOptions opt = {}) {
    const Eigen::Index ng = m.n_geos(), na = m.n_activities();
    if (ng == 0 || na == 0) throw data_error("bicm: empty matrix");

    BicmModel model;
    model.geos = m.geos;
    model.activities = m.activities;
    model.layer = m.layer;
    model.period = m.period;
    model.p = Eigen::MatrixXd::Constant(ng, na, -1.0);

    DegreeProfile deg = degrees(m);
    Eigen::VectorXd d = deg.diversification, u = deg.ubiquity;
    std::vector<bool> row_active(static_cast<std::size_t>(ng), true);
    std::vector<bool> col_active(static_cast<std::size_t>(na), true);
    Eigen::Index rows_left = ng, cols_left = na;

    auto pin_row = [&](Eigen::Index g, double value) {
        for (Eigen::Index a = 0; a < na; ++a)
            if (col_active[static_cast<std::size_t>(a)]) {
                model.p(g, a) = value;
                if (value == 1.0) u(a) -= 1.0;
            }
        row_active[static_cast<std::size_t>(g)] = false;
        --rows_left;
        ++model.pinned_rows;
    };
    auto pin_col = [&](Eigen::Index a, double value) {
        for (Eigen::Index g = 0; g < ng; ++g)
            if (row_active[static_cast<std::size_t>(g)]) {
                model.p(g, a) = value;
                if (value == 1.0) d(g) -= 1.0;
            }
        col_active[static_cast<std::size_t>(a)] = false;
        --cols_left;
        ++model.pinned_cols;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (Eigen::Index g = 0; g < ng; ++g) {
            if (!row_active[static_cast<std::size_t>(g)]) continue;
            if (d(g) <= 0.0 || d(g) >= static_cast<double>(cols_left)) {
                pin_row(g, d(g) <= 0.0 ? 0.0 : 1.0);
                changed = true;
            }
        }
        for (Eigen::Index a = 0; a < na; ++a) {
            if (!col_active[static_cast<std::size_t>(a)]) continue;
            if (u(a) <= 0.0 || u(a) >= static_cast<double>(rows_left)) {
                pin_col(a, u(a) <= 0.0 ? 0.0 : 1.0);
                changed = true;
            }
        }
    }

    std::vector<Eigen::Index> core_rows, core_cols;
    for (Eigen::Index g = 0; g < ng; ++g)
        if (row_active[static_cast<std::size_t>(g)]) core_rows.push_back(g);
    for (Eigen::Index a = 0; a < na; ++a)
        if (col_active[static_cast<std::size_t>(a)]) core_cols.push_back(a);

    if (core_rows.empty() || core_cols.empty()) {
        model.convergence.converged = true;
        model.convergence.iterations = 0;
        model.convergence.residual = 0.0;
        return model;
    }

    const Eigen::Index cr = static_cast<Eigen::Index>(core_rows.size());
    const Eigen::Index cc = static_cast<Eigen::Index>(core_cols.size());
    Eigen::VectorXd dc(cr), uc(cc);
    for (Eigen::Index i = 0; i < cr; ++i) dc(i) = d(core_rows[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < cc; ++j) uc(j) = u(core_cols[static_cast<std::size_t>(j)]);

    const double edges = dc.sum();
    Eigen::VectorXd x = dc / std::sqrt(edges), y = uc / std::sqrt(edges);

    double change = std::numeric_limits<double>::infinity();
    int it;
    for (it = 1; it <= opt.max_iter; ++it) {
        change = 0.0;
        for (Eigen::Index i = 0; i < cr; ++i) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < cc; ++j) s += y(j) / (1.0 + x(i) * y(j));
            const double prop = dc(i) / s;
            const double next = opt.damping * x(i) + (1.0 - opt.damping) * prop;
            change = std::max(change, std::abs(next - x(i)) / x(i));
            x(i) = next;
        }
        for (Eigen::Index j = 0; j < cc; ++j) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < cr; ++i) s += x(i) / (1.0 + x(i) * y(j));
            const double prop = uc(j) / s;
            const double next = opt.damping * y(j) + (1.0 - opt.damping) * prop;
            change = std::max(change, std::abs(next - y(j)) / y(j));
            y(j) = next;
        }
        if (change < opt.tol) break;
    }

    for (Eigen::Index i = 0; i < cr; ++i)
        for (Eigen::Index j = 0; j < cc; ++j) {
            const double xy = x(i) * y(j);
            model.p(core_rows[static_cast<std::size_t>(i)],
                    core_cols[static_cast<std::size_t>(j)]) = xy / (1.0 + xy);
        }

    double margin_err = 0.0;
    for (Eigen::Index i = 0; i < cr; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < cc; ++j)
            s += model.p(core_rows[static_cast<std::size_t>(i)], core_cols[static_cast<std::size_t>(j)]);
        margin_err = std::max(margin_err, std::abs(s - dc(i)));
    }
    for (Eigen::Index j = 0; j < cc; ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < cr; ++i)
            s += model.p(core_rows[static_cast<std::size_t>(i)], core_cols[static_cast<std::size_t>(j)]);
        margin_err = std::max(margin_err, std::abs(s - uc(j)));
    }

    model.convergence.iterations = std::min(it, opt.max_iter);
    model.convergence.residual = margin_err;
    model.convergence.converged = change < opt.tol;
    if (!model.convergence.converged)
        throw convergence_error("bicm: fixed point did not converge within " +
                                std::to_string(opt.max_iter) + " iterations");
    return model;
}

}  // namespace ecx

#endif  // ECX_BICM_HPP
