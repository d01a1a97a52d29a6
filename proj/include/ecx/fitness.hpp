#ifndef ECX_FITNESS_HPP
#define ECX_FITNESS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/errors.hpp"
#include "ecx/numeric.hpp"
#include "ecx/score.hpp"

namespace ecx {

enum class FitnessScale { MeanOne, Dummy };

struct FitnessOptions {
    double tol = 1e-10;
    int max_iter = 100000;
    FitnessScale scale = FitnessScale::MeanOne;
    // Floor applied before each normalization; keeps 1/F finite on matrices
    // whose fixed point has vanishing components.
    double fitness_floor = 1e-12;
    // Activities whose complexity exceeds the cap are reported as extremal.
    double extremal_cap = 1e9;
    // Rankings must also hold still for this many consecutive iterations
    // before the run counts as converged.
    int rank_stability_window = 10;
    bool record_means = false;
};

struct FitnessResult {
    ScoreVector fitness;     // per geo
    ScoreVector complexity;  // per activity
    // Post-normalization means per iteration, filled when record_means is on.
    std::vector<double> f_means;
    std::vector<double> q_means;
};

namespace detail {

struct EfcState {
    Eigen::VectorXd f;
    Eigen::VectorXd q;
    ConvergenceRecord record;
    std::vector<double> f_means;
    std::vector<double> q_means;
};

// Fixed point of the coupled map
//   F~_g = sum_a M_ga Q_a          F = F~ / <F~>
//   Q~_a = 1 / sum_g M_ga (1/F_g)  Q = Q~ / <Q~>
// iterated from all-ones vectors, floored and normalized every half step.
// The second half step reads the F just produced, not the previous iterate.
inline EfcState efc_fixed_point(const Eigen::MatrixXd& m,
                                const std::vector<std::string>& activity_ids,
                                const FitnessOptions& opt) {
    const Eigen::Index ng = m.rows(), na = m.cols();
    EfcState st;
    st.f = Eigen::VectorXd::Ones(ng);
    st.q = Eigen::VectorXd::Ones(na);

    auto normalize = [&](Eigen::VectorXd& v) {
        v = v.cwiseMax(opt.fitness_floor);
        v /= compensated_total(v) / static_cast<double>(v.size());
    };

    std::vector<int> f_ranks = ranks_of(st.f), q_ranks = ranks_of(st.q);
    int stable_streak = 0, stable_since = -1;
    double residual = std::numeric_limits<double>::infinity();
    int it;
    for (it = 1; it <= opt.max_iter; ++it) {
        Eigen::VectorXd f_new = m * st.q;
        normalize(f_new);
        Eigen::VectorXd q_new = (m.transpose() * f_new.cwiseInverse()).cwiseInverse();
        normalize(q_new);

        if (!f_new.allFinite() || !q_new.allFinite()) {
            std::string bad;
            for (Eigen::Index a = 0; a < na; ++a)
                if (!std::isfinite(q_new(a)))
                    bad += (bad.empty() ? "" : ", ") + activity_ids[static_cast<std::size_t>(a)];
            throw convergence_error("fitness: values left the machine range at iteration " +
                                    std::to_string(it) + (bad.empty() ? "" : " (" + bad + ")"));
        }

        residual = 0.0;
        for (Eigen::Index g = 0; g < ng; ++g)
            residual = std::max(residual, std::abs(f_new(g) - st.f(g)) / st.f(g));
        for (Eigen::Index a = 0; a < na; ++a)
            residual = std::max(residual, std::abs(q_new(a) - st.q(a)) / st.q(a));

        st.f = std::move(f_new);
        st.q = std::move(q_new);

        if (opt.record_means) {
            st.f_means.push_back(st.f.mean());
            st.q_means.push_back(st.q.mean());
        }

        std::vector<int> fr = ranks_of(st.f), qr = ranks_of(st.q);
        if (fr == f_ranks && qr == q_ranks) {
            if (stable_streak == 0) stable_since = it;
            ++stable_streak;
        } else {
            stable_streak = 0;
            stable_since = -1;
            f_ranks = std::move(fr);
            q_ranks = std::move(qr);
        }

        if (residual < opt.tol && stable_streak >= opt.rank_stability_window) break;
    }
    st.record.iterations = std::min(it, opt.max_iter);
    st.record.residual = residual;
    st.record.converged = residual < opt.tol && stable_streak >= opt.rank_stability_window;
    st.record.ranks_stable_since = st.record.converged ? stable_since : -1;
    return st;
}

inline void flag_extremal(ScoreVector& sv, double cap) {
    for (std::size_t i = 0; i < sv.size(); ++i)
        if (sv.values[i] > cap) sv.extremal_ids.push_back(sv.ids[i]);
}

}  // namespace detail

// Fitness-complexity scores for a binary matrix. Both vectors are mean-one
// scaled; with FitnessScale::Dummy the geo fitness is instead expressed
// relative to a synthetic geo specialized in every activity.
inline FitnessResult fitness_complexity(const BinaryBipartite& m, FitnessOptions opt = {}) {
    require_positive_degrees(m, "fitness");
    if (opt.tol <= 0 || opt.max_iter < 1)
        throw config_error("fitness: tolerance and iteration cap must be positive");

    FitnessResult out;
    out.fitness.axis = Axis::Geo;
    out.fitness.ids = m.geos;
    out.fitness.method = Method::Fitness;
    out.complexity.axis = Axis::Activity;
    out.complexity.ids = m.activities;
    out.complexity.method = Method::Complexity;
    out.complexity.normalization = Normalization::MeanOne;

    const Eigen::MatrixXd& w = m.entries;
    if (opt.scale == FitnessScale::Dummy) {
        std::string dummy = "__dummy__";
        while (std::find(m.geos.begin(), m.geos.end(), dummy) != m.geos.end()) dummy += "_";
        Eigen::MatrixXd aug(w.rows() + 1, w.cols());
        aug.topRows(w.rows()) = w;
        aug.bottomRows(1).setOnes();
        detail::EfcState st = detail::efc_fixed_point(aug, m.activities, opt);
        const double ref = st.f(st.f.size() - 1);
        out.fitness.values = st.f.head(st.f.size() - 1) / ref;
        out.fitness.normalization = Normalization::DummyReferenced;
        out.fitness.reference_id = dummy;
        out.complexity.values = std::move(st.q);
        out.fitness.convergence = st.record;
        out.complexity.convergence = st.record;
        out.f_means = std::move(st.f_means);
        out.q_means = std::move(st.q_means);
    } else {
        detail::EfcState st = detail::efc_fixed_point(w, m.activities, opt);
        out.fitness.values = std::move(st.f);
        out.fitness.normalization = Normalization::MeanOne;
        out.complexity.values = std::move(st.q);
        out.fitness.convergence = st.record;
        out.complexity.convergence = st.record;
        out.f_means = std::move(st.f_means);
        out.q_means = std::move(st.q_means);
    }
    detail::flag_extremal(out.complexity, opt.extremal_cap);
    if (!out.fitness.convergence.converged)
        out.fitness.warnings.push_back("fitness: iteration cap reached before convergence");
    return out;
}

// Fitness against an externally supplied complexity vector: F_g is the sum of
// reference complexities over the geo's specializations, mean-one scaled.
// Activities missing from the reference are dropped with a warning.
inline ScoreVector exogenous_fitness(const BinaryBipartite& m, const ScoreVector& q_ref) {
    if (q_ref.axis != Axis::Activity)
        throw config_error("exogenous fitness: reference scores must be per activity");
    std::unordered_map<std::string, double> ref;
    for (std::size_t i = 0; i < q_ref.size(); ++i) ref.emplace(q_ref.ids[i], q_ref.values[i]);

    ScoreVector out;
    out.axis = Axis::Geo;
    out.ids = m.geos;
    out.method = Method::ExogenousFitness;
    out.normalization = Normalization::MeanOne;

    Eigen::VectorXd q = Eigen::VectorXd::Zero(m.n_activities());
    std::size_t matched = 0;
    for (std::size_t a = 0; a < m.activities.size(); ++a) {
        auto it = ref.find(m.activities[a]);
        if (it == ref.end()) {
            out.warnings.push_back("exogenous fitness: no reference score for " + m.activities[a]);
        } else {
            q(static_cast<Eigen::Index>(a)) = it->second;
            ++matched;
        }
    }
    if (matched == 0)
        throw data_error("exogenous fitness: reference scores share no activity with the matrix");

    out.values = m.entries * q;
    if (!mean_one_normalize(out.values))
        out.warnings.push_back("exogenous fitness: scores sum to zero, left unscaled");
    return out;
}

// Fitness restricted to a subset of activities: complexities are taken from a
// run over the full matrix, then only the subset columns contribute.
inline ScoreVector sectoral_fitness(const BinaryBipartite& m, const ScoreVector& q_full,
                                    const std::vector<bool>& subset,
                                    const std::string& subset_name) {
    if (subset.size() != m.activities.size())
        throw config_error("sectoral fitness: subset mask does not match the activity count");
    if (std::none_of(subset.begin(), subset.end(), [](bool b) { return b; }))
        throw data_error("sectoral fitness: subset selects no activity");

    BinaryBipartite masked = m;
    for (std::size_t a = 0; a < subset.size(); ++a)
        if (!subset[a]) masked.entries.col(static_cast<Eigen::Index>(a)).setZero();

    ScoreVector out = exogenous_fitness(masked, q_full);
    out.method = Method::SectoralFitness;
    out.subset_name = subset_name;
    return out;
}

}  // namespace ecx

#endif  // ECX_FITNESS_HPP
