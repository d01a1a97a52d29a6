#ifndef ECX_VALIDATE_HPP
#define ECX_VALIDATE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ecx/assist.hpp"
#include "ecx/bicm.hpp"
#include "ecx/bipartite.hpp"
#include "ecx/errors.hpp"
#include "ecx/rng.hpp"

namespace ecx {

enum class Correction { Bonferroni, BhFdr };

inline const char* to_string(Correction c) {
    return c == Correction::Bonferroni ? "bonferroni" : "bh-fdr";
}

struct ValidationOptions {
    int samples = 1000;
    double alpha = 0.05;
    Correction correction = Correction::BhFdr;
    std::uint64_t seed = 0;
};

struct ValidatedEdge {
    std::string source;
    std::string target;
    double weight;
    double p_value;
};

struct ValidatedNetwork {
    std::vector<std::string> source_activities;
    std::vector<std::string> target_activities;
    Eigen::MatrixXd p_values;
    Eigen::MatrixXd p_adjusted;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> significant;
    // Cells excluded from testing (undefined rows of the observed matrix).
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> tested;
    std::vector<ValidatedEdge> edges;  // significant cells only
    int samples = 0;
    double alpha = 0.0;
    Correction correction = Correction::BhFdr;
    std::uint64_t seed = 0;
    // Both sides drawn as a single sample because the nulls model one matrix.
    bool paired = false;
    std::vector<std::string> warnings;
};

namespace detail {

// One Monte Carlo draw from a fitted null. The stream encodes side and cell
// so every variate is a pure function of (seed, side, cell, sample); draw
// order cannot change the sample.
inline BinaryBipartite sample_null(const BicmModel& null, const CounterRng& rng, bool second_side,
                                   std::uint64_t sample) {
    BinaryBipartite m;
    m.geos = null.geos;
    m.activities = null.activities;
    m.threshold = 1.0;
    const Eigen::Index ng = null.p.rows(), na = null.p.cols();
    m.entries.resize(ng, na);
    const std::uint64_t side_bit = second_side ? (std::uint64_t{1} << 62) : 0;
    for (Eigen::Index g = 0; g < ng; ++g)
        for (Eigen::Index a = 0; a < na; ++a) {
            const std::uint64_t stream =
                side_bit | (static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(na) +
                            static_cast<std::uint64_t>(a));
            m.entries(g, a) = rng.bernoulli(null.p(g, a), stream, sample) ? 1.0 : 0.0;
        }
    return m;
}

inline void apply_correction(ValidatedNetwork& net) {
    struct Cell {
        Eigen::Index r, c;
        double p;
    };
    std::vector<Cell> cells;
    for (Eigen::Index r = 0; r < net.p_values.rows(); ++r)
        for (Eigen::Index c = 0; c < net.p_values.cols(); ++c)
            if (net.tested(r, c)) cells.push_back({r, c, net.p_values(r, c)});
    const double m = static_cast<double>(cells.size());
    net.p_adjusted = Eigen::MatrixXd::Ones(net.p_values.rows(), net.p_values.cols());
    net.significant.setConstant(false);
    if (cells.empty()) return;

    if (net.correction == Correction::Bonferroni) {
        for (const Cell& cell : cells) {
            const double adj = std::min(1.0, cell.p * m);
            net.p_adjusted(cell.r, cell.c) = adj;
            net.significant(cell.r, cell.c) = adj <= net.alpha;
        }
        return;
    }

    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.p != b.p) return a.p < b.p;
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    double running = 1.0;
    for (std::size_t k = cells.size(); k-- > 0;) {
        const double adj = std::min(running, cells[k].p * m / static_cast<double>(k + 1));
        running = adj;
        net.p_adjusted(cells[k].r, cells[k].c) = adj;
        net.significant(cells[k].r, cells[k].c) = adj <= net.alpha;
    }
}

}  // namespace detail

// Monte Carlo significance test of every defined assist cell against the
// degree-preserving null: p = (1 + #{B* >= B_obs}) / (samples + 1), one
// sided, followed by a multiple-testing correction over the tested cells.
inline ValidatedNetwork validate_links(const AssistMatrix& observed, const BicmModel& null_source,
                                       const BicmModel& null_target, ValidationOptions opt = {}) {
    if (opt.samples < 100) throw config_error("validate: need at least 100 samples");
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
        throw config_error("validate: alpha must lie strictly between 0 and 1");
    if (null_source.activities != observed.source_activities ||
        null_target.activities != observed.target_activities)
        throw data_error("validate: null models do not cover the observed matrix activities");

    ValidatedNetwork net;
    net.source_activities = observed.source_activities;
    net.target_activities = observed.target_activities;
    net.samples = opt.samples;
    net.alpha = opt.alpha;
    net.correction = opt.correction;
    net.seed = opt.seed;
    net.paired = null_source.geos == null_target.geos &&
                 null_source.activities == null_target.activities &&
                 null_source.layer == null_target.layer &&
                 null_source.period == null_target.period;

    const Eigen::Index nr = observed.b.rows(), nc = observed.b.cols();
    net.tested = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(nr, nc, true);
    for (const std::string& id : observed.zero_rows) {
        const auto it =
            std::find(observed.source_activities.begin(), observed.source_activities.end(), id);
        if (it != observed.source_activities.end())
            net.tested.row(it - observed.source_activities.begin()).setConstant(false);
    }

    CounterRng rng(opt.seed);
    Eigen::MatrixXd exceed = Eigen::MatrixXd::Zero(nr, nc);
    for (int s = 0; s < opt.samples; ++s) {
        BinaryBipartite src = detail::sample_null(null_source, rng, false,
                                                  static_cast<std::uint64_t>(s));
        BinaryBipartite tgt = net.paired ? src
                                         : detail::sample_null(null_target, rng, true,
                                                               static_cast<std::uint64_t>(s));
        Eigen::MatrixXd b_star;
        try {
            b_star = assist_matrix(src, tgt).b;
        } catch (const data_error&) {
            b_star = Eigen::MatrixXd::Zero(nr, nc);
        }
        exceed += (b_star.array() >= observed.b.array()).cast<double>().matrix();
    }

    net.p_values = (exceed.array() + 1.0) / static_cast<double>(opt.samples + 1);
    net.significant.resize(nr, nc);
    detail::apply_correction(net);

    for (Eigen::Index r = 0; r < nr; ++r)
        for (Eigen::Index c = 0; c < nc; ++c) {
            if (!net.tested(r, c)) {
                net.p_values(r, c) = 1.0;
                continue;
            }
            if (net.significant(r, c))
                net.edges.push_back({observed.source_activities[static_cast<std::size_t>(r)],
                                     observed.target_activities[static_cast<std::size_t>(c)],
                                     observed.b(r, c), net.p_values(r, c)});
        }
    return net;
}

}  // namespace ecx

#endif  // ECX_VALIDATE_HPP
