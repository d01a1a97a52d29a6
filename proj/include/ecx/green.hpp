#ifndef ECX_GREEN_HPP
#define ECX_GREEN_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecx/bipartite.hpp"
#include "ecx/codes.hpp"
#include "ecx/errors.hpp"
#include "ecx/numeric.hpp"
#include "ecx/proximity.hpp"
#include "ecx/score.hpp"

namespace ecx {

// How PCI enters the green sum. RankTransformed replaces each PCI value by
// its ascending 1-based rank, giving sign-free sums; ties share a rank.
enum class GciMode { Raw, RankTransformed };

// Unweighted averages density over the missing green activities;
// PciWeighted weights them by rank-transformed PCI, which keeps the result a
// convex combination and therefore inside [0,1].
enum class GcpWeighting { Unweighted, PciWeighted };

struct GreenScores {
    std::vector<std::string> geos;
    Eigen::VectorXd gci;
    Eigen::VectorXd gcp;
    std::vector<bool> gcp_defined;
    // Number of green activities the geo is specialized in.
    std::vector<int> n_green;
    // Matrix activities the mask selected.
    std::vector<std::string> green_activities;
    std::vector<std::string> warnings;
};

inline std::vector<bool> green_mask(const std::vector<std::string>& activities, Scheme scheme,
                                    const GreenClassification& classification) {
    std::vector<bool> mask(activities.size());
    for (std::size_t a = 0; a < activities.size(); ++a)
        mask[a] = classification.matches(make_code(scheme, activities[a]));
    return mask;
}

namespace detail {

inline Eigen::VectorXd pci_by_activity(const BinaryBipartite& m, const ScoreVector& pci) {
    if (pci.axis != Axis::Activity)
        throw config_error("green: complexity scores must be per activity");
    std::unordered_map<std::string, double> by_id;
    for (std::size_t i = 0; i < pci.size(); ++i) by_id.emplace(pci.ids[i], pci.values[i]);
    Eigen::VectorXd v(m.n_activities());
    for (std::size_t a = 0; a < m.activities.size(); ++a) {
        auto it = by_id.find(m.activities[a]);
        if (it == by_id.end())
            throw data_error("green: no complexity score for activity " + m.activities[a]);
        v(static_cast<Eigen::Index>(a)) = it->second;
    }
    return v;
}

inline Eigen::VectorXd rank_transform(const Eigen::VectorXd& v) {
    const std::vector<int> desc = ranks_of(v);  // 1 = largest
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out(i) = static_cast<double>(v.size() - desc[static_cast<std::size_t>(i)] + 1);
    return out;
}

inline void require_mask(const BinaryBipartite& m, const std::vector<bool>& green) {
    if (green.size() != m.activities.size())
        throw config_error("green: mask does not match the activity count");
    if (std::none_of(green.begin(), green.end(), [](bool b) { return b; }))
        throw data_error("green: mask selects no matrix activity");
}

}  // namespace detail

// GCI(g): sum of the complexity of the green activities g is specialized in,
// with complexities taken from the full activity set.
inline Eigen::VectorXd gci(const BinaryBipartite& m, const ScoreVector& pci,
                           const std::vector<bool>& green, GciMode mode = GciMode::Raw) {
    detail::require_mask(m, green);
    Eigen::VectorXd q = detail::pci_by_activity(m, pci);
    if (mode == GciMode::RankTransformed) q = detail::rank_transform(q);

    Eigen::VectorXd out(m.n_geos());
    for (Eigen::Index g = 0; g < m.n_geos(); ++g) {
        CompensatedSum sum;
        for (std::size_t a = 0; a < green.size(); ++a)
            if (green[a] && m.entries(g, static_cast<Eigen::Index>(a)) != 0.0)
                sum.add(q(static_cast<Eigen::Index>(a)));
        out(g) = sum.value();
    }
    return out;
}

// GCP(g): mean relatedness density toward the green activities g has not yet
// entered. Undefined (flagged, value 0) when no green activity is missing.
// Density cells whose denominator vanished are skipped with a warning.
inline Eigen::VectorXd gcp(const ProximityNetwork& net, const BinaryBipartite& m,
                           const std::vector<bool>& green, std::vector<bool>* defined_out = nullptr,
                           GcpWeighting weighting = GcpWeighting::Unweighted,
                           const ScoreVector* pci = nullptr,
                           std::vector<std::string>* warnings_out = nullptr) {
    detail::require_mask(m, green);
    const DensityMatrix density = relatedness_density(m, net);

    Eigen::VectorXd weight = Eigen::VectorXd::Ones(m.n_activities());
    if (weighting == GcpWeighting::PciWeighted) {
        if (!pci) throw config_error("green: weighted potential needs complexity scores");
        weight = detail::rank_transform(detail::pci_by_activity(m, *pci));
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(m.n_geos());
    std::vector<bool> defined(static_cast<std::size_t>(m.n_geos()), false);
    bool skipped = false;
    for (Eigen::Index g = 0; g < m.n_geos(); ++g) {
        CompensatedSum num, den;
        for (std::size_t a = 0; a < green.size(); ++a) {
            const Eigen::Index ai = static_cast<Eigen::Index>(a);
            if (!green[a] || m.entries(g, ai) != 0.0) continue;
            if (!density.defined(g, ai)) {
                skipped = true;
                continue;
            }
            num.add(weight(ai) * density.omega(g, ai));
            den.add(weight(ai));
        }
        if (den.value() > 0.0) {
            out(g) = num.value() / den.value();
            defined[static_cast<std::size_t>(g)] = true;
        }
    }
    if (skipped && warnings_out)
        warnings_out->push_back("green: skipped density cells with empty neighborhoods");
    if (defined_out) *defined_out = std::move(defined);
    return out;
}

// Bundles GCI and GCP for export alongside per-geo specialization counts.
inline GreenScores green_scores(const BinaryBipartite& m, const ProximityNetwork& net,
                                const ScoreVector& pci, const std::vector<bool>& green,
                                GciMode mode = GciMode::Raw,
                                GcpWeighting weighting = GcpWeighting::Unweighted) {
    GreenScores out;
    out.geos = m.geos;
    out.gci = gci(m, pci, green, mode);
    out.gcp = gcp(net, m, green, &out.gcp_defined, weighting,
                  weighting == GcpWeighting::PciWeighted ? &pci : nullptr, &out.warnings);
    out.n_green.resize(m.geos.size(), 0);
    for (std::size_t a = 0; a < green.size(); ++a) {
        if (!green[a]) continue;
        out.green_activities.push_back(m.activities[a]);
        for (Eigen::Index g = 0; g < m.n_geos(); ++g)
            if (m.entries(g, static_cast<Eigen::Index>(a)) != 0.0)
                ++out.n_green[static_cast<std::size_t>(g)];
    }
    return out;
}

}  // namespace ecx

#endif  // ECX_GREEN_HPP
