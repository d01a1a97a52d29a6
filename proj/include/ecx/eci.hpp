#ifndef ECX_ECI_HPP
#define ECX_ECI_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "ecx/bipartite.hpp"
#include "ecx/errors.hpp"
#include "ecx/numeric.hpp"
#include "ecx/rng.hpp"
#include "ecx/score.hpp"

namespace ecx {

struct EciOptions {
    double tol = 1e-12;
    int max_iter = 10000;
    // Gap below which the second eigenvalue counts as degenerate and the
    // result is flagged non-unique.
    double degeneracy_gap = 1e-9;
    // Matrices smaller than this on the relevant side use a dense
    // eigensolver instead of the deflated power iteration.
    Eigen::Index dense_cutoff = 500;
};

struct SecondEigenpair {
    Eigen::VectorXd vector;   // eigenvector of the row-stochastic transition matrix
    double value = 0.0;       // lambda_2
    double next_value = 0.0;  // lambda_3 (-1 when there is no third eigenvalue)
    bool converged = true;
    int iterations = 0;
};

namespace detail {

// Second/third eigenpairs of T = diag(1/deg) * S with S = B B^T symmetric
// PSD.  T is similar to That = B' B'^T with B' = diag(deg^-1/2) B, whose
// leading eigenpair is (1, deg^1/2): the iteration deflates that vector
// exactly instead of estimating it.
//
// `apply` maps x -> That * x; callers choose a factored or explicit product.
template <typename Apply>
SecondEigenpair symmetric_second_eigenpair(Apply&& apply, const Eigen::VectorXd& sqrt_deg,
                                           const EciOptions& opt) {
    const Eigen::Index n = sqrt_deg.size();
    SecondEigenpair out;
    if (n < 2) throw data_error("ECI: need at least 2 rows on each side");
    Eigen::VectorXd q1 = sqrt_deg.normalized();

    CounterRng rng(0x5ca1ab1eULL);  // fixed: results must not depend on run
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform(0, static_cast<std::uint64_t>(i)) - 0.5;
        x(i, 1) = rng.uniform(1, static_cast<std::uint64_t>(i)) - 0.5;
    }

    auto orthonormalize = [&](Eigen::MatrixXd& y) {
        y.col(0) -= q1 * q1.dot(y.col(0));
        y.col(0).normalize();
        y.col(1) -= q1 * q1.dot(y.col(1));
        y.col(1) -= y.col(0) * y.col(0).dot(y.col(1));
        y.col(1).normalize();
    };
    orthonormalize(x);

    double l2 = 0.0, l3 = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        Eigen::MatrixXd y(n, 2);
        y.col(0) = apply(x.col(0));
        y.col(1) = apply(x.col(1));
        // 2x2 Rayleigh-Ritz on the deflated subspace
        const double a = x.col(0).dot(y.col(0));
        const double b = x.col(0).dot(y.col(1));
        const double c = x.col(1).dot(y.col(1));
        const double mid = 0.5 * (a + c);
        const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        const double n2 = mid + rad, n3 = mid - rad;
        const double r0 = (y.col(0) - a * x.col(0) - b * x.col(1)).norm();
        const double r1 = (y.col(1) - b * x.col(0) - c * x.col(1)).norm();
        orthonormalize(y);
        x = y;
        if (std::abs(n2 - l2) < opt.tol && std::abs(n3 - l3) < opt.tol &&
            r0 < std::sqrt(opt.tol) && r1 < std::sqrt(opt.tol)) {
            l2 = n2;
            l3 = n3;
            converged = true;
            break;
        }
        l2 = n2;
        l3 = n3;
    }
    // Rotate the converged 2-frame onto the Ritz vectors.
    Eigen::MatrixXd y(n, 2);
    y.col(0) = apply(x.col(0));
    y.col(1) = apply(x.col(1));
    const double a = x.col(0).dot(y.col(0));
    const double b = x.col(0).dot(y.col(1));
    const double c = x.col(1).dot(y.col(1));
    Eigen::Matrix2d small;
    small << a, b, b, c;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(small);
    Eigen::VectorXd v2 = x * es.eigenvectors().col(1);  // ascending order
    out.value = es.eigenvalues()(1);
    out.next_value = es.eigenvalues()(0);
    out.vector = v2.cwiseQuotient(sqrt_deg);  // back to the stochastic matrix
    out.converged = converged;
    out.iterations = it;
    return out;
}

inline SecondEigenpair dense_second_eigenpair(const Eigen::MatrixXd& half,
                                              const Eigen::VectorXd& sqrt_deg) {
    // half = diag(deg^-1/2) M diag(other_deg^-1/2); That = half * half^T
    Eigen::MatrixXd that = half * half.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(that);
    const Eigen::Index n = that.rows();
    SecondEigenpair out;
    if (n < 2) throw data_error("ECI: need at least 2 rows on each side");
    out.value = es.eigenvalues()(n - 2);
    out.next_value = n >= 3 ? es.eigenvalues()(n - 3) : -1.0;
    out.vector = es.eigenvectors().col(n - 2).cwiseQuotient(sqrt_deg);
    return out;
}

}  // namespace detail

// ECI and PCI: the standardized eigenvectors associated with the second
// largest eigenvalue of the geo-side transition matrix
// D^-1 M U^-1 M^T (resp. the activity side U^-1 M^T D^-1 M).  Signs are
// fixed so that corr(ECI, diversification) >= 0 and corr(PCI, ubiquity) <= 0.
inline std::pair<ScoreVector, ScoreVector> eci_pci(const BinaryBipartite& m,
                                                   const EciOptions& opt = {}) {
    require_positive_degrees(m, "eci");
    DegreeProfile deg = degrees(m);
    const Eigen::VectorXd sd = deg.diversification.cwiseSqrt();
    const Eigen::VectorXd su = deg.ubiquity.cwiseSqrt();
    // shared factor: B = D^-1/2 M U^-1/2; geo side uses B B^T, activity B^T B
    const Eigen::MatrixXd half =
        sd.cwiseInverse().asDiagonal() * m.entries * su.cwiseInverse().asDiagonal();

    auto solve_side = [&](bool geo_side) {
        const Eigen::VectorXd& sqrt_deg = geo_side ? sd : su;
        const Eigen::Index n = geo_side ? half.rows() : half.cols();
        if (n < opt.dense_cutoff)
            return detail::dense_second_eigenpair(
                geo_side ? half : Eigen::MatrixXd(half.transpose()), sqrt_deg);
        auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            if (geo_side) return half * (half.transpose() * x);
            return half.transpose() * (half * x);
        };
        return detail::symmetric_second_eigenpair(apply, sqrt_deg, opt);
    };

    SecondEigenpair eg = solve_side(true);
    SecondEigenpair ea = solve_side(false);

    const bool degenerate =
        (eg.value - eg.next_value) < opt.degeneracy_gap || (ea.value - ea.next_value) < opt.degeneracy_gap;

    ScoreVector eci;
    eci.axis = Axis::Geo;
    eci.ids = m.geos;
    eci.method = Method::Eci;
    eci.normalization = Normalization::Standardized;
    eci.values = standardize(eg.vector);
    if (correlation(eci.values, deg.diversification) < 0.0) eci.values = -eci.values;
    eci.non_unique = degenerate;
    eci.convergence = {eg.iterations, 0.0, eg.converged, -1};

    ScoreVector pci;
    pci.axis = Axis::Activity;
    pci.ids = m.activities;
    pci.method = Method::Pci;
    pci.normalization = Normalization::Standardized;
    pci.values = standardize(ea.vector);
    if (correlation(pci.values, deg.ubiquity) > 0.0) pci.values = -pci.values;
    pci.non_unique = degenerate;
    pci.convergence = {ea.iterations, 0.0, ea.converged, -1};

    if (!eg.converged || !ea.converged)
        throw convergence_error("eci: power iteration did not converge within " +
                                std::to_string(opt.max_iter) + " iterations");
    return {std::move(eci), std::move(pci)};
}

}  // namespace ecx

#endif  // ECX_ECI_HPP
