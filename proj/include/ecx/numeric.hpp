#ifndef ECX_NUMERIC_HPP
#define ECX_NUMERIC_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace ecx {

// Neumaier-compensated accumulator.  Used wherever a sum feeds a contract
// with a 1e-12 tolerance (mass conservation, mean-one checks) and wherever
// reduction order must not leak into results.
class CompensatedSum {
public:
    void add(double value) {
        double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value))
            comp_ += (sum_ - t) + value;
        else
            comp_ += (value - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

template <typename Derived>
double compensated_total(const Eigen::DenseBase<Derived>& v) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc.add(static_cast<double>(v.derived()(i)));
    return acc.value();
}

// Rescales to mean one.  A zero (or non-finite) mean leaves the vector
// unchanged and reports false.
template <typename Scalar>
bool mean_one_normalize(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
    if (v.size() == 0) return false;
    Scalar mean = compensated_total(v) / static_cast<Scalar>(v.size());
    if (!(std::isfinite(mean)) || mean == Scalar(0)) return false;
    v /= mean;
    return true;
}

// Mean 0, population variance 1.  Constant vectors cannot be standardized:
// the result is all zeros and the return value is false.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> standardize(
    const Eigen::MatrixBase<Derived>& v, bool* ok = nullptr) {
    using Scalar = typename Derived::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Vec out = v.derived();
    if (out.size() == 0) {
        if (ok) *ok = false;
        return out;
    }
    Scalar mean = compensated_total(out) / static_cast<Scalar>(out.size());
    out.array() -= mean;
    Scalar var = out.squaredNorm() / static_cast<Scalar>(out.size());
    Scalar sd = std::sqrt(var);
    if (sd <= Scalar(0) || !std::isfinite(sd)) {
        if (ok) *ok = false;
        return Vec::Zero(out.size());
    }
    out /= sd;
    if (ok) *ok = true;
    return out;
}

// Pearson correlation; 0 when either side is constant.
template <typename DerivedA, typename DerivedB>
double correlation(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    Eigen::VectorXd x = a.derived().template cast<double>();
    Eigen::VectorXd y = b.derived().template cast<double>();
    const double n = static_cast<double>(x.size());
    if (n == 0) return 0.0;
    x.array() -= x.mean();
    y.array() -= y.mean();
    double sx = x.norm(), sy = y.norm();
    if (sx == 0.0 || sy == 0.0) return 0.0;
    return x.dot(y) / (sx * sy);
}

// Indices ordered by descending value; ties keep original index order.
inline std::vector<Eigen::Index> ranking(const Eigen::VectorXd& v) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return v(a) > v(b); });
    return idx;
}

// Competition ranks (1 = largest value), deterministic under ties.
inline std::vector<int> ranks_of(const Eigen::VectorXd& v) {
    auto order = ranking(v);
    std::vector<int> rank(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        rank[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) + 1;
    return rank;
}

}  // namespace ecx

#endif  // ECX_NUMERIC_HPP
