#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ecx/eci.hpp"
#include "ecx/fitness.hpp"
#include "ecx/reflections.hpp"
#include "oracles.hpp"

using namespace ecx;

namespace {

constexpr double kSqrt32 = 1.224744871391589;  // sqrt(3/2)

double sup_diff_up_to_sign(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::min((a - b).lpNorm<Eigen::Infinity>(), (a + b).lpNorm<Eigen::Infinity>());
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

// Dense reference for the ECI eigenproblem: form the row-stochastic
// transition matrix explicitly and hand it to a general eigensolver.
Eigen::VectorXd reference_second_eigvec(const Eigen::MatrixXd& t) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(t);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(t.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
    });
    return es.eigenvectors().col(idx[1]).real();
}

Eigen::MatrixXd transition_geo(const Eigen::MatrixXd& m) {
    const Eigen::VectorXd d = m.rowwise().sum(), u = m.colwise().sum();
    return d.cwiseInverse().asDiagonal() * m * u.cwiseInverse().asDiagonal() * m.transpose();
}

}  // namespace

TEST_CASE("reflections start from the degrees and leapfrog") {
    BinaryBipartite m = oracle::to_matrix(oracle::m0());
    ReflectionsTrace tr = reflections(m, 2);
    REQUIRE(tr.geo.size() == 3);
    REQUIRE(tr.activity.size() == 3);
    CHECK((tr.geo[0] - vec({3, 2, 1})).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((tr.activity[0] - vec({3, 2, 1})).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((tr.geo[1] - vec({2.0, 2.5, 3.0})).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((tr.activity[1] - vec({2.0, 2.5, 3.0})).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((tr.geo[2] - vec({2.5, 2.25, 2.0})).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((tr.activity[2] - vec({2.5, 2.25, 2.0})).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("reflections trace agrees with the naive stepper") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const oracle::Grid g = oracle::random_grid(rng, 7, 9, 0.35);
        BinaryBipartite m = oracle::to_matrix(g);
        ReflectionsTrace tr = reflections(m, 8);

        std::vector<double> geo(oracle::row_fills(g)), act(oracle::col_fills(g));
        for (int n = 1; n <= 8; ++n) {
            auto [geo_next, act_next] = oracle::reflections_step(g, geo, act);
            for (std::size_t i = 0; i < geo_next.size(); ++i)
                CHECK(tr.geo[static_cast<std::size_t>(n)](static_cast<Eigen::Index>(i)) ==
                      doctest::Approx(geo_next[i]).epsilon(1e-13));
            for (std::size_t i = 0; i < act_next.size(); ++i)
                CHECK(tr.activity[static_cast<std::size_t>(n)](static_cast<Eigen::Index>(i)) ==
                      doctest::Approx(act_next[i]).epsilon(1e-13));
            geo = std::move(geo_next);
            act = std::move(act_next);
        }
    }
}

TEST_CASE("all-ones vectors are an exact fixed point of the averaging step") {
    std::mt19937_64 rng(12);
    const oracle::Grid g = oracle::random_grid(rng, 20, 30, 0.3);
    BinaryBipartite m = oracle::to_matrix(g);
    DegreeProfile deg = degrees(m);
    const Eigen::VectorXd ones_g = Eigen::VectorXd::Ones(m.n_geos());
    const Eigen::VectorXd ones_a = Eigen::VectorXd::Ones(m.n_activities());
    CHECK((reflect_geo(m.entries, ones_a, deg.diversification) - ones_g)
              .lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((reflect_activity(m.entries, ones_g, deg.ubiquity) - ones_a)
              .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("raw reflections iterates flatten out") {
    std::mt19937_64 rng(13);
    const oracle::Grid g = oracle::random_grid(rng, 20, 30, 0.3);
    ReflectionsTrace tr = reflections(oracle::to_matrix(g), 200);
    const Eigen::VectorXd& kg = tr.geo.back();
    const Eigen::VectorXd& ka = tr.activity.back();
    CHECK(kg.maxCoeff() - kg.minCoeff() < 1e-8);
    CHECK(ka.maxCoeff() - ka.minCoeff() < 1e-8);
}

TEST_CASE("standardized iterates have mean zero and unit variance") {
    BinaryBipartite m = oracle::to_matrix(oracle::m0());
    ReflectionsTrace tr = reflections(m, 6);
    REQUIRE(tr.geo_std.size() == tr.geo.size());
    for (std::size_t n = 0; n < tr.geo_std.size(); ++n) {
        REQUIRE(tr.geo_std_ok[n]);  // M0 iterates never go constant this early
        const Eigen::VectorXd& s = tr.geo_std[n];
        CHECK(std::abs(s.mean()) < 1e-12);
        CHECK(std::abs(s.squaredNorm() / static_cast<double>(s.size()) - 1.0) < 1e-12);
    }
}

TEST_CASE("constant iterates cannot be standardized") {
    // Biregular: all degrees equal, so the starting vectors are constant.
    BinaryBipartite m = oracle::to_matrix({{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}, {1, 0, 0, 1}});
    ReflectionsTrace tr = reflections(m, 2);
    CHECK_FALSE(tr.geo_std_ok[0]);
    CHECK(tr.geo_std[0].isZero(0.0));
    CHECK_FALSE(tr.activity_std_ok[0]);
}

TEST_CASE("reflections reject zero-degree lines") {
    CHECK_THROWS_AS(reflections(oracle::to_matrix({{1, 0}, {0, 0}}), 3), data_error);
}

TEST_CASE("ECI and PCI on the nested fixture match the closed form") {
    // The geo-side transition matrix of M0 has spectrum {1, 1/4, 1/9} with
    // second eigenvector (2, -1, -4); standardized this is
    // (sqrt(3/2), 0, -sqrt(3/2)). The activity side is identical because M0
    // is symmetric, and the PCI sign convention flips it.
    auto [eci_v, pci_v] = eci_pci(oracle::to_matrix(oracle::m0()));
    CHECK((eci_v.values - vec({kSqrt32, 0.0, -kSqrt32})).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((pci_v.values - vec({-kSqrt32, 0.0, kSqrt32})).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(eci_v.axis == Axis::Geo);
    CHECK(pci_v.axis == Axis::Activity);
    CHECK(eci_v.method == Method::Eci);
    CHECK(pci_v.method == Method::Pci);
    CHECK(eci_v.normalization == Normalization::Standardized);
    CHECK_FALSE(eci_v.non_unique);
    CHECK(eci_v.convergence.converged);
    CHECK(eci_v.ids == std::vector<std::string>{"g1", "g2", "g3"});
}

TEST_CASE("ECI agrees with a general eigensolver on the explicit matrix") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        BinaryBipartite m = oracle::to_matrix(oracle::random_grid(rng, 8, 10, 0.4));
        auto [eci_v, pci_v] = eci_pci(m);
        const Eigen::VectorXd ref_g = standardize(reference_second_eigvec(transition_geo(m.entries)));
        const Eigen::VectorXd ref_a = standardize(
            reference_second_eigvec(transition_geo(Eigen::MatrixXd(m.entries.transpose()))));
        CHECK(sup_diff_up_to_sign(eci_v.values, ref_g) < 1e-8);
        CHECK(sup_diff_up_to_sign(pci_v.values, ref_a) < 1e-8);
    }
}

TEST_CASE("ECI sign conventions follow the degree correlations") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryBipartite m = oracle::to_matrix(oracle::random_grid(rng, 9, 11, 0.35));
        DegreeProfile deg = degrees(m);
        auto [eci_v, pci_v] = eci_pci(m);
        CHECK(correlation(eci_v.values, deg.diversification) >= 0.0);
        CHECK(correlation(pci_v.values, deg.ubiquity) <= 0.0);
        CHECK(std::abs(eci_v.values.mean()) < 1e-10);
        CHECK(std::abs(pci_v.values.mean()) < 1e-10);
    }
}

TEST_CASE("standardized even reflections iterates converge to ECI") {
    // Raw even iterates converge geometrically to a constant vector, so the
    // deviation that carries the ranking underflows after a few dozen steps
    // and standardizing a deep raw iterate amplifies rounding noise. The
    // standardized iterate itself is still well defined: the reflection map
    // is linear and fixes constants, so standardizing commutes with it and
    // re-standardizing after every even step evaluates the same vector while
    // keeping the informative deviation at unit scale.
    std::mt19937_64 rng(23);
    int accepted = 0;
    for (int trial = 0; trial < 40 && accepted < 5; ++trial) {
        BinaryBipartite m = oracle::to_matrix(oracle::random_grid(rng, 10, 12, 0.35));
        auto [eci_v, pci_v] = eci_pci(m);
        if (eci_v.non_unique) continue;
        DegreeProfile deg = degrees(m);
        bool ok = true;
        Eigen::VectorXd k = standardize(deg.diversification, &ok);
        if (!ok) continue;
        bool settled = false;
        for (int step = 0; step < 5000 && !settled; ++step) {
            Eigen::VectorXd next = standardize(
                reflect_geo(m.entries, reflect_activity(m.entries, k, deg.ubiquity),
                            deg.diversification),
                &ok);
            if (!ok) break;
            settled = sup_diff_up_to_sign(next, k) < 1e-12;
            k = next;
        }
        if (!settled) continue;  // slow spectral gap
        ++accepted;
        CHECK(sup_diff_up_to_sign(k, eci_v.values) < 1e-7);
    }
    CHECK(accepted >= 3);
}

TEST_CASE("a degenerate second eigenvalue is flagged") {
    // Three isolated geo-activity pairs: the transition matrix is the
    // identity, every eigenvalue is 1 and the second eigenvector is
    // arbitrary.
    auto [eci_v, pci_v] = eci_pci(oracle::to_matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
    CHECK(eci_v.non_unique);
    CHECK(pci_v.non_unique);
}

TEST_CASE("ECI needs two rows on each side") {
    CHECK_THROWS_AS(eci_pci(oracle::to_matrix({{1, 1}})), data_error);
}

TEST_CASE("deflated power iteration matches the dense path") {
    std::mt19937_64 rng(24);
    BinaryBipartite m = oracle::to_matrix(oracle::random_grid(rng, 20, 30, 0.3));
    auto dense = eci_pci(m);
    EciOptions opt;
    opt.dense_cutoff = 1;  // force the iterative path on both sides
    auto iterative = eci_pci(m, opt);
    CHECK(sup_diff_up_to_sign(dense.first.values, iterative.first.values) < 1e-6);
    CHECK(sup_diff_up_to_sign(dense.second.values, iterative.second.values) < 1e-6);
}

TEST_CASE("fitness keeps both means at one on every iteration") {
    std::mt19937_64 rng(31);
    std::vector<oracle::Grid> grids{oracle::m0()};
    for (int trial = 0; trial < 5; ++trial) grids.push_back(oracle::random_grid(rng, 8, 12, 0.35));
    for (const oracle::Grid& g : grids) {
        FitnessOptions opt;
        opt.record_means = true;
        opt.max_iter = 500;
        FitnessResult r = fitness_complexity(oracle::to_matrix(g), opt);
        REQUIRE_FALSE(r.f_means.empty());
        for (double mean : r.f_means) CHECK(std::abs(mean - 1.0) < 1e-12);
        for (double mean : r.q_means) CHECK(std::abs(mean - 1.0) < 1e-12);
    }
}

TEST_CASE("fitness iterates match the naive oracle while far from the floor") {
    FitnessOptions opt;
    opt.tol = 1e-300;  // never satisfied: run exactly max_iter iterations
    opt.max_iter = 15;
    FitnessResult r = fitness_complexity(oracle::to_matrix(oracle::m0()), opt);
    oracle::EfcOracle ref = oracle::efc(oracle::m0(), 15);
    for (Eigen::Index g = 0; g < 3; ++g)
        CHECK(r.fitness.values(g) ==
              doctest::Approx(ref.f[static_cast<std::size_t>(g)]).epsilon(1e-12));
    for (Eigen::Index a = 0; a < 3; ++a)
        CHECK(r.complexity.values(a) ==
              doctest::Approx(ref.q[static_cast<std::size_t>(a)]).epsilon(1e-12));
    CHECK_FALSE(r.fitness.convergence.converged);
    CHECK_FALSE(r.fitness.warnings.empty());
}

TEST_CASE("nested fixture ranks match the fixed-point oracle") {
    // On a strictly nested matrix the weak components decay harmonically, so
    // the run ends at the iteration cap with the non-convergence flag; the
    // rankings freeze long before that.
    FitnessOptions opt;
    opt.max_iter = 20000;
    FitnessResult r = fitness_complexity(oracle::to_matrix(oracle::m0()), opt);
    CHECK_FALSE(r.fitness.convergence.converged);
    CHECK(r.fitness.convergence.iterations == 20000);
    CHECK(r.fitness.convergence.ranks_stable_since == -1);
    CHECK_FALSE(r.fitness.warnings.empty());

    oracle::EfcOracle ref = oracle::efc(oracle::m0(), 200);
    std::vector<double> f(r.fitness.values.data(), r.fitness.values.data() + 3);
    std::vector<double> q(r.complexity.values.data(), r.complexity.values.data() + 3);
    CHECK(oracle::ranks(f) == oracle::ranks(ref.f));
    CHECK(oracle::ranks(q) == oracle::ranks(ref.q));
    CHECK(oracle::ranks(f) == std::vector<int>{1, 2, 3});   // g1 > g2 > g3
    CHECK(oracle::ranks(q) == std::vector<int>{3, 2, 1});   // a3 > a2 > a1
}

TEST_CASE("the all-ones matrix sits exactly at the fixed point") {
    FitnessResult r = fitness_complexity(oracle::to_matrix({{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}));
    CHECK((r.fitness.values - Eigen::VectorXd::Ones(3)).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((r.complexity.values - Eigen::VectorXd::Ones(4)).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK(r.fitness.convergence.converged);
    CHECK(r.fitness.convergence.residual == 0.0);
    // Rankings never move, so the run ends when the stability window fills.
    CHECK(r.fitness.convergence.iterations == FitnessOptions{}.rank_stability_window);
    CHECK(r.fitness.convergence.ranks_stable_since == 1);
}

TEST_CASE("converged runs report a full rank-stability window") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        FitnessResult r =
            fitness_complexity(oracle::to_matrix(oracle::random_grid(rng, 12, 16, 0.4)));
        REQUIRE(r.fitness.convergence.converged);
        CHECK(r.fitness.convergence.ranks_stable_since >= 1);
        CHECK(r.fitness.convergence.iterations - r.fitness.convergence.ranks_stable_since + 1 >=
              FitnessOptions{}.rank_stability_window);
        CHECK(r.fitness.convergence.residual < FitnessOptions{}.tol);
    }
}

TEST_CASE("fitness is equivariant under geo permutations") {
    std::mt19937_64 rng(33);
    const oracle::Grid g = oracle::random_grid(rng, 10, 14, 0.4);
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Grid shuffled(g.size());
    for (std::size_t r = 0; r < g.size(); ++r) shuffled[r] = g[perm[r]];

    FitnessOptions opt;
    opt.tol = 1e-13;
    FitnessResult base = fitness_complexity(oracle::to_matrix(g), opt);
    FitnessResult moved = fitness_complexity(oracle::to_matrix(shuffled), opt);
    for (std::size_t r = 0; r < g.size(); ++r)
        CHECK(moved.fitness.values(static_cast<Eigen::Index>(r)) ==
              doctest::Approx(base.fitness.values(static_cast<Eigen::Index>(perm[r])))
                  .epsilon(1e-9));
    CHECK((base.complexity.values - moved.complexity.values).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("a geo holding a superset of activities is at least as fit") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 5; ++trial) {
        oracle::Grid g = oracle::random_grid(rng, 8, 12, 0.35);
        for (std::size_t c = 0; c < g[0].size(); ++c) g[0][c] = g[0][c] | g[1][c];  // row 0 dominates row 1
        FitnessResult r = fitness_complexity(oracle::to_matrix(g));
        CHECK(r.fitness.values(0) >= r.fitness.values(1) * (1.0 - 1e-12));
    }
}

TEST_CASE("dummy scaling is invariant under row permutations") {
    std::mt19937_64 rng(35);
    const oracle::Grid g = oracle::random_grid(rng, 8, 10, 0.4);
    oracle::Grid reversed(g.rbegin(), g.rend());

    FitnessOptions opt;
    opt.scale = FitnessScale::Dummy;
    FitnessResult base = fitness_complexity(oracle::to_matrix(g), opt);
    FitnessResult moved = fitness_complexity(oracle::to_matrix(reversed), opt);
    CHECK(base.fitness.normalization == Normalization::DummyReferenced);
    CHECK_FALSE(base.fitness.reference_id.empty());
    REQUIRE(base.fitness.size() == g.size());  // the dummy itself is not reported
    const Eigen::Index n = static_cast<Eigen::Index>(g.size());
    for (Eigen::Index r = 0; r < n; ++r)
        CHECK(moved.fitness.values(n - 1 - r) ==
              doctest::Approx(base.fitness.values(r)).epsilon(1e-9));
}

TEST_CASE("fitness validates its options and inputs") {
    BinaryBipartite m = oracle::to_matrix(oracle::m0());
    FitnessOptions bad_tol;
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(fitness_complexity(m, bad_tol), config_error);
    FitnessOptions bad_iter;
    bad_iter.max_iter = 0;
    CHECK_THROWS_AS(fitness_complexity(m, bad_iter), config_error);
    CHECK_THROWS_AS(fitness_complexity(oracle::to_matrix({{1, 0}, {0, 0}})), data_error);
}

TEST_CASE("activities above the complexity cap are reported") {
    FitnessOptions opt;
    opt.max_iter = 200;
    opt.extremal_cap = 1.0;
    FitnessResult r = fitness_complexity(oracle::to_matrix(oracle::m0()), opt);
    // Mean-one complexity with a collapsing low end pushes a3 far above 1.
    CHECK(std::find(r.complexity.extremal_ids.begin(), r.complexity.extremal_ids.end(), "a3") !=
          r.complexity.extremal_ids.end());
    CHECK(std::find(r.complexity.extremal_ids.begin(), r.complexity.extremal_ids.end(), "a1") ==
          r.complexity.extremal_ids.end());
}

TEST_CASE("exogenous fitness sums reference complexities over specializations") {
    BinaryBipartite m = oracle::to_matrix(oracle::m0());

    ScoreVector ref;
    ref.axis = Axis::Activity;
    ref.ids = {"a1", "a2", "a3"};
    ref.values = Eigen::VectorXd::Ones(3);
    ScoreVector f = exogenous_fitness(m, ref);
    CHECK((f.values - vec({1.5, 1.0, 0.5})).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK(f.method == Method::ExogenousFitness);
    CHECK(f.normalization == Normalization::MeanOne);
    CHECK(f.warnings.empty());

    SUBCASE("activities without a reference score are dropped with a warning") {
        ref.ids = {"a1", "a2"};
        ref.values = Eigen::VectorXd::Ones(2);
        ScoreVector partial = exogenous_fitness(m, ref);
        CHECK((partial.values - vec({1.2, 1.2, 0.6})).lpNorm<Eigen::Infinity>() < 1e-15);
        CHECK(partial.warnings.size() == 1);
    }
    SUBCASE("a disjoint reference is an error") {
        ref.ids = {"b1", "b2", "b3"};
        CHECK_THROWS_AS(exogenous_fitness(m, ref), data_error);
    }
    SUBCASE("geo-axis references are rejected") {
        ref.axis = Axis::Geo;
        CHECK_THROWS_AS(exogenous_fitness(m, ref), config_error);
    }
}

TEST_CASE("sectoral fitness restricts the sum to the subset") {
    BinaryBipartite m = oracle::to_matrix(oracle::m0());
    FitnessOptions opt;
    opt.max_iter = 200;
    FitnessResult full = fitness_complexity(m, opt);

    ScoreVector s = sectoral_fitness(m, full.complexity, {false, false, true}, "green");
    CHECK((s.values - vec({3.0, 0.0, 0.0})).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(s.method == Method::SectoralFitness);
    CHECK(s.subset_name == "green");
    CHECK(s.warnings.empty());

    CHECK_THROWS_AS(sectoral_fitness(m, full.complexity, {true, false}, "bad"), config_error);
    CHECK_THROWS_AS(sectoral_fitness(m, full.complexity, {false, false, false}, "none"),
                    data_error);
}
