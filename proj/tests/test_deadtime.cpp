#include "doctest.h"

#include <random>
#include <vector>

#include "hrom/core.hpp"
#include "hrom/deadtime.hpp"
#include "hrom/synth.hpp"
#include "support/oracles.hpp"

using namespace hrom;

namespace
{

MarkovSequence<double> siso(const std::vector<double>& values)
{
    std::vector<Mat<double>> h;
    for (const double v : values)
        h.push_back(Mat<double>::Constant(1, 1, v));
    return MarkovSequence<double>(std::move(h));
}

IndexMatrix grid(Index p, Index m, std::initializer_list<Index> values)
{
    IndexMatrix out(p, m);
    auto it = values.begin();
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j)
            out(i, j) = *it++;
    return out;
}

} // namespace

TEST_CASE("mode names")
{
    CHECK(to_string(DeadTimeMode::least_common) == "least-common");
    CHECK(parse_dead_time_mode("lc") == DeadTimeMode::least_common);
    CHECK(parse_dead_time_mode("dts") == DeadTimeMode::dts);
    CHECK(parse_dead_time_mode("none") == DeadTimeMode::none);
    CHECK_THROWS_AS(parse_dead_time_mode("fastest"), invalid_argument_error);
}

TEST_CASE("onset detection")
{
    CHECK(estimate_delays(siso({0, 0, 0, 1, 0.5}), 0.1)(0, 0) == 3);
    CHECK(estimate_delays(siso({1, 0, 0}), 0.1)(0, 0) == 0);

    const auto silent = estimate_delays(siso({0, 0, 0, 0}), 0.1);
    CHECK(silent(0, 0) == 4);
    CHECK(silent.silent()(0, 0));

    CHECK_THROWS_AS(estimate_delays(siso({1, 0}), 0.0), invalid_argument_error);
    CHECK_THROWS_AS(estimate_delays(siso({1, 0}), 1.0), invalid_argument_error);
}

TEST_CASE("onsets of synthetic free-field data")
{
    SynthConfig config;
    config.inputs = 5;
    config.outputs = 3;
    config.samples = 2048;
    config.seed = 3;
    const auto data = synthesize(config);
    const auto delays = estimate_delays(data.h, 0.05);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 5; ++j)
        {
            const double exact = config.sample_rate * data.distance(i, j) / speed_of_sound;
            CHECK(std::abs(static_cast<double>(delays(i, j)) - std::floor(exact)) <= 1);
        }
}

TEST_CASE("lp layout")
{
    const auto lp = make_dts_lp(grid(2, 3, {1, 2, 3, 4, 5, 6}));
    REQUIRE(lp.F.rows() == 6);
    REQUIRE(lp.F.cols() == 5);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 2; ++i)
        {
            const Index row = j * 2 + i;
            CHECK(lp.F.row(row).sum() == 2);
            CHECK(lp.F(row, i) == 1);
            CHECK(lp.F(row, 2 + j) == 1);
        }
    CHECK(lp.rhs(1) == 4);
    CHECK(lp.rhs(2) == 2);
}

TEST_CASE("dts examples")
{
    SUBCASE("all zero")
    {
        const auto spec = solve_dts(DelayMatrix(IndexMatrix::Zero(2, 3)));
        CHECK(spec.total_extracted() == 0);
    }
    SUBCASE("two by two")
    {
        const IndexMatrix delta = grid(2, 2, {2, 3, 4, 5});
        const auto spec = solve_dts(DelayMatrix(delta));
        CHECK(spec.total_extracted() == 7);
        CHECK(spec.total_residual() == 0);
        CHECK(spec.residual == residual_delays(delta, spec.tau, spec.theta));
    }
    SUBCASE("siso ties go to the input")
    {
        const auto spec = solve_dts(DelayMatrix(grid(1, 1, {5})));
        CHECK(spec.tau(0) == 5);
        CHECK(spec.theta(0) == 0);
    }
}

TEST_CASE("dts agrees with enumeration on random grids")
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 2000; ++trial)
    {
        const Index p = 1 + static_cast<Index>(rng() % 3);
        const Index m = 1 + static_cast<Index>(rng() % 3);
        IndexMatrix delta(p, m);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < m; ++j)
                delta(i, j) = static_cast<Index>(rng() % 7);
        const auto spec = solve_dts(DelayMatrix(delta));
        CHECK(spec.total_extracted() == oracle::dts_optimum(delta));
        CHECK((spec.residual.array() >= 0).all());
        CHECK(spec.residual == residual_delays(delta, spec.tau, spec.theta));
    }
}

TEST_CASE("residual dominance dts <= least common <= none")
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 500; ++trial)
    {
        const Index p = 1 + static_cast<Index>(rng() % 5);
        const Index m = 1 + static_cast<Index>(rng() % 5);
        IndexMatrix delta(p, m);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < m; ++j)
                delta(i, j) = static_cast<Index>(rng() % 40);
        const DelayMatrix d(delta);
        const Index dts = solve_dts(d).total_residual();
        const Index lc = solve_least_common(d).total_residual();
        const Index none = split_dead_times(d, DeadTimeMode::none).total_residual();
        CHECK(dts <= lc);
        CHECK(lc <= none);
        CHECK(none == delta.sum());
    }
}

TEST_CASE("least common dead time")
{
    const auto spec = solve_least_common(DelayMatrix(grid(2, 2, {2, 3, 4, 5})));
    CHECK(spec.theta == IndexVector::Constant(2, 2));
    CHECK(spec.tau == IndexVector::Zero(2));

    const auto wide = solve_least_common(DelayMatrix(grid(3, 2, {4, 5, 6, 7, 8, 9})));
    CHECK(wide.tau == IndexVector::Constant(2, 4));
    CHECK(wide.theta == IndexVector::Zero(3));

    const auto zero = solve_least_common(DelayMatrix(grid(2, 2, {0, 3, 4, 5})));
    CHECK(zero.total_extracted() == 0);
}

TEST_CASE("silent channels are capped")
{
    IndexMatrix delta = grid(2, 2, {3, 4, 100, 5});
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> silent(2, 2);
    silent << false, false, true, false;
    const DelayMatrix d(delta, silent);
    CHECK(capped_delays(d)(1, 0) == 5);
    const auto spec = solve_dts(d);
    CHECK(spec.total_extracted() == oracle::dts_optimum(capped_delays(d)));
}

TEST_CASE("dts extracts more than least common on the semicircle geometry")
{
    SynthConfig config;
    config.inputs = 26;
    config.outputs = 8;
    config.modes = 0;
    config.samples = 1024;
    const auto data = synthesize(config);
    const DelayMatrix d(data.delta);
    const auto dts = solve_dts(d);
    const auto lc = solve_least_common(d);
    CHECK(dts.total_extracted() > lc.total_extracted());
    // The least common delay belongs to an inner-radius source: the closest
    // receiver sits at most half the array length off the centre.
    CHECK(lc.theta(0) == data.delta.minCoeff());
    const double half_array = 0.5 * 0.05 * static_cast<double>(config.outputs - 1);
    const double near = config.sample_rate * (1.0 - half_array) / speed_of_sound;
    const double inner = config.sample_rate * 1.0 / speed_of_sound;
    CHECK(static_cast<double>(lc.theta(0)) >= std::floor(near) - 1);
    CHECK(static_cast<double>(lc.theta(0)) <= inner);
}

TEST_CASE("rectify")
{
    const auto h = siso({0, 0, 0, 1, 2, 3});
    CHECK(rectify(h, DeadTimeSpec::none(1, 1)).samples() == h.samples());

    DeadTimeSpec spec = DeadTimeSpec::none(1, 1);
    spec.tau(0) = 1;
    spec.theta(0) = 2;
    const auto r = rectify(h, spec);
    REQUIRE(r.length() == 3);
    CHECK(r[0](0, 0) == 1);
    CHECK(r[1](0, 0) == 2);
    CHECK(r[2](0, 0) == 3);

    spec.tau(0) = 7;
    CHECK_THROWS_AS(rectify(h, spec), invalid_spec_error);
    CHECK_THROWS_AS(rectify(h, DeadTimeSpec::none(2, 1)), invalid_spec_error);
}

TEST_CASE("assemble")
{
    SUBCASE("feedthrough core becomes a pure delay")
    {
        const StateSpaceModel<double> core(Mat<double>(0, 0), Mat<double>(0, 1), Mat<double>(1, 0),
                                           Mat<double>::Ones(1, 1));
        DeadTimeSpec spec = DeadTimeSpec::none(1, 1);
        spec.tau(0) = 3;
        const auto model = assemble(core, spec);
        const auto h = markov_params(model, 6);
        for (Index t = 0; t < 6; ++t)
            CHECK(h[t](0, 0) == (t == 3 ? 1.0 : 0.0));

        const std::vector<double> omegas{0.1, 0.9, 2.0};
        for (const auto& G : frequency_response(model, omegas))
            CHECK(std::abs(G(0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("dense materialization matches the structured shift")
    {
        std::mt19937_64 rng(3);
        const auto core = oracle::random_stable(rng, 2, 1, 1, 0.3, 0.6);
        DeadTimeSpec spec = DeadTimeSpec::none(1, 1);
        spec.tau(0) = 1;
        spec.theta(0) = 1;
        const auto model = assemble(core, spec);
        const auto dense = dense_realization(model);
        CHECK(dense.order() == 4);
        const auto a = markov_params(dense, 20);
        const auto b = markov_params(model, 20);
        for (Index t = 0; t < 20; ++t)
            CHECK((a[t] - b[t]).norm() <= 1e-14);
    }
    SUBCASE("dense materialization of a mimo model")
    {
        std::mt19937_64 rng(4);
        const auto core = oracle::random_stable(rng, 3, 3, 2, 0.3, 0.6);
        DeadTimeSpec spec = DeadTimeSpec::none(2, 3);
        spec.tau << 0, 2, 1;
        spec.theta << 3, 0;
        const auto model = assemble(core, spec);
        const auto dense = dense_realization(model);
        CHECK(dense.order() == 3 + 3 + 3);
        const auto a = markov_params(dense, 30);
        const auto b = markov_params(model, 30);
        for (Index t = 0; t < 30; ++t)
            CHECK((a[t] - b[t]).norm() <= 1e-13);
    }
    SUBCASE("dimension mismatch")
    {
        const StateSpaceModel<double> core(Mat<double>(0, 0), Mat<double>(0, 2), Mat<double>(1, 0),
                                           Mat<double>::Ones(1, 2));
        CHECK_THROWS_AS(assemble(core, DeadTimeSpec::none(1, 1)), invalid_spec_error);
    }
}

TEST_CASE("rectify then assemble round trip")
{
    SynthConfig config;
    config.inputs = 1;
    config.outputs = 4;
    config.modes = 4;
    config.samples = 512;
    config.seed = 5;
    const auto data = synthesize(config);
    REQUIRE(data.exact_split.has_value());
    const auto& spec = *data.exact_split;
    const auto rect = rectify(data.h, spec);

    // Exact core of the rectified data: distance gains on the outputs.
    const Mat<double> gains = data.distance.cwiseInverse();
    const StateSpaceModel<double> core(data.core.A(), data.core.B(), gains * data.core.C(),
                                       gains * data.core.D());
    const auto model = assemble(core, spec);
    CHECK(relative_error_db(data.h, model) == doctest::Approx(relative_error_db(rect, core)));
    CHECK(relative_error_db(data.h, model) < -200);
}

TEST_CASE("degrees of freedom")
{
    CHECK(count_dofs(DeadTimeMode::none, 2, 1, 1, DeadTimeSpec::none(1, 1)) == 9);
    DeadTimeSpec spec = DeadTimeSpec::none(1, 1);
    spec.tau(0) = 3;
    spec.theta(0) = 2;
    CHECK(count_dofs(DeadTimeMode::dts, 2, 1, 1, spec) == 14);
    DeadTimeSpec lc = DeadTimeSpec::none(2, 3);
    lc.theta.setConstant(4);
    CHECK(count_dofs(DeadTimeMode::least_common, 0, 2, 3, lc) == 14);
}
