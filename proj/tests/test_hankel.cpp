#include "doctest.h"

#include <random>
#include <vector>

#include "hrom/core.hpp"
#include "hrom/hankel.hpp"
#include "support/oracles.hpp"

using namespace hrom;

namespace
{

MarkovSequence<double> random_sequence(std::mt19937_64& rng, Index n, Index p, Index m)
{
    std::vector<Mat<double>> samples;
    for (Index t = 0; t < n; ++t)
        samples.push_back(oracle::gaussian(rng, p, m));
    return MarkovSequence<double>(std::move(samples));
}

double relative(const Mat<double>& a, const Mat<double>& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

} // namespace

TEST_CASE("two-by-two siso hankel products")
{
    std::vector<Mat<double>> samples;
    for (const double v : {9.0, 1.0, 2.0, 3.0})
        samples.push_back(Mat<double>::Constant(1, 1, v));
    const HankelOperator<double> op{MarkovSequence<double>(samples)};
    REQUIRE(op.rows() == 2);
    REQUIRE(op.cols() == 2);

    const Mat<double> y = op.apply(Mat<double>::Ones(2, 1));
    CHECK(y(0, 0) == doctest::Approx(3));
    CHECK(y(1, 0) == doctest::Approx(5));

    Mat<double> e1 = Mat<double>::Zero(2, 1);
    e1(0, 0) = 1;
    const Mat<double> x = op.apply_transpose(e1);
    CHECK(x(0, 0) == doctest::Approx(1));
    CHECK(x(1, 0) == doctest::Approx(2));

    CHECK(op.frobenius_norm() == doctest::Approx(std::sqrt(18.0)));
}

TEST_CASE("zero blocks and zero data")
{
    std::mt19937_64 rng(1);
    const HankelOperator<double> op(random_sequence(rng, 20, 2, 3));
    CHECK(op.apply(Mat<double>::Zero(op.cols(), 3)).norm() == 0);
    CHECK(op.apply_transpose(Mat<double>::Zero(op.rows(), 2)).norm() == 0);

    const HankelOperator<double> zero(MarkovSequence<double>::zeros(16, 2, 2));
    CHECK(zero.frobenius_norm() == 0);
}

TEST_CASE("shape errors")
{
    std::mt19937_64 rng(2);
    const HankelOperator<double> op(random_sequence(rng, 16, 2, 3));
    CHECK_THROWS_AS(op.apply(Mat<double>::Zero(op.cols() + 1, 1)), shape_error);
    CHECK_THROWS_AS(op.apply_transpose(Mat<double>::Zero(op.rows() - 1, 1)), shape_error);
}

TEST_CASE("fft products agree with the dense hankel matrix")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial)
    {
        const Index p = 1 + static_cast<Index>(rng() % 3);
        const Index m = 1 + static_cast<Index>(rng() % 3);
        const Index s = 1 + static_cast<Index>(rng() % 16);
        const Index n = 2 * s + static_cast<Index>(rng() % 2);
        const auto h = random_sequence(rng, n, p, m);
        const HankelOperator<double> op(h);
        REQUIRE(op.blocks() == s);
        const Mat<double> H = oracle::dense_hankel(h, s);
        const Index k = 1 + static_cast<Index>(rng() % 4);
        const Mat<double> X = oracle::gaussian(rng, m * s, k);
        const Mat<double> Y = oracle::gaussian(rng, p * s, k);
        CHECK(relative(op.apply(X), H * X) < 1e-12);
        CHECK(relative(op.apply_transpose(Y), H.transpose() * Y) < 1e-12);
        CHECK(op.frobenius_norm() == doctest::Approx(H.norm()).epsilon(1e-12));
    }
}

TEST_CASE("adjoint identity")
{
    std::mt19937_64 rng(4);
    const HankelOperator<double> op(random_sequence(rng, 64, 3, 2));
    for (int trial = 0; trial < 100; ++trial)
    {
        const Mat<double> x = oracle::gaussian(rng, op.cols(), 1);
        const Mat<double> y = oracle::gaussian(rng, op.rows(), 1);
        const double lhs = op.apply(x).col(0).dot(y.col(0));
        const double rhs = x.col(0).dot(op.apply_transpose(y).col(0));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + x.norm() * y.norm()));
    }
}

TEST_CASE("frobenius norm and weighted norm")
{
    std::mt19937_64 rng(5);
    const auto h = random_sequence(rng, 41, 2, 3);
    const HankelOperator<double> op(h);
    const double lhs = op.frobenius_norm() * op.frobenius_norm() + h[0].squaredNorm();
    const double rhs = weighted_h2_norm(h) * weighted_h2_norm(h);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("single precision operator")
{
    std::mt19937_64 rng(6);
    const auto h = random_sequence(rng, 32, 2, 2);
    const HankelOperator<float> op(h.cast<float>());
    const Mat<double> H = oracle::dense_hankel(h, 16);
    const Mat<double> X = oracle::gaussian(rng, op.cols(), 3);
    const Mat<double> Y = op.apply(X.cast<float>()).cast<double>();
    CHECK(relative(Y, H * X) < 1e-5);
}

TEST_CASE("operator dimensions at full scale")
{
    // Only the dimension bookkeeping is exercised at this size.
    const Index p = 64, m = 1089, s = 1024;
    CHECK(p * s == 65536);
    CHECK(m * s == 1115136);
    const HankelOperator<float> op(MarkovSequence<float>::zeros(2 * s, 2, 3));
    CHECK(op.rows() == 2 * s);
    CHECK(op.cols() == 3 * s);
    CHECK(op.fft_length() >= 2 * s);
}
