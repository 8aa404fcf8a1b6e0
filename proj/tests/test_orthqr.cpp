#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>

#include "hrom/orthqr.hpp"
#include "support/oracles.hpp"

using namespace hrom;

namespace
{

constexpr double eps = std::numeric_limits<double>::epsilon();

double orthogonality(const Mat<double>& Q)
{
    return (Q.transpose() * Q - Mat<double>::Identity(Q.cols(), Q.cols())).norm();
}

bool upper_with_positive_diagonal(const Mat<double>& R)
{
    for (Index j = 0; j < R.cols(); ++j)
        for (Index i = j + 1; i < R.rows(); ++i)
            if (R(i, j) != 0)
                return false;
    return (R.diagonal().array() > 0).all();
}

} // namespace

TEST_CASE("identity input")
{
    const auto qr = shifted_cholqr(Mat<double>::Identity(4, 4).eval());
    CHECK(qr.Q == Mat<double>::Identity(4, 4));
    CHECK(qr.R == Mat<double>::Identity(4, 4));
}

TEST_CASE("well-conditioned tall matrix")
{
    std::mt19937_64 rng(1);
    const Mat<double> Y = oracle::gaussian(rng, 64, 8);
    const auto qr = shifted_cholqr(Y);
    CHECK(orthogonality(qr.Q) < eps * std::sqrt(8.0) * 10);
    CHECK((qr.Q * qr.R - Y).norm() / Y.norm() < 50 * eps);
    CHECK(upper_with_positive_diagonal(qr.R));
}

TEST_CASE("nearly dependent columns take the shifted path")
{
    std::mt19937_64 rng(2);
    const Mat<double> v = oracle::gaussian(rng, 50, 1);
    const Mat<double> w = oracle::gaussian(rng, 50, 1);
    Mat<double> Y(50, 2);
    Y << v, v + 1e-7 * w;
    const auto qr = shifted_cholqr(Y);
    CHECK(orthogonality(qr.Q) < 1e-4);
    CHECK((qr.Q * qr.R - Y).norm() / Y.norm() < 1e-4);

    // Same factorization as Householder QR with a positive diagonal.
    Eigen::HouseholderQR<Mat<double>> ref(Y);
    Mat<double> R = ref.matrixQR().topRows(2).triangularView<Eigen::Upper>();
    for (Index i = 0; i < 2; ++i)
        if (R(i, i) < 0)
            R.row(i) *= -1;
    CHECK((qr.R - R).norm() / R.norm() < 1e-4);
}

TEST_CASE("ill-conditioned inputs up to cond 1e6")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial)
    {
        const Index k = 2 + static_cast<Index>(rng() % 20);
        const Index rows = k + static_cast<Index>(rng() % 200);
        Vec<double> sigma(k);
        for (Index j = 0; j < k; ++j)
            sigma(j) = std::pow(1e-6, static_cast<double>(j) / static_cast<double>(k - 1));
        const Mat<double> Y = oracle::with_spectrum(rng, rows, k, sigma);
        const auto qr = shifted_cholqr(Y);
        CHECK(orthogonality(qr.Q) < 100 * eps * std::sqrt(double(k)));
        CHECK((qr.Q * qr.R - Y).norm() < 100 * eps * Y.norm() * std::sqrt(double(k)));
        CHECK(upper_with_positive_diagonal(qr.R));
    }
}

TEST_CASE("invalid input")
{
    CHECK_THROWS_AS(shifted_cholqr(Mat<double>::Zero(10, 3).eval()), rank_deficiency_error);
    CHECK_THROWS_AS(shifted_cholqr(Mat<double>::Ones(2, 3).eval()), shape_error);
}

TEST_CASE("update with a canonical basis vector")
{
    QRPair<double> qr{Mat<double>::Identity(4, 2), Mat<double>::Identity(2, 2)};
    const Mat<double> e3 = Mat<double>::Identity(4, 4).col(2);
    const auto grown = cholqr_update(qr, e3);
    CHECK(grown.Q == Mat<double>::Identity(4, 3));
    CHECK(grown.R == Mat<double>::Identity(3, 3));
}

TEST_CASE("update reconstructs the concatenated matrix")
{
    std::mt19937_64 rng(4);
    const Mat<double> Y = oracle::gaussian(rng, 64, 8);
    const Mat<double> Yb = oracle::gaussian(rng, 64, 4);
    const auto grown = cholqr_update(shifted_cholqr(Y), Yb);
    Mat<double> full(64, 12);
    full << Y, Yb;
    CHECK(orthogonality(grown.Q) < 100 * eps * std::sqrt(12.0));
    CHECK((grown.Q * grown.R - full).norm() <= 100 * eps * full.norm());
    CHECK(upper_with_positive_diagonal(grown.R));

    // With positive diagonals the factorization is unique.
    const auto direct = shifted_cholqr(full);
    CHECK((grown.R - direct.R).norm() / direct.R.norm() < 1e-12);
}

TEST_CASE("update of a small rational example is exactly orthogonal")
{
    Mat<double> Y(6, 2);
    Y << 1, 1, 1, -1, 1, 1, 1, -1, 0, 0, 0, 0;
    QRPair<double> qr{0.5 * Y, 2 * Mat<double>::Identity(2, 2)};
    Mat<double> Yb = Mat<double>::Zero(6, 1);
    Yb(4, 0) = 3;
    const auto grown = cholqr_update(qr, Yb);
    CHECK(grown.Q.transpose() * grown.Q == Mat<double>::Identity(3, 3));
}

TEST_CASE("update inside the current range is rank deficient")
{
    std::mt19937_64 rng(5);
    const auto qr = shifted_cholqr(oracle::gaussian(rng, 30, 4));
    const Mat<double> inside = qr.Q * oracle::gaussian(rng, 4, 2);
    CHECK_THROWS_AS(cholqr_update(qr, inside), rank_deficiency_error);
}

TEST_CASE("repeated updates stay orthogonal")
{
    std::mt19937_64 rng(6);
    Vec<double> sigma(40);
    for (Index j = 0; j < 40; ++j)
        sigma(j) = std::pow(0.7, static_cast<double>(j));
    const Mat<double> X = oracle::with_spectrum(rng, 200, 40, sigma);
    auto qr = shifted_cholqr(X.leftCols(8).eval());
    for (Index c = 8; c < 40; c += 8)
        qr = cholqr_update(qr, X.middleCols(c, 8));
    CHECK(orthogonality(qr.Q) < 100 * eps * std::sqrt(40.0));
    CHECK((qr.Q * qr.R - X).norm() <= 100 * eps * X.norm() * std::sqrt(40.0));
}
