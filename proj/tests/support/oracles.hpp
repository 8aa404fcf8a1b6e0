///
/// \file oracles.hpp
///
/// Independent reference implementations used by the unit and acceptance
/// tests. Everything here is deliberately naive: explicit dense matrices,
/// direct recursions and exhaustive enumeration, sharing no code paths with
/// the library beyond its data types.
///
#ifndef HROM_TESTS_ORACLES_HPP
#define HROM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hrom/types.hpp"

namespace oracle
{

using hrom::Index;
using hrom::IndexMatrix;
using hrom::IndexVector;
using hrom::Mat;
using hrom::Vec;

inline Mat<double> gaussian(std::mt19937_64& rng, Index rows, Index cols)
{
    std::normal_distribution<double> normal;
    Mat<double> out(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            out(i, j) = normal(rng);
    return out;
}

/// Haar-ish random orthogonal matrix (Householder QR of a Gaussian matrix).
inline Mat<double> random_orthogonal(std::mt19937_64& rng, Index n, Index k)
{
    Eigen::HouseholderQR<Mat<double>> qr(gaussian(rng, n, k));
    return qr.householderQ() * Mat<double>::Identity(n, k);
}

/// U diag(sigma) V^T with random orthonormal U (rows x k), V (cols x k).
inline Mat<double> with_spectrum(std::mt19937_64& rng, Index rows, Index cols,
                                 const Vec<double>& sigma)
{
    const Index k = sigma.size();
    return random_orthogonal(rng, rows, k) * sigma.asDiagonal() *
           random_orthogonal(rng, cols, k).transpose();
}

///
/// Random stable system: A = W blockdiag(rotations) W^{-1} with pole radii
/// uniform in [rmin, rmax] and a well-conditioned similarity W.
///
inline hrom::StateSpaceModel<double> random_stable(std::mt19937_64& rng, Index n, Index m,
                                                   Index p, double rmin, double rmax)
{
    std::uniform_real_distribution<double> uniform;
    Mat<double> J = Mat<double>::Zero(n, n);
    Index k = 0;
    for (; k + 1 < n; k += 2)
    {
        const double rho = rmin + (rmax - rmin) * uniform(rng);
        const double w = std::numbers::pi * uniform(rng);
        J(k, k) = J(k + 1, k + 1) = rho * std::cos(w);
        J(k, k + 1) = -rho * std::sin(w);
        J(k + 1, k) = rho * std::sin(w);
    }
    if (k < n)
        J(k, k) = (uniform(rng) < 0.5 ? -1 : 1) * (rmin + (rmax - rmin) * uniform(rng));
    const Mat<double> W = random_orthogonal(rng, n, n) *
                          (Vec<double>::Ones(n) + 0.5 * Vec<double>::Random(n).cwiseAbs())
                              .asDiagonal();
    const Mat<double> A = W * J * W.inverse();
    return hrom::StateSpaceModel<double>(A, gaussian(rng, n, m), gaussian(rng, p, n),
                                         gaussian(rng, p, m));
}

/// Markov parameters by direct state recursion with unit impulses, one input
/// at a time.
inline hrom::MarkovSequence<double> simulate(const hrom::StateSpaceModel<double>& sys, Index N)
{
    std::vector<Mat<double>> h(static_cast<std::size_t>(N),
                               Mat<double>::Zero(sys.outputs(), sys.inputs()));
    for (Index j = 0; j < sys.inputs(); ++j)
    {
        Vec<double> x = Vec<double>::Zero(sys.order());
        for (Index t = 0; t < N; ++t)
        {
            const double u = t == 0 ? 1.0 : 0.0;
            h[static_cast<std::size_t>(t)].col(j) = sys.C() * x + sys.D().col(j) * u;
            x = (sys.A() * x + sys.B().col(j) * u).eval();
        }
    }
    return hrom::MarkovSequence<double>(std::move(h));
}

/// Explicit s x s block-Hankel matrix with block (a, b) = h_{a+b+1}.
template <typename T>
Mat<T> dense_hankel(const hrom::MarkovSequence<T>& h, Index s)
{
    const Index p = h.outputs();
    const Index m = h.inputs();
    Mat<T> H(p * s, m * s);
    for (Index a = 0; a < s; ++a)
        for (Index b = 0; b < s; ++b)
            H.block(a * p, b * m, p, m) = h[a + b + 1];
    return H;
}

///
/// Textbook ERA with a full dense SVD: H = U S V^T, keep r, shift-invariance
/// solved by the normal equations' pseudoinverse.
///
struct DenseEra
{
    hrom::StateSpaceModel<double> model;
    Vec<double> sigma; ///< all singular values of H
};

inline DenseEra dense_era(const hrom::MarkovSequence<double>& h, Index s, Index r)
{
    const Index p = h.outputs();
    const Index m = h.inputs();
    const Mat<double> H = dense_hankel(h, s);
    Eigen::JacobiSVD<Mat<double>> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Mat<double> U = svd.matrixU().leftCols(r);
    const Mat<double> V = svd.matrixV().leftCols(r);
    const Vec<double> root = svd.singularValues().head(r).array().sqrt();
    const Mat<double> Uf = U.topRows(p * (s - 1));
    const Mat<double> Ul = U.bottomRows(p * (s - 1));
    const Mat<double> W = Uf.completeOrthogonalDecomposition().pseudoInverse() * Ul;
    const Mat<double> A = root.cwiseInverse().asDiagonal() * W * root.asDiagonal();
    const Mat<double> B = root.asDiagonal() * V.topRows(m).transpose();
    const Mat<double> C = U.topRows(p) * root.asDiagonal();
    return {hrom::StateSpaceModel<double>(A, B, C, h[0]), svd.singularValues()};
}

/// sum_{k>=1} ||a_k - b_k||_F^2 / sum_{k>=1} ||a_k||_F^2 in dB.
inline double relative_error_db(const hrom::MarkovSequence<double>& a,
                                const hrom::MarkovSequence<double>& b)
{
    double num = 0, den = 0;
    for (Index k = 1; k < a.length(); ++k)
    {
        num += (a[k] - b[k]).squaredNorm();
        den += a[k].squaredNorm();
    }
    return 10 * std::log10(num / den);
}

///
/// Optimum of max sum(theta) + sum(tau) s.t. theta_i + tau_j <= delta_ij over
/// nonnegative integers, by enumerating theta over the box [0, min_j delta_ij]
/// and taking the largest feasible tau for each.
///
inline Index dts_optimum(const IndexMatrix& delta)
{
    const Index p = delta.rows();
    const Index m = delta.cols();
    IndexVector bound(p);
    for (Index i = 0; i < p; ++i)
        bound(i) = delta.row(i).minCoeff();
    IndexVector theta = IndexVector::Zero(p);
    Index best = -1;
    for (;;)
    {
        Index value = theta.sum();
        for (Index j = 0; j < m; ++j)
        {
            Index tau = std::numeric_limits<Index>::max();
            for (Index i = 0; i < p; ++i)
                tau = std::min(tau, delta(i, j) - theta(i));
            value += tau;
        }
        best = std::max(best, value);
        Index i = 0;
        while (i < p && theta(i) == bound(i))
            theta(i++) = 0;
        if (i == p)
            break;
        ++theta(i);
    }
    return best;
}

/// Naive DFT of a real sequence.
inline std::vector<std::complex<double>> dft(const std::vector<double>& x)
{
    const auto n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t t = 0; t < n; ++t)
            out[k] += x[t] * std::polar(1.0, -2 * std::numbers::pi * double(k * t) / double(n));
    return out;
}

} // namespace oracle

#endif /* HROM_TESTS_ORACLES_HPP */
