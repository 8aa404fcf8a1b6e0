///
/// \file orthqr.hpp
///
/// Communication-avoiding orthogonalization: iterated Cholesky QR with shift
/// recomputation, and the column update that appends a block to an existing
/// factorization without touching the old basis.
///
#ifndef HROM_ORTHQR_HPP
#define HROM_ORTHQR_HPP

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hrom/error.hpp"
#include "hrom/types.hpp"

namespace hrom
{

/// Q (rows x k, orthonormal columns) and upper-triangular R with positive
/// diagonal such that Q R reproduces the factored matrix.
template <typename T>
struct QRPair
{
    Mat<T> Q;
    Mat<T> R;
};

inline constexpr int cholqr_max_iterations = 100;
inline constexpr int cholqr_max_shifts = 5;

namespace detail
{

template <typename T>
bool try_cholesky(const Mat<T>& X, Mat<T>& R)
{
    if (!X.allFinite())
        return false;
    Eigen::LLT<Mat<T>> llt(X);
    if (llt.info() != Eigen::Success)
        return false;
    R = llt.matrixU();
    return R.allFinite() && (R.diagonal().array() > T(0)).all();
}

// Cholesky factor of X, adding sigma = 11 (rows k + k (k+1)) eps ||X||_F to
// the diagonal after each breakdown. X is updated in place with the shift.
template <typename T>
Mat<T> shifted_cholesky(Mat<T>& X, Index rows, T eps)
{
    const Index k = X.rows();
    Mat<T> R;
    for (int shifts = 0;; ++shifts)
    {
        if (try_cholesky(X, R))
            return R;
        if (shifts == cholqr_max_shifts)
            throw rank_deficiency_error("Cholesky QR: factorization failed after " +
                                        std::to_string(cholqr_max_shifts) + " shifts");
        const T sigma = T(11) * static_cast<T>(rows * k + k * (k + 1)) * eps * X.norm();
        if (!(sigma > T(0)) || !std::isfinite(sigma))
            throw rank_deficiency_error("Cholesky QR: input is numerically zero");
        X.diagonal().array() += sigma;
    }
}

// ||Q^T Q - I||_F has a rounding floor of roughly sqrt(rows) eps per entry, so
// the eps sqrt(k) target can be out of reach for tall inputs. Iteration stops
// once an extra pass no longer halves the defect and the defect sits at that
// floor.
template <typename T>
bool at_rounding_floor(T defect, T previous, Index rows, Index k, T eps)
{
    const T floor = T(4) * std::sqrt(static_cast<T>(rows)) * static_cast<T>(k) * eps;
    return defect < floor && defect > T(0.5) * previous;
}

} // namespace detail

///
/// Iterated shifted Cholesky QR of a tall matrix Y (rows >= k >= 1):
///
///     Q = Y, R = I, X = Y^T Y
///     while ||X - I||_F >= eps sqrt(k):
///         Rt = chol(X), shifting X on breakdown
///         Q = Q Rt^{-1},  R = Rt R,  X = Q^T Q
///
/// Breakdown means a non-positive pivot or a non-finite factor. Throws
/// `rank_deficiency_error` for a numerically zero input or when the shift or
/// iteration caps are exceeded.
///
template <typename Derived>
QRPair<typename Derived::Scalar>
shifted_cholqr(const Eigen::MatrixBase<Derived>& Y,
               typename Derived::Scalar eps =
                   std::numeric_limits<typename Derived::Scalar>::epsilon())
{
    using T = typename Derived::Scalar;
    const Index rows = Y.rows();
    const Index k = Y.cols();
    if (k < 1 || rows < k)
        throw shape_error("shifted_cholqr: need rows >= cols >= 1");

    QRPair<T> qr{Y, Mat<T>::Identity(k, k)};
    Mat<T> X = qr.Q.transpose() * qr.Q;
    const T target = eps * std::sqrt(static_cast<T>(k));
    T previous = std::numeric_limits<T>::infinity();

    for (int iter = 0;; ++iter)
    {
        const T defect = (X - Mat<T>::Identity(k, k)).norm();
        if (defect < target || detail::at_rounding_floor(defect, previous, rows, k, eps))
            break;
        if (iter == cholqr_max_iterations)
            throw rank_deficiency_error("shifted_cholqr: no convergence within " +
                                        std::to_string(cholqr_max_iterations) +
                                        " iterations");
        previous = defect;

        const Mat<T> Rt = detail::shifted_cholesky(X, rows, eps);
        Rt.template triangularView<Eigen::Upper>().template solveInPlace<Eigen::OnTheRight>(
            qr.Q);
        qr.R = (Rt.template triangularView<Eigen::Upper>() * qr.R).eval();
        X.noalias() = qr.Q.transpose() * qr.Q;
    }
    return qr;
}

///
/// Appends the columns Y_b to an existing factorization Q R = Y, returning
/// Qt Rt = [Q R, Y_b] with
///
///     Qt = [Q, Q_b],   Rt = [[R, B], [0, R_b]].
///
/// The new block is obtained by iterated projected Cholesky QR:
///
///     B = Q^T Y_b,  X = Y_b^T Y_b - B^T B
///     repeat: R' = chol(X) (shifted on breakdown)
///             Q_b = (Q_b - Q B) R'^{-1},  R_b = R' R_b
///             B = Q^T Q_b,  X = Q_b^T Q_b - B^T B
///     until ||Q_b^T Q_b - I||_F < eps sqrt(b) and ||Q^T Q_b||_F < eps sqrt(b)
///
/// Throws `rank_deficiency_error` when Y_b lies numerically inside range(Q).
///
template <typename T, typename Derived>
QRPair<T> cholqr_update(const QRPair<T>& qr, const Eigen::MatrixBase<Derived>& Y_b,
                        T eps = std::numeric_limits<T>::epsilon())
{
    const Index rows = qr.Q.rows();
    const Index k = qr.Q.cols();
    const Index b = Y_b.cols();
    if (Y_b.rows() != rows)
        throw shape_error("cholqr_update: Y_b must have as many rows as Q");
    if (b < 1 || k + b > rows)
        throw shape_error("cholqr_update: need 1 <= b and k + b <= rows");

    Mat<T> Q_b = Y_b;
    Mat<T> R_b = Mat<T>::Identity(b, b);
    Mat<T> B = qr.Q.transpose() * Q_b;
    Mat<T> B_total = Mat<T>::Zero(k, b);
    const Mat<T> gram = Q_b.transpose() * Q_b;
    Mat<T> X = gram - B.transpose() * B;

    const T gram_norm = gram.norm();
    if (!(X.norm() > T(10) * std::sqrt(static_cast<T>(rows)) * eps * gram_norm))
        throw rank_deficiency_error("cholqr_update: new columns lie in the span of Q");

    const T target = eps * std::sqrt(static_cast<T>(b));
    T previous = std::numeric_limits<T>::infinity();
    for (int iter = 0;; ++iter)
    {
        if (iter == cholqr_max_iterations)
            throw rank_deficiency_error("cholqr_update: no convergence within " +
                                        std::to_string(cholqr_max_iterations) +
                                        " iterations");

        const Mat<T> Rt = detail::shifted_cholesky(X, rows, eps);
        Q_b.noalias() -= qr.Q * B;
        Rt.template triangularView<Eigen::Upper>().template solveInPlace<Eigen::OnTheRight>(
            Q_b);
        // Y_b = Q B_total + Q_b R_b holds after every pass.
        B_total.noalias() += B * R_b;
        R_b = (Rt.template triangularView<Eigen::Upper>() * R_b).eval();

        B.noalias() = qr.Q.transpose() * Q_b;
        const Mat<T> G = Q_b.transpose() * Q_b;
        const T defect = std::sqrt((G - Mat<T>::Identity(b, b)).squaredNorm() +
                                   T(2) * B.squaredNorm());
        if (defect < target ||
            detail::at_rounding_floor(defect, previous, rows, k + b, eps))
            break;
        previous = defect;
        X = G - B.transpose() * B;
    }

    QRPair<T> out;
    out.Q.resize(rows, k + b);
    out.Q << qr.Q, Q_b;
    out.R = Mat<T>::Zero(k + b, k + b);
    out.R.topLeftCorner(k, k) = qr.R;
    out.R.topRightCorner(k, b) = B_total;
    out.R.bottomRightCorner(b, b) = R_b;
    return out;
}

} // namespace hrom

#endif /* HROM_ORTHQR_HPP */
