///
/// \file rsvd.hpp
///
/// Adaptive randomized SVD with power iterations and a leave-one-out stopping
/// rule. The range basis grows blockwise through `cholqr_update`.
///
#ifndef HROM_RSVD_HPP
#define HROM_RSVD_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "hrom/error.hpp"
#include "hrom/orthqr.hpp"
#include "hrom/types.hpp"

namespace hrom
{

template <typename Op>
concept LinearOperator = requires(const Op& op, const Mat<typename Op::Scalar>& X) {
    typename Op::Scalar;
    { op.rows() } -> std::convertible_to<Index>;
    { op.cols() } -> std::convertible_to<Index>;
    { op.apply(X) } -> std::convertible_to<Mat<typename Op::Scalar>>;
    { op.apply_transpose(X) } -> std::convertible_to<Mat<typename Op::Scalar>>;
};

///
/// ### SketchState
///
/// Raw range samples Z = X Omega and the factorization Q R of their
/// power-iterated counterparts Y.
///
template <typename T>
struct SketchState
{
    Mat<T> Z;
    Mat<T> Q;
    Mat<T> R;
    int power = 0;
    Index block = 0;
    std::uint64_t seed = 0;
    /// First column the estimate averages over. Columns before it were used
    /// to deflate the later ones and are not exchangeable with them.
    Index loo_begin = 0;

    Index width() const { return Q.cols(); }
};

///
/// Leave-one-out estimate of ||X - Q Q^T X||_F.
///
/// With [e_1 ... e_r] = R^{-T} and J = {loo_begin, ..., r-1}:
///  - q = 0: sqrt(|J|^{-1} sum_{j in J} ||e_j||^{-2});
///  - q > 0: t_j = e_j / ||e_j||, d_j = t_j^T Q^T z_j and
///    |J|^{-1/2} ||(Z - Q Q^T Z + Q T diag(d))_J||_F.
///
/// Column j of Q T is the unit vector of range(Q) orthogonal to every sample
/// but the j-th, so each term is the error of the sketch without sample j,
/// measured on the independent probe z_j.
///
template <typename T>
double loo_estimate(const SketchState<T>& state)
{
    const Index r = state.R.cols();
    if (r < 1 || state.R.rows() != r)
        throw estimator_unavailable_error("LOO estimator: empty or non-square R");
    if (state.loo_begin < 0 || state.loo_begin >= r)
        throw estimator_unavailable_error("LOO estimator: no columns to average over");
    if (!state.R.allFinite() || (state.R.diagonal().array() == T(0)).any())
        throw estimator_unavailable_error("LOO estimator: R is singular");

    const Index begin = state.loo_begin;
    const Index count = r - begin;
    // Columns begin..r-1 of R^{-T}: solve R^T E = I(:, begin:r).
    const Mat<T> E = state.R.transpose().template triangularView<Eigen::Lower>().solve(
        Mat<T>::Identity(r, r).rightCols(count));
    if (!E.allFinite())
        throw estimator_unavailable_error("LOO estimator: R is numerically singular");
    const Vec<double> norms = E.colwise().norm().transpose().template cast<double>();
    if ((norms.array() == 0.0).any())
        throw estimator_unavailable_error("LOO estimator: R is numerically singular");

    if (state.power == 0)
        return std::sqrt(norms.array().square().inverse().sum() / static_cast<double>(count));

    if (state.Z.cols() != r || state.Q.cols() != r)
        throw estimator_unavailable_error("LOO estimator: Z, Q and R widths differ");
    Mat<T> Tn = E;
    for (Index j = 0; j < count; ++j)
        Tn.col(j) /= static_cast<T>(norms(j));
    const auto Zj = state.Z.rightCols(count);
    const Mat<T> QtZ = state.Q.transpose() * Zj;
    Vec<T> d(count);
    for (Index j = 0; j < count; ++j)
        d(j) = Tn.col(j).dot(QtZ.col(j));
    const Mat<T> coeffs = Tn * d.asDiagonal() - QtZ;
    Mat<T> residual = Zj;
    residual.noalias() += state.Q * coeffs;
    return static_cast<double>(residual.norm()) / std::sqrt(static_cast<double>(count));
}

struct RsvdOptions
{
    Index block = 32;
    int power = 2;
    double etol = 1e-3;
    std::uint64_t seed = 0;
    /// Optional cap on the sketch width; 0 means min(rows, cols). Reaching a
    /// user cap ends the iteration without error.
    Index max_rank = 0;
};

template <typename T>
struct RsvdResult
{
    Mat<T> U;
    Vec<T> sigma;
    Mat<T> V;
    double loo = 0;                   ///< estimate at termination
    std::vector<double> loo_history;  ///< estimate after each block
    bool capped = false;              ///< stopped at `max_rank` above tolerance
};

namespace detail
{

template <typename T>
Mat<T> gaussian_block(std::mt19937_64& rng, Index rows, Index cols)
{
    std::normal_distribution<double> normal;
    Mat<T> out(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r)
            out(r, c) = static_cast<T>(normal(rng));
    return out;
}

template <typename T>
void normalize_columns(Mat<T>& W)
{
    for (Index j = 0; j < W.cols(); ++j)
    {
        const T nrm = W.col(j).norm();
        if (nrm > T(0) && std::isfinite(nrm))
            W.col(j) /= nrm;
    }
}

template <typename T>
void project_out(Mat<T>& W, const Mat<T>& Q)
{
    for (int pass = 0; pass < 2; ++pass)
        W.noalias() -= Q * (Q.transpose() * W);
}

// (X X^T)^q Z with columnwise rescaling after every application. Rescaling
// columns leaves the normalized LOO directions unchanged.
template <LinearOperator Op>
Mat<typename Op::Scalar> power_samples(const Op& op, Mat<typename Op::Scalar> W, int power)
{
    for (int i = 0; i < power; ++i)
    {
        W = op.apply(op.apply_transpose(W));
        normalize_columns(W);
    }
    return W;
}

// Power samples for an appended block, deflated against the current basis
// after every application so the new directions are not swamped by the
// already captured dominant subspace.
template <LinearOperator Op>
Mat<typename Op::Scalar> deflated_power_samples(const Op& op, Mat<typename Op::Scalar> W,
                                                const Mat<typename Op::Scalar>& Q,
                                                int power)
{
    for (int i = 0; i < power; ++i)
    {
        W = op.apply(op.apply_transpose(W));
        project_out(W, Q);
        normalize_columns(W);
    }
    return W;
}

} // namespace detail

///
/// Adaptive randomized SVD of the operator X:
///
///     Omega = randn(cols, b), Z = X Omega, Y = (X X^T)^q Z, (Q, R) = cholqr(Y)
///     while LOO(Z, Q, R, q) > etol:
///         draw b fresh columns, extend (Q, R) with cholqr_update, append to Z
///     (Ut, Sigma, V) = svd(Q^T X),  U = Q Ut
///
/// For q > 0 the appended blocks are power-iterated with the current basis
/// projected out after every application (otherwise the new directions drown
/// in the already captured ones), and the estimate then averages over the
/// newest block only.
///
/// Gaussian columns come from a single mt19937_64 stream seeded with
/// `options.seed`, so repeated calls are bitwise reproducible. Throws
/// `tolerance_unreachable_error` if the sketch fills min(rows, cols) while
/// the estimate is still above `etol`.
///
template <LinearOperator Op>
RsvdResult<typename Op::Scalar> adaptive_rsvd(const Op& op, const RsvdOptions& options)
{
    using T = typename Op::Scalar;
    if (options.block < 1)
        throw invalid_argument_error("adaptive_rsvd: block size must be >= 1");
    if (options.power < 0)
        throw invalid_argument_error("adaptive_rsvd: power iterations must be >= 0");
    if (!(options.etol > 0))
        throw invalid_argument_error("adaptive_rsvd: tolerance must be positive");

    const Index rows = op.rows();
    const Index cols = op.cols();
    const Index limit = std::min(rows, cols);
    const Index cap = options.max_rank > 0 ? std::min(limit, options.max_rank) : limit;

    std::mt19937_64 rng(options.seed);
    SketchState<T> state;
    state.power = options.power;
    state.block = options.block;
    state.seed = options.seed;

    const Index first = std::min(options.block, cap);
    state.Z = op.apply(detail::gaussian_block<T>(rng, cols, first));
    QRPair<T> qr = shifted_cholqr(
        options.power > 0 ? detail::power_samples(op, state.Z, options.power) : state.Z);
    state.Q = std::move(qr.Q);
    state.R = std::move(qr.R);

    RsvdResult<T> result;
    double estimate = loo_estimate(state);
    result.loo_history.push_back(estimate);

    while (estimate > options.etol)
    {
        const Index width = state.width();
        if (width >= cap)
        {
            if (cap == limit)
                throw tolerance_unreachable_error(
                    estimate, "adaptive_rsvd: sketch reached full width " +
                                  std::to_string(width) + " with estimate " +
                                  std::to_string(estimate) + " > " +
                                  std::to_string(options.etol));
            result.capped = true;
            break;
        }
        const Index b = std::min(options.block, cap - width);
        const Mat<T> Z_b = op.apply(detail::gaussian_block<T>(rng, cols, b));
        const Mat<T> Y_b = options.power > 0
                               ? detail::deflated_power_samples(op, Z_b, state.Q, options.power)
                               : Z_b;

        // Deflated samples depend on every earlier column through Q, so
        // only the new block is exchangeable for the leave-one-out estimate.
        if (options.power > 0)
            state.loo_begin = width;

        QRPair<T> current{std::move(state.Q), std::move(state.R)};
        QRPair<T> grown = cholqr_update(current, Y_b);
        state.Q = std::move(grown.Q);
        state.R = std::move(grown.R);

        Mat<T> Z(rows, width + b);
        Z << state.Z, Z_b;
        state.Z = std::move(Z);

        estimate = loo_estimate(state);
        result.loo_history.push_back(estimate);
    }
    result.loo = estimate;

    // Q^T X = (X^T Q)^T; factor the tall cols x r matrix instead.
    const Mat<T> M = op.apply_transpose(state.Q);
    Eigen::BDCSVD<Mat<T>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    result.sigma = svd.singularValues();
    result.V = svd.matrixU();
    result.U = state.Q * svd.matrixV();
    return result;
}

} // namespace hrom

#endif /* HROM_RSVD_HPP */
