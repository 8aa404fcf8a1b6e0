///
/// \file era.hpp
///
/// Eigensystem realization from (approximate) Hankel SVD factors, a priori
/// error bounds, and the adaptive randomized ERA driver.
///
#ifndef HROM_ERA_HPP
#define HROM_ERA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "hrom/core.hpp"
#include "hrom/hankel.hpp"
#include "hrom/rsvd.hpp"
#include "hrom/types.hpp"

namespace hrom
{

///
/// Realization from the rank-r factorization H ~ U diag(sigma) V^T of the
/// s x s block-Hankel matrix (U: ps x r, V: ms x r):
///
///     A = Sigma^{-1/2} U_first^+ U_last Sigma^{1/2}
///     B = Sigma^{1/2} V(1:m, :)^T
///     C = U(1:p, :) Sigma^{1/2}
///     D = h0
///
/// where U_first / U_last are the first / last p(s-1) rows of U. The
/// pseudoinverse is applied by column-pivoted QR least squares.
///
template <typename T>
StateSpaceModel<T> realize(const Eigen::Ref<const Mat<T>>& U,
                           const Eigen::Ref<const Vec<T>>& sigma,
                           const Eigen::Ref<const Mat<T>>& V,
                           const Eigen::Ref<const Mat<T>>& h0, Index p, Index m, Index s)
{
    const Index r = sigma.size();
    if (r < 1)
        throw invalid_argument_error("realize: order must be >= 1");
    if (s < 2)
        throw invalid_argument_error("realize: need s >= 2 block rows");
    if (U.rows() != p * s || U.cols() != r || V.rows() != m * s || V.cols() != r)
        throw shape_error("realize: factor shapes do not match p, m, s and r");
    if (h0.rows() != p || h0.cols() != m)
        throw shape_error("realize: h0 must be p x m");
    if (!(sigma.array() > T(0)).all())
        throw invalid_argument_error("realize: singular values must be positive");

    const Vec<T> root = sigma.array().sqrt();
    const Index shifted = p * (s - 1);

    Eigen::ColPivHouseholderQR<Mat<T>> qr(U.topRows(shifted));
    if (qr.rank() < r)
        throw ill_posed_shift_error("realize: leading block rows of U are rank deficient");
    const Mat<T> W = qr.solve(Mat<T>(U.bottomRows(shifted)));

    Mat<T> A = root.cwiseInverse().asDiagonal() * W * root.asDiagonal();
    Mat<T> B = root.asDiagonal() * V.topRows(m).transpose();
    Mat<T> C = U.topRows(p) * root.asDiagonal();
    return StateSpaceModel<T>(std::move(A), std::move(B), std::move(C), Mat<T>(h0));
}

/// 20 log10( sqrt(r+m+p) sigma_{r+1} / ||G||_H2 ), the normalized a priori
/// bound on the ROM's H2 error.
inline double kung_bound_corrected(Index r, Index m, Index p, double sigma_next,
                                   double h2norm)
{
    return amplitude_db(std::sqrt(static_cast<double>(r + m + p)) * sigma_next / h2norm);
}

/// 10 log10( sqrt(r+m+p) sigma_{r+1} / ||G||_H2^2 ): the variant bounding the
/// squared error. Kept for comparison; it does not hold in general.
inline double kung_bound_erroneous(Index r, Index m, Index p, double sigma_next,
                                   double h2norm)
{
    return power_db(std::sqrt(static_cast<double>(r + m + p)) * sigma_next /
                    (h2norm * h2norm));
}

/// 20 log10(eloo / ||G||_{H2,eta}).
inline double error_estimate_db(double eloo, double weighted_norm)
{
    if (!(weighted_norm > 0))
        throw degenerate_reference_error("error estimate: weighted norm must be positive");
    return amplitude_db(eloo / weighted_norm);
}

struct EraOptions
{
    double gamma = 0.05; ///< relative tolerance
    Index block = 32;
    int power = 2;
    std::uint64_t seed = 0;
    Index max_order = 0; ///< optional cap on the sketch width (0: none)
};

template <typename T>
struct EraResult
{
    StateSpaceModel<T> model;
    Vec<T> sigma;                     ///< retained singular values
    std::optional<double> sigma_next; ///< first discarded value of the sketch, if any
    double eloo_final = 0;
    double etol_used = 0;
    double weighted_norm = 0;
    Index sketch_width = 0;
    std::vector<double> loo_history;
    bool capped = false;         ///< stopped at max_order above tolerance
    bool decay_warning = false;  ///< trailing samples carry significant energy
    bool stability_warning = false;
};

/// True when the last 5% of samples hold more than 1% of the total energy.
template <typename T>
bool tail_energy_exceeded(const MarkovSequence<T>& h)
{
    const Index n = h.length();
    const Index tail = std::max<Index>(1, (n + 19) / 20);
    double total = 0;
    double end = 0;
    for (Index k = 0; k < n; ++k)
    {
        const double e = static_cast<double>(h[k].template cast<double>().squaredNorm());
        total += e;
        if (k >= n - tail)
            end += e;
    }
    return total > 0 && end > 0.01 * total;
}

template <typename T>
double spectral_radius(const Mat<T>& A)
{
    if (A.rows() == 0)
        return 0;
    Eigen::EigenSolver<Mat<T>> es(A, /*computeEigenvectors=*/false);
    return static_cast<double>(es.eigenvalues().cwiseAbs().maxCoeff());
}

///
/// Adaptive randomized ERA. With s = floor(N/2):
///
///  1. wrap h_1..h_{2s-1} in a matrix-free `HankelOperator`;
///  2. etol = gamma ||G||_{H2,eta};
///  3. adaptive randomized SVD of H down to etol;
///  4. drop numerically zero singular values (sigma_i <= max(ps, ms) eps sigma_1);
///  5. `realize` with D = h_0.
///
template <typename T>
EraResult<T> adaptive_era(const MarkovSequence<T>& h, const EraOptions& options)
{
    if (!(options.gamma > 0))
        throw invalid_argument_error("adaptive_era: gamma must be positive");
    const Index s = hankel_blocks(h.length());
    if (s < 2)
        throw shape_error("adaptive_era: need at least 4 samples");

    EraResult<T> out;
    out.decay_warning = tail_energy_exceeded(h);
    out.weighted_norm = weighted_h2_norm(h);
    if (!(out.weighted_norm > 0))
        throw degenerate_reference_error("adaptive_era: data has zero energy");
    out.etol_used = options.gamma * out.weighted_norm;

    const HankelOperator<T> op(h);
    RsvdOptions ro;
    ro.block = options.block;
    ro.power = options.power;
    ro.etol = out.etol_used;
    ro.seed = options.seed;
    ro.max_rank = options.max_order;
    RsvdResult<T> svd = adaptive_rsvd(op, ro);

    out.eloo_final = svd.loo;
    out.loo_history = std::move(svd.loo_history);
    out.capped = svd.capped;
    out.sketch_width = svd.sigma.size();

    const double cutoff = static_cast<double>(std::max(op.rows(), op.cols())) *
                          static_cast<double>(std::numeric_limits<T>::epsilon()) *
                          static_cast<double>(svd.sigma(0));
    Index r = 0;
    while (r < svd.sigma.size() && static_cast<double>(svd.sigma(r)) > cutoff)
        ++r;
    if (r == 0)
        throw rank_deficiency_error("adaptive_era: Hankel operator is numerically zero");
    if (r < svd.sigma.size())
        out.sigma_next = static_cast<double>(svd.sigma(r));

    out.sigma = svd.sigma.head(r);
    out.model = realize<T>(svd.U.leftCols(r), out.sigma, svd.V.leftCols(r), h[0],
                           h.outputs(), h.inputs(), s);
    out.stability_warning = spectral_radius(out.model.A()) >= 1.0;
    return out;
}

} // namespace hrom

#endif /* HROM_ERA_HPP */
