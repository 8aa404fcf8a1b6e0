///
/// \file core.hpp
///
/// System algebra on sequences and realizations: Markov parameters, H2 norms,
/// frequency responses and the relative error metric.
///
#ifndef HROM_CORE_HPP
#define HROM_CORE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "hrom/types.hpp"

namespace hrom
{

/// Reported value for -inf dB.
inline constexpr double db_floor = -300.0;

/// 10 log10(ratio), clamped at `db_floor`.
inline double power_db(double ratio)
{
    if (!(ratio > 0.0))
        return db_floor;
    return std::max(10.0 * std::log10(ratio), db_floor);
}

/// 20 log10(ratio), clamped at `db_floor`.
inline double amplitude_db(double ratio)
{
    if (!(ratio > 0.0))
        return db_floor;
    return std::max(20.0 * std::log10(ratio), db_floor);
}

///
/// h_0 = D, h_k = C A^{k-1} B. The n x m block A^{k-1} B is advanced one step
/// at a time; powers of A are never formed.
///
template <typename T>
MarkovSequence<T> markov_params(const StateSpaceModel<T>& model, Index count)
{
    if (count < 1)
        throw invalid_argument_error("markov_params: count must be positive");
    std::vector<Mat<T>> h;
    h.reserve(static_cast<std::size_t>(count));
    h.push_back(model.D());
    Mat<T> state = model.B();
    for (Index k = 1; k < count; ++k)
    {
        h.push_back(model.C() * state);
        if (k + 1 < count)
            state = model.A() * state;
    }
    return MarkovSequence<T>(std::move(h));
}

/// Markov parameters of a dead-time model: channel (i, j) of the core shifted
/// by theta_i + tau_j samples.
template <typename T>
MarkovSequence<T> markov_params(const StructuredModel<T>& model, Index count)
{
    const auto core = markov_params(model.core(), count);
    const auto& spec = model.spec();
    std::vector<Mat<T>> h(static_cast<std::size_t>(count),
                          Mat<T>::Zero(model.outputs(), model.inputs()));
    for (Index i = 0; i < model.outputs(); ++i)
        for (Index j = 0; j < model.inputs(); ++j)
        {
            const Index d = spec.shift(i, j);
            for (Index t = d; t < count; ++t)
                h[static_cast<std::size_t>(t)](i, j) = core[t - d](i, j);
        }
    return MarkovSequence<T>(std::move(h));
}

/// (sum_k ||h_k||_F^2)^{1/2} over all stored samples.
template <typename T>
double h2_norm(const MarkovSequence<T>& h)
{
    double acc = 0;
    for (const auto& hk : h.samples())
        acc += static_cast<double>(hk.template cast<double>().squaredNorm());
    return std::sqrt(acc);
}

/// Multiplicity eta_k of h_k in the s x s block-Hankel matrix, with eta_0 = 1.
/// Zero for k >= 2s.
inline Index hankel_weight(Index k, Index s)
{
    if (k == 0)
        return 1;
    if (k <= s)
        return k;
    if (k < 2 * s)
        return 2 * s - k;
    return 0;
}

/// Block count per side of the Hankel matrix built from N samples.
inline Index hankel_blocks(Index length)
{
    return length / 2;
}

///
/// Time-weighted norm (sum_k eta_k ||h_k||_F^2)^{1/2} with s = floor(N/2).
/// Equals (||H||_F^2 + ||h_0||_F^2)^{1/2} for the block-Hankel matrix H of
/// the same data.
///
template <typename T>
double weighted_h2_norm(const MarkovSequence<T>& h)
{
    const Index s = hankel_blocks(h.length());
    double acc = 0;
    for (Index k = 0; k < h.length(); ++k)
    {
        const Index w = hankel_weight(k, s);
        if (w > 0)
            acc += static_cast<double>(w) *
                   static_cast<double>(h[k].template cast<double>().squaredNorm());
    }
    return std::sqrt(acc);
}

namespace detail
{

template <typename T>
double relative_error_db_impl(const MarkovSequence<T>& ref,
                              const MarkovSequence<T>& approx)
{
    double num = 0;
    double den = 0;
    for (Index k = 1; k < ref.length(); ++k)
    {
        const Mat<double> r = ref[k].template cast<double>();
        num += (r - approx[k].template cast<double>()).squaredNorm();
        den += r.squaredNorm();
    }
    if (!(den > 0))
        throw degenerate_reference_error("reference sequence has zero energy for k >= 1");
    return power_db(num / den);
}

template <typename T>
void check_dims(const MarkovSequence<T>& ref, Index outputs, Index inputs)
{
    if (ref.outputs() != outputs || ref.inputs() != inputs)
        throw shape_error("model and reference have different channel counts");
}

} // namespace detail

///
/// 10 log10( sum_{k>=1} ||h_k - hhat_k||_F^2 / sum_{k>=1} ||h_k||_F^2 ) where
/// hhat is the model's Markov sequence of the same length. Exact agreement
/// reports `db_floor`.
///
template <typename T>
double relative_error_db(const MarkovSequence<T>& ref, const StateSpaceModel<T>& model)
{
    detail::check_dims(ref, model.outputs(), model.inputs());
    return detail::relative_error_db_impl(ref, markov_params(model, ref.length()));
}

template <typename T>
double relative_error_db(const MarkovSequence<T>& ref, const StructuredModel<T>& model)
{
    detail::check_dims(ref, model.outputs(), model.inputs());
    return detail::relative_error_db_impl(ref, markov_params(model, ref.length()));
}

using FrequencyResponse = std::vector<Mat<std::complex<double>>>;

///
/// G(e^{iw}) = C (e^{iw} I - A)^{-1} B + D for every w in `omegas`
/// (radians/sample). Throws `singularity_error` naming the first w at which
/// the resolvent cannot be formed.
///
template <typename T>
FrequencyResponse frequency_response(const StateSpaceModel<T>& model,
                                     std::span<const double> omegas)
{
    using C = std::complex<double>;
    const Index n = model.order();
    const Mat<C> A = model.A().template cast<double>().template cast<C>();
    const Mat<C> B = model.B().template cast<double>().template cast<C>();
    const Mat<C> Cm = model.C().template cast<double>().template cast<C>();
    const Mat<C> D = model.D().template cast<double>().template cast<C>();

    FrequencyResponse out;
    out.reserve(omegas.size());
    for (const double w : omegas)
    {
        if (n == 0)
        {
            out.push_back(D);
            continue;
        }
        const C z = std::polar(1.0, w);
        const Mat<C> M = z * Mat<C>::Identity(n, n) - A;
        Eigen::PartialPivLU<Mat<C>> lu(M);
        const double rcond = lu.rcond();
        if (!(rcond > 64 * std::numeric_limits<double>::epsilon()))
            throw singularity_error(w, "resolvent is singular at omega = " +
                                           std::to_string(w));
        out.push_back(Cm * lu.solve(B) + D);
    }
    return out;
}

/// Frequency response of the dead-time model: diag(e^{-iw theta}) G_0 diag(e^{-iw tau}).
template <typename T>
FrequencyResponse frequency_response(const StructuredModel<T>& model,
                                     std::span<const double> omegas)
{
    auto out = frequency_response(model.core(), omegas);
    const auto& spec = model.spec();
    for (std::size_t k = 0; k < omegas.size(); ++k)
        for (Index i = 0; i < model.outputs(); ++i)
            for (Index j = 0; j < model.inputs(); ++j)
                out[k](i, j) *=
                    std::polar(1.0, -omegas[k] * static_cast<double>(spec.shift(i, j)));
    return out;
}

} // namespace hrom

#endif /* HROM_CORE_HPP */
