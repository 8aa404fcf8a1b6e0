///
/// \file deadtime.hpp
///
/// Dead-time extraction: delay estimation, input/output splitting, data
/// rectification and re-assembly of structured models.
///
#ifndef HROM_DEADTIME_HPP
#define HROM_DEADTIME_HPP

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hrom/core.hpp"
#include "hrom/types.hpp"

namespace hrom
{

enum class DeadTimeMode
{
    none,
    least_common,
    dts
};

std::string to_string(DeadTimeMode mode);

/// Parses "none", "least-common" (or "least_common", "lc") and "dts".
DeadTimeMode parse_dead_time_mode(const std::string& name);

///
/// ### DtsLp
///
/// Constraint system F x <= vec(delta) of the splitting problem with
/// x = [theta_1 .. theta_p, tau_1 .. tau_m]. Row j*p + i (vec stacks the
/// columns of delta) carries a one in column i and in column p + j.
///
struct DtsLp
{
    Mat<double> F;
    Vec<double> rhs;
};

DtsLp make_dts_lp(const IndexMatrix& delta);

/// Delay matrix with silent channels capped at the largest non-silent delay
/// (zero if every channel is silent).
IndexMatrix capped_delays(const DelayMatrix& delays);

/// delta_ij - theta_i - tau_j.
IndexMatrix residual_delays(const IndexMatrix& delta, const IndexVector& tau,
                            const IndexVector& theta);

///
/// Maximizes sum(theta) + sum(tau) subject to theta_i + tau_j <= delta_ij and
/// nonnegativity, by primal simplex with Bland's rule. Ties among optimal
/// vertices are broken lexicographically: maximize sum(tau), then tau_1, ...,
/// tau_m, then theta_1, ..., theta_p. F is the incidence matrix of K_{p,m} and
/// hence totally unimodular, so the returned vertex is integral.
///
DeadTimeSpec solve_dts(const DelayMatrix& delays);

/// Least common dead time min_ij delta_ij, placed entirely on the outputs if
/// p <= m and on the inputs otherwise.
DeadTimeSpec solve_least_common(const DelayMatrix& delays);

DeadTimeSpec split_dead_times(const DelayMatrix& delays, DeadTimeMode mode);

/// Degrees of freedom of a ROM of core order r:
/// (r+p)(r+m) plus the extracted dead times.
Index count_dofs(DeadTimeMode mode, Index r, Index p, Index m, const DeadTimeSpec& spec);

///
/// Onset detection: delta_ij = min{ t : |h_ij(t)| > rel_threshold * max_t |h_ij(t)| }.
/// All-zero channels get the sentinel N and are flagged silent.
///
template <typename T>
DelayMatrix estimate_delays(const MarkovSequence<T>& h, double rel_threshold = 0.05)
{
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
        throw invalid_argument_error("estimate_delays: threshold must lie in (0, 1)");
    const Index p = h.outputs();
    const Index m = h.inputs();
    const Index n = h.length();
    IndexMatrix delta(p, m);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> silent(p, m);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j)
        {
            double peak = 0;
            for (Index t = 0; t < n; ++t)
                peak = std::max(peak, std::abs(static_cast<double>(h[t](i, j))));
            silent(i, j) = !(peak > 0);
            delta(i, j) = n;
            if (silent(i, j))
                continue;
            const double level = rel_threshold * peak;
            for (Index t = 0; t < n; ++t)
                if (std::abs(static_cast<double>(h[t](i, j))) > level)
                {
                    delta(i, j) = t;
                    break;
                }
        }
    return DelayMatrix(std::move(delta), std::move(silent));
}

///
/// Dead-time-rectified data h0_ij(t) = h_ij(t + tau_j + theta_i) of uniform
/// length N - max_ij(tau_j + theta_i).
///
template <typename T>
MarkovSequence<T> rectify(const MarkovSequence<T>& h, const DeadTimeSpec& spec)
{
    spec.validate();
    if (spec.inputs() != h.inputs() || spec.outputs() != h.outputs())
        throw invalid_spec_error("rectify: dead-time vector lengths do not match the data");
    const Index n = h.length() - spec.max_shift();
    if (n < 1)
        throw invalid_spec_error("rectify: dead times exceed the data length");

    std::vector<Mat<T>> out(static_cast<std::size_t>(n), Mat<T>::Zero(h.outputs(), h.inputs()));
    for (Index i = 0; i < h.outputs(); ++i)
        for (Index j = 0; j < h.inputs(); ++j)
        {
            const Index d = spec.shift(i, j);
            for (Index t = 0; t < n && t + d < h.length(); ++t)
                out[static_cast<std::size_t>(t)](i, j) = h[t + d](i, j);
        }
    return MarkovSequence<T>(std::move(out), h.sample_rate());
}

template <typename T>
StructuredModel<T> assemble(StateSpaceModel<T> core, DeadTimeSpec spec)
{
    if (spec.inputs() != core.inputs() || spec.outputs() != core.outputs())
        throw invalid_spec_error("assemble: dead-time vector lengths do not match the core");
    return StructuredModel<T>(std::move(core), std::move(spec));
}

///
/// Parallel bank of pure delays z^{-d_k}, one per channel. A channel with
/// d > 0 is the shift register with A = superdiagonal ones, B = e_d, C = e_1^T,
/// D = 0; a channel with d = 0 is a unit feedthrough.
///
template <typename T>
StateSpaceModel<T> delay_realization(const IndexVector& delays)
{
    const Index channels = delays.size();
    const Index n = delays.sum();
    Mat<T> A = Mat<T>::Zero(n, n);
    Mat<T> B = Mat<T>::Zero(n, channels);
    Mat<T> C = Mat<T>::Zero(channels, n);
    Mat<T> D = Mat<T>::Zero(channels, channels);
    Index offset = 0;
    for (Index k = 0; k < channels; ++k)
    {
        const Index d = delays(k);
        if (d == 0)
        {
            D(k, k) = T(1);
            continue;
        }
        for (Index q = 0; q + 1 < d; ++q)
            A(offset + q, offset + q + 1) = T(1);
        B(offset + d - 1, k) = T(1);
        C(k, offset) = T(1);
        offset += d;
    }
    return StateSpaceModel<T>(std::move(A), std::move(B), std::move(C), std::move(D));
}

///
/// Dense realization of Delta_theta o S_0 o Delta_tau with state ordering
/// [x_tau, x_0, x_theta]. Size grows with the total dead time; intended for
/// small debugging and verification cases only.
///
template <typename T>
StateSpaceModel<T> dense_realization(const StructuredModel<T>& model)
{
    const auto in = delay_realization<T>(model.spec().tau);
    const auto out = delay_realization<T>(model.spec().theta);
    const auto& c = model.core();
    const Index nt = in.order();
    const Index n0 = c.order();
    const Index nq = out.order();
    const Index n = nt + n0 + nq;

    Mat<T> A = Mat<T>::Zero(n, n);
    A.block(0, 0, nt, nt) = in.A();
    A.block(nt, 0, n0, nt) = c.B() * in.C();
    A.block(nt, nt, n0, n0) = c.A();
    A.block(nt + n0, 0, nq, nt) = out.B() * c.D() * in.C();
    A.block(nt + n0, nt, nq, n0) = out.B() * c.C();
    A.block(nt + n0, nt + n0, nq, nq) = out.A();

    Mat<T> B(n, c.inputs());
    B << in.B(), c.B() * in.D(), out.B() * c.D() * in.D();

    Mat<T> C(c.outputs(), n);
    C << out.D() * c.D() * in.C(), out.D() * c.C(), out.C();

    Mat<T> D = out.D() * c.D() * in.D();
    return StateSpaceModel<T>(std::move(A), std::move(B), std::move(C), std::move(D));
}

} // namespace hrom

#endif /* HROM_DEADTIME_HPP */
