///
/// \file types.hpp
///
/// Domain types: impulse-response sequences, dense state-space realizations,
/// delay matrices and dead-time splittings.
///
#ifndef HROM_TYPES_HPP
#define HROM_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hrom/error.hpp"

namespace hrom
{

using Index = Eigen::Index;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;
using IndexVector = Eigen::Matrix<Index, Eigen::Dynamic, 1>;

#ifdef HROM_SINGLE_PRECISION
using real_t = float;
#else
using real_t = double;
#endif

///
/// ### MarkovSequence
///
/// Sampled multichannel impulse response h_0, ..., h_{N-1}, each sample a
/// p x m matrix (outputs x inputs). Immutable after construction.
///
template <typename T>
class MarkovSequence
{
public:
    using Scalar = T;
    using Matrix = Mat<T>;
    using Vector = Vec<T>;

    MarkovSequence() = default;

    MarkovSequence(std::vector<Matrix> samples, double sample_rate = 1.0)
        : m_samples(std::move(samples)), m_sample_rate(sample_rate)
    {
        if (m_samples.empty())
            throw invalid_sequence_error("Markov sequence must hold at least one sample");
        const Index p = m_samples.front().rows();
        const Index m = m_samples.front().cols();
        if (p < 1 || m < 1)
            throw invalid_sequence_error("Markov sequence needs p >= 1 and m >= 1");
        for (std::size_t t = 0; t < m_samples.size(); ++t)
        {
            const auto& h = m_samples[t];
            if (h.rows() != p || h.cols() != m)
                throw invalid_sequence_error("sample " + std::to_string(t) +
                                             " has inconsistent shape");
            if (!h.allFinite())
                throw invalid_sequence_error("sample " + std::to_string(t) +
                                             " contains non-finite values");
        }
    }

    static MarkovSequence zeros(Index length, Index outputs, Index inputs,
                                double sample_rate = 1.0)
    {
        return MarkovSequence(
            std::vector<Matrix>(static_cast<std::size_t>(length),
                                Matrix::Zero(outputs, inputs)),
            sample_rate);
    }

    Index length() const
    {
        return static_cast<Index>(m_samples.size());
    }
    Index outputs() const
    {
        return m_samples.empty() ? 0 : m_samples.front().rows();
    }
    Index inputs() const
    {
        return m_samples.empty() ? 0 : m_samples.front().cols();
    }
    double sample_rate() const
    {
        return m_sample_rate;
    }

    const Matrix& operator[](Index t) const
    {
        return m_samples[static_cast<std::size_t>(t)];
    }

    const std::vector<Matrix>& samples() const
    {
        return m_samples;
    }

    /// Single-channel trace h_ij(0), ..., h_ij(N-1).
    Vector channel(Index i, Index j) const
    {
        Vector out(length());
        for (Index t = 0; t < length(); ++t)
            out(t) = (*this)[t](i, j);
        return out;
    }

    template <typename U>
    MarkovSequence<U> cast() const
    {
        std::vector<Mat<U>> out;
        out.reserve(m_samples.size());
        for (const auto& h : m_samples)
            out.push_back(h.template cast<U>());
        return MarkovSequence<U>(std::move(out), m_sample_rate);
    }

private:
    std::vector<Matrix> m_samples;
    double m_sample_rate = 1.0;
};

///
/// ### StateSpaceModel
///
/// x(t+1) = A x(t) + B u(t),  y(t) = C x(t) + D u(t).
/// A state dimension of zero is allowed (pure feedthrough).
///
template <typename T>
class StateSpaceModel
{
public:
    using Scalar = T;
    using Matrix = Mat<T>;

    StateSpaceModel() = default;

    StateSpaceModel(Matrix A, Matrix B, Matrix C, Matrix D)
        : m_A(std::move(A)), m_B(std::move(B)), m_C(std::move(C)), m_D(std::move(D))
    {
        const Index n = m_A.rows();
        if (m_A.cols() != n)
            throw invalid_model_error("A must be square");
        if (m_B.rows() != n)
            throw invalid_model_error("B must have as many rows as A");
        if (m_C.cols() != n)
            throw invalid_model_error("C must have as many columns as A");
        if (m_D.rows() != m_C.rows() || m_D.cols() != m_B.cols())
            throw invalid_model_error("D must be p x m");
        if (m_D.rows() < 1 || m_D.cols() < 1)
            throw invalid_model_error("model needs at least one input and one output");
        if (!m_A.allFinite() || !m_B.allFinite() || !m_C.allFinite() || !m_D.allFinite())
            throw invalid_model_error("model contains non-finite entries");
    }

    const Matrix& A() const { return m_A; }
    const Matrix& B() const { return m_B; }
    const Matrix& C() const { return m_C; }
    const Matrix& D() const { return m_D; }

    Index order() const { return m_A.rows(); }
    Index inputs() const { return m_D.cols(); }
    Index outputs() const { return m_D.rows(); }

    template <typename U>
    StateSpaceModel<U> cast() const
    {
        return StateSpaceModel<U>(m_A.template cast<U>(), m_B.template cast<U>(),
                                  m_C.template cast<U>(), m_D.template cast<U>());
    }

private:
    Matrix m_A, m_B, m_C, m_D;
};

///
/// ### DelayMatrix
///
/// Per-channel dead times delta_ij in samples (p x m). Channels flagged as
/// silent carry a sentinel value and are capped before dead-time splitting.
///
class DelayMatrix
{
public:
    DelayMatrix() = default;

    explicit DelayMatrix(IndexMatrix delta)
        : DelayMatrix(delta, Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                                 delta.rows(), delta.cols(), false))
    {
    }

    DelayMatrix(IndexMatrix delta, Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> silent)
        : m_delta(std::move(delta)), m_silent(std::move(silent))
    {
        if (m_delta.rows() < 1 || m_delta.cols() < 1)
            throw invalid_spec_error("delay matrix must be at least 1 x 1");
        if (m_silent.rows() != m_delta.rows() || m_silent.cols() != m_delta.cols())
            throw invalid_spec_error("silent mask shape does not match delay matrix");
        if ((m_delta.array() < 0).any())
            throw invalid_spec_error("delay matrix entries must be nonnegative");
    }

    const IndexMatrix& delta() const { return m_delta; }
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& silent() const
    {
        return m_silent;
    }
    Index outputs() const { return m_delta.rows(); }
    Index inputs() const { return m_delta.cols(); }
    Index operator()(Index i, Index j) const { return m_delta(i, j); }

private:
    IndexMatrix m_delta;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> m_silent;
};

///
/// ### DeadTimeSpec
///
/// Input dead times tau (length m), output dead times theta (length p) and
/// the residual delay matrix delta_ij - theta_i - tau_j left in the data.
///
struct DeadTimeSpec
{
    IndexVector tau;
    IndexVector theta;
    IndexMatrix residual;

    /// Zero splitting for a p x m system (no extraction).
    static DeadTimeSpec none(Index outputs, Index inputs)
    {
        return {IndexVector::Zero(inputs), IndexVector::Zero(outputs),
                IndexMatrix::Zero(outputs, inputs)};
    }

    Index inputs() const { return tau.size(); }
    Index outputs() const { return theta.size(); }

    /// Channel shift theta_i + tau_j.
    Index shift(Index i, Index j) const { return theta(i) + tau(j); }

    Index max_shift() const
    {
        Index out = 0;
        for (Index i = 0; i < theta.size(); ++i)
            for (Index j = 0; j < tau.size(); ++j)
                out = std::max(out, shift(i, j));
        return out;
    }

    Index total_extracted() const { return tau.sum() + theta.sum(); }
    Index total_residual() const { return residual.sum(); }

    void validate() const
    {
        if ((tau.array() < 0).any() || (theta.array() < 0).any())
            throw invalid_spec_error("dead times must be nonnegative");
        if (residual.size() != 0 &&
            (residual.rows() != theta.size() || residual.cols() != tau.size()))
            throw invalid_spec_error("residual matrix must be p x m");
        if (residual.size() != 0 && (residual.array() < 0).any())
            throw invalid_spec_error("residual dead times must be nonnegative");
    }
};

///
/// ### StructuredModel
///
/// Dead-time-free core S_0 composed with diagonal input/output delay
/// operators. The composition is kept sparse and is never densified outside
/// of `dense_realization` (debug path).
///
template <typename T>
class StructuredModel
{
public:
    using Scalar = T;

    StructuredModel() = default;

    StructuredModel(StateSpaceModel<T> core, DeadTimeSpec spec)
        : m_core(std::move(core)), m_spec(std::move(spec))
    {
        if (m_spec.tau.size() != m_core.inputs())
            throw invalid_spec_error("tau length must equal the number of inputs");
        if (m_spec.theta.size() != m_core.outputs())
            throw invalid_spec_error("theta length must equal the number of outputs");
        m_spec.validate();
    }

    const StateSpaceModel<T>& core() const { return m_core; }
    const DeadTimeSpec& spec() const { return m_spec; }
    Index inputs() const { return m_core.inputs(); }
    Index outputs() const { return m_core.outputs(); }

private:
    StateSpaceModel<T> m_core;
    DeadTimeSpec m_spec;
};

} // namespace hrom

#endif /* HROM_TYPES_HPP */
