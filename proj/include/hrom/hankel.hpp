///
/// \file hankel.hpp
///
#ifndef HROM_HANKEL_HPP
#define HROM_HANKEL_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "hrom/core.hpp"
#include "hrom/parallel.hpp"
#include "hrom/types.hpp"

namespace hrom
{

///
/// ### HankelOperator
///
/// Matrix-free block-Hankel operator of a Markov sequence,
///
///     H = [ h_1   h_2      ...  h_s
///           h_2   h_3      ...  h_{s+1}
///           ...
///           h_s   h_{s+1}  ...  h_{2s-1} ]   (ps x ms)
///
/// with s = floor(N/2). Row a*p + i belongs to block row a and output i,
/// column b*m + j to block column b and input j.
///
/// Every channel (i, j) contributes a scalar Hankel matrix, so a product
/// reduces to p*m correlations of length-s vectors against h_ij(1..2s-1).
/// They are evaluated by FFT with transform length L = next power of two
/// >= 2s, which is free of wrap-around for the needed output window. The
/// channel spectra are computed once at construction; each product column then
/// costs m forward transforms, p*m spectral multiply-adds and p inverse
/// transforms (the transpose swaps the roles of p and m).
///
/// The operator is immutable; `apply` and `apply_transpose` are reentrant.
/// Columns are distributed over `thread_count()` workers.
///
template <typename T>
class HankelOperator
{
public:
    using Scalar = T;
    using Complex = std::complex<T>;
    using Matrix = Mat<T>;

    explicit HankelOperator(MarkovSequence<T> source)
        : m_source(std::move(source)),
          m_p(m_source.outputs()),
          m_m(m_source.inputs()),
          m_s(hankel_blocks(m_source.length()))
    {
        if (m_s < 1)
            throw shape_error("Hankel operator needs at least two samples");
        m_fft_length = 1;
        while (m_fft_length < 2 * m_s)
            m_fft_length *= 2;
        m_freqs = m_fft_length / 2 + 1;

        m_spectra.resize(m_freqs, m_p * m_m);
        Eigen::FFT<T> fft;
        fft.SetFlag(Eigen::FFT<T>::HalfSpectrum);
        std::vector<T> kernel(static_cast<std::size_t>(m_fft_length));
        for (Index j = 0; j < m_m; ++j)
            for (Index i = 0; i < m_p; ++i)
            {
                std::fill(kernel.begin(), kernel.end(), T(0));
                for (Index k = 0; k + 1 < 2 * m_s; ++k)
                    kernel[static_cast<std::size_t>(k)] = m_source[k + 1](i, j);
                fft.fwd(m_spectra.col(j * m_p + i).data(), kernel.data(), m_fft_length);
            }

        double acc = 0;
        for (Index k = 1; k < 2 * m_s; ++k)
            acc += static_cast<double>(hankel_weight(k, m_s)) *
                   static_cast<double>(m_source[k].template cast<double>().squaredNorm());
        m_frobenius = std::sqrt(acc);
    }

    Index rows() const { return m_p * m_s; }
    Index cols() const { return m_m * m_s; }
    Index blocks() const { return m_s; }
    Index outputs() const { return m_p; }
    Index inputs() const { return m_m; }
    Index fft_length() const { return m_fft_length; }
    const MarkovSequence<T>& source() const { return m_source; }

    /// H X for a cols() x k block.
    Matrix apply(const Eigen::Ref<const Matrix>& X) const
    {
        if (X.rows() != cols())
            throw shape_error("apply: expected " + std::to_string(cols()) +
                              " rows, got " + std::to_string(X.rows()));
        return correlate(X, /*transpose=*/false);
    }

    /// H^T Y for a rows() x k block.
    Matrix apply_transpose(const Eigen::Ref<const Matrix>& Y) const
    {
        if (Y.rows() != rows())
            throw shape_error("apply_transpose: expected " + std::to_string(rows()) +
                              " rows, got " + std::to_string(Y.rows()));
        return correlate(Y, /*transpose=*/true);
    }

    /// ||H||_F from the data: (sum_{k=1}^{2s-1} eta_k ||h_k||_F^2)^{1/2}.
    double frobenius_norm() const
    {
        return m_frobenius;
    }

private:
    // Forward: y_i[a] = sum_j sum_b g_ij[a+b] x_j[b]; transpose swaps (i, a)
    // with (j, b). Both are the window [s-1, 2s-2] of g_ij convolved with the
    // reversed input vector.
    Matrix correlate(const Eigen::Ref<const Matrix>& X, bool transpose) const
    {
        const Index n_in = transpose ? m_p : m_m;
        const Index n_out = transpose ? m_m : m_p;
        Matrix out(n_out * m_s, X.cols());

        parallel_for(X.cols(), [&](Index begin, Index end) {
            Eigen::FFT<T> fft;
            fft.SetFlag(Eigen::FFT<T>::HalfSpectrum);
            std::vector<T> buffer(static_cast<std::size_t>(m_fft_length));
            Mat<Complex> in_spectra(m_freqs, n_in);
            Vec<Complex> acc(m_freqs);

            for (Index c = begin; c < end; ++c)
            {
                for (Index u = 0; u < n_in; ++u)
                {
                    std::fill(buffer.begin(), buffer.end(), T(0));
                    for (Index b = 0; b < m_s; ++b)
                        buffer[static_cast<std::size_t>(m_s - 1 - b)] = X(b * n_in + u, c);
                    fft.fwd(in_spectra.col(u).data(), buffer.data(), m_fft_length);
                }
                for (Index v = 0; v < n_out; ++v)
                {
                    acc.setZero();
                    for (Index u = 0; u < n_in; ++u)
                    {
                        const Index channel = transpose ? v * m_p + u : u * m_p + v;
                        acc.array() += m_spectra.col(channel).array() * in_spectra.col(u).array();
                    }
                    fft.inv(buffer.data(), acc.data(), m_fft_length);
                    for (Index a = 0; a < m_s; ++a)
                        out(a * n_out + v, c) = buffer[static_cast<std::size_t>(a + m_s - 1)];
                }
            }
        });
        return out;
    }

    MarkovSequence<T> m_source;
    Index m_p;
    Index m_m;
    Index m_s;
    Index m_fft_length = 0;
    Index m_freqs = 0;
    Mat<Complex> m_spectra; // column j*p + i holds the spectrum of channel (i, j)
    double m_frobenius = 0;
};

///
/// Dense matrix behind the same operator interface as `HankelOperator`, used
/// for randomized factorizations of explicit matrices.
///
template <typename T>
class DenseOperator
{
public:
    using Scalar = T;
    using Matrix = Mat<T>;

    explicit DenseOperator(Matrix M) : m_M(std::move(M)) {}

    Index rows() const { return m_M.rows(); }
    Index cols() const { return m_M.cols(); }

    Matrix apply(const Eigen::Ref<const Matrix>& X) const
    {
        if (X.rows() != cols())
            throw shape_error("apply: shape mismatch");
        return m_M * X;
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& Y) const
    {
        if (Y.rows() != rows())
            throw shape_error("apply_transpose: shape mismatch");
        return m_M.transpose() * Y;
    }

    const Matrix& matrix() const { return m_M; }

private:
    Matrix m_M;
};

} // namespace hrom

#endif /* HROM_HANKEL_HPP */
