///
/// \file error.hpp
///
/// Exception hierarchy shared by all hrom modules. Every error carries a
/// short machine-readable `kind()` so the CLI can report it as JSON.
///
#ifndef HROM_ERROR_HPP
#define HROM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hrom
{

class error : public std::runtime_error
{
public:
    error(std::string kind, const std::string& what)
        : std::runtime_error(what), m_kind(std::move(kind))
    {
    }

    const std::string& kind() const noexcept
    {
        return m_kind;
    }

private:
    std::string m_kind;
};

/// Dimensions of (A, B, C, D) disagree or an entry is not finite.
struct invalid_model_error : error
{
    explicit invalid_model_error(const std::string& what)
        : error("invalid_model", what)
    {
    }
};

/// Malformed Markov sequence (empty, inconsistent shapes, non-finite data).
struct invalid_sequence_error : error
{
    explicit invalid_sequence_error(const std::string& what)
        : error("invalid_sequence", what)
    {
    }
};

struct degenerate_reference_error : error
{
    explicit degenerate_reference_error(const std::string& what)
        : error("degenerate_reference", what)
    {
    }
};

/// Resolvent e^{iw}I - A is singular at the reported frequency.
struct singularity_error : error
{
    singularity_error(double omega, const std::string& what)
        : error("singularity", what), m_omega(omega)
    {
    }

    double omega() const noexcept
    {
        return m_omega;
    }

private:
    double m_omega;
};

struct shape_error : error
{
    explicit shape_error(const std::string& what) : error("shape", what) {}
};

struct rank_deficiency_error : error
{
    explicit rank_deficiency_error(const std::string& what)
        : error("rank_deficiency", what)
    {
    }
};

struct estimator_unavailable_error : error
{
    explicit estimator_unavailable_error(const std::string& what)
        : error("estimator_unavailable", what)
    {
    }
};

/// The sketch exhausted the operator's dimensions before the estimator fell
/// below the tolerance.
struct tolerance_unreachable_error : error
{
    tolerance_unreachable_error(double last_estimate, const std::string& what)
        : error("tolerance_unreachable", what), m_last_estimate(last_estimate)
    {
    }

    double last_estimate() const noexcept
    {
        return m_last_estimate;
    }

private:
    double m_last_estimate;
};

struct ill_posed_shift_error : error
{
    explicit ill_posed_shift_error(const std::string& what)
        : error("ill_posed_shift", what)
    {
    }
};

struct invalid_spec_error : error
{
    explicit invalid_spec_error(const std::string& what)
        : error("invalid_spec", what)
    {
    }
};

struct format_error : error
{
    explicit format_error(const std::string& what) : error("format", what) {}
};

struct invalid_argument_error : error
{
    explicit invalid_argument_error(const std::string& what)
        : error("invalid_argument", what)
    {
    }
};

} // namespace hrom

#endif /* HROM_ERROR_HPP */
