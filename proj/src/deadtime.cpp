#include "hrom/deadtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hrom
{

std::string to_string(DeadTimeMode mode)
{
    switch (mode)
    {
    case DeadTimeMode::none:
        return "none";
    case DeadTimeMode::least_common:
        return "least-common";
    case DeadTimeMode::dts:
        return "dts";
    }
    return "none";
}

DeadTimeMode parse_dead_time_mode(const std::string& name)
{
    if (name == "none")
        return DeadTimeMode::none;
    if (name == "least-common" || name == "least_common" || name == "lc")
        return DeadTimeMode::least_common;
    if (name == "dts")
        return DeadTimeMode::dts;
    throw invalid_argument_error("unknown dead-time mode '" + name + "'");
}

DtsLp make_dts_lp(const IndexMatrix& delta)
{
    const Index p = delta.rows();
    const Index m = delta.cols();
    DtsLp lp{Mat<double>::Zero(p * m, p + m), Vec<double>(p * m)};
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < p; ++i)
        {
            const Index row = j * p + i;
            lp.F(row, i) = 1.0;
            lp.F(row, p + j) = 1.0;
            lp.rhs(row) = static_cast<double>(delta(i, j));
        }
    return lp;
}

IndexMatrix capped_delays(const DelayMatrix& delays)
{
    IndexMatrix out = delays.delta();
    Index cap = 0;
    bool any_audible = false;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
            if (!delays.silent()(i, j))
            {
                cap = any_audible ? std::max(cap, out(i, j)) : out(i, j);
                any_audible = true;
            }
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
            if (delays.silent()(i, j))
                out(i, j) = cap;
    return out;
}

IndexMatrix residual_delays(const IndexMatrix& delta, const IndexVector& tau,
                            const IndexVector& theta)
{
    IndexMatrix out(delta.rows(), delta.cols());
    for (Index i = 0; i < delta.rows(); ++i)
        for (Index j = 0; j < delta.cols(); ++j)
            out(i, j) = delta(i, j) - theta(i) - tau(j);
    return out;
}

namespace
{

// Dense simplex on the compact (Tucker) tableau of
//
//     max c_k^T x  (k = 0, 1, ... lexicographically)
//     s.t. F x <= rhs,  x >= 0,  rhs >= 0.
//
// Row i reads  x_B(i) = rhs_i - sum_j a_ij x_N(j); objective row k reads
// z_k = value_k + sum_j c_kj x_N(j). Labels 0..n-1 are structural variables,
// n..n+rows-1 are slacks. Entering and leaving candidates follow Bland's rule
// on labels, which rules out cycling on degenerate vertices.
class LexSimplex
{
public:
    LexSimplex(const Mat<double>& F, const Vec<double>& rhs,
               std::vector<Vec<double>> objectives)
        : m_rows(F.rows()),
          m_cols(F.cols()),
          m_table(F.rows(), F.cols() + 1),
          m_objectives(objectives.size(), F.cols() + 1),
          m_basic(static_cast<std::size_t>(F.rows())),
          m_nonbasic(static_cast<std::size_t>(F.cols()))
    {
        m_table.leftCols(m_cols) = F;
        m_table.col(m_cols) = rhs;
        for (std::size_t k = 0; k < objectives.size(); ++k)
        {
            m_objectives.row(static_cast<Index>(k)).head(m_cols) = objectives[k].transpose();
            m_objectives(static_cast<Index>(k), m_cols) = 0.0;
        }
        for (Index j = 0; j < m_cols; ++j)
            m_nonbasic[static_cast<std::size_t>(j)] = j;
        for (Index i = 0; i < m_rows; ++i)
            m_basic[static_cast<std::size_t>(i)] = m_cols + i;
    }

    void solve()
    {
        for (Index stage = 0; stage < m_objectives.rows(); ++stage)
            optimize(stage);
    }

    Vec<double> solution() const
    {
        Vec<double> x = Vec<double>::Zero(m_cols);
        for (Index i = 0; i < m_rows; ++i)
        {
            const Index label = m_basic[static_cast<std::size_t>(i)];
            if (label < m_cols)
                x(label) = m_table(i, m_cols);
        }
        return x;
    }

private:
    static constexpr double tol = 1e-9;

    void optimize(Index stage)
    {
        // Each pivot strictly improves or is degenerate; Bland's rule bounds
        // the number of pivots by the number of bases.
        for (;;)
        {
            Index enter = -1;
            for (Index j = 0; j < m_cols; ++j)
            {
                if (!(m_objectives(stage, j) > tol))
                    continue;
                bool on_face = true;
                for (Index prev = 0; prev < stage && on_face; ++prev)
                    on_face = std::abs(m_objectives(prev, j)) <= tol;
                if (!on_face)
                    continue;
                if (enter < 0 || label_of_nonbasic(j) < label_of_nonbasic(enter))
                    enter = j;
            }
            if (enter < 0)
                return;

            Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < m_rows; ++i)
            {
                const double a = m_table(i, enter);
                if (!(a > tol))
                    continue;
                const double ratio = m_table(i, m_cols) / a;
                if (ratio < best - tol ||
                    (std::abs(ratio - best) <= tol &&
                     m_basic[static_cast<std::size_t>(i)] <
                         m_basic[static_cast<std::size_t>(leave)]))
                {
                    best = std::min(best, ratio);
                    leave = i;
                }
            }
            if (leave < 0)
                throw std::logic_error("dead-time splitting LP is unbounded");
            pivot(leave, enter);
        }
    }

    Index label_of_nonbasic(Index j) const
    {
        return m_nonbasic[static_cast<std::size_t>(j)];
    }

    void pivot(Index r, Index s)
    {
        const double piv = m_table(r, s);
        const Vec<double> pivot_row = m_table.row(r).transpose();

        for (Index i = 0; i < m_rows; ++i)
        {
            if (i == r)
                continue;
            const double factor = m_table(i, s) / piv;
            if (factor == 0.0)
                continue;
            m_table.row(i) -= factor * pivot_row.transpose();
            m_table(i, s) = -factor;
        }
        for (Index k = 0; k < m_objectives.rows(); ++k)
        {
            const double factor = m_objectives(k, s) / piv;
            if (factor == 0.0)
                continue;
            // z = value + c^T x_N, so the value moves with +c_s * rhs_r / piv.
            m_objectives.row(k).head(m_cols) -= factor * pivot_row.head(m_cols).transpose();
            m_objectives(k, m_cols) += factor * pivot_row(m_cols);
            m_objectives(k, s) = -factor;
        }
        m_table.row(r) /= piv;
        m_table(r, s) = 1.0 / piv;

        std::swap(m_basic[static_cast<std::size_t>(r)], m_nonbasic[static_cast<std::size_t>(s)]);
    }

    Index m_rows;
    Index m_cols;
    Mat<double> m_table;
    Mat<double> m_objectives;
    std::vector<Index> m_basic;
    std::vector<Index> m_nonbasic;
};

} // namespace

DeadTimeSpec solve_dts(const DelayMatrix& delays)
{
    const IndexMatrix delta = capped_delays(delays);
    const Index p = delta.rows();
    const Index m = delta.cols();
    const Index n = p + m;
    const DtsLp lp = make_dts_lp(delta);

    std::vector<Vec<double>> objectives;
    objectives.push_back(Vec<double>::Ones(n));
    Vec<double> inputs = Vec<double>::Zero(n);
    inputs.tail(m).setOnes();
    objectives.push_back(inputs);
    for (Index j = 0; j < m; ++j)
        objectives.push_back(Vec<double>::Unit(n, p + j));
    for (Index i = 0; i < p; ++i)
        objectives.push_back(Vec<double>::Unit(n, i));

    LexSimplex simplex(lp.F, lp.rhs, std::move(objectives));
    simplex.solve();
    const Vec<double> x = simplex.solution();

    DeadTimeSpec spec;
    spec.theta.resize(p);
    spec.tau.resize(m);
    for (Index k = 0; k < n; ++k)
    {
        const double rounded = std::round(x(k));
        if (std::abs(x(k) - rounded) > 1e-6 || rounded < 0)
            throw std::logic_error("dead-time splitting LP returned a non-integral vertex");
        const auto value = static_cast<Index>(rounded);
        if (k < p)
            spec.theta(k) = value;
        else
            spec.tau(k - p) = value;
    }
    spec.residual = residual_delays(delta, spec.tau, spec.theta);
    spec.validate();
    return spec;
}

DeadTimeSpec solve_least_common(const DelayMatrix& delays)
{
    const IndexMatrix delta = capped_delays(delays);
    const Index p = delta.rows();
    const Index m = delta.cols();
    const Index common = delta.minCoeff();
    DeadTimeSpec spec = DeadTimeSpec::none(p, m);
    if (p <= m)
        spec.theta.setConstant(common);
    else
        spec.tau.setConstant(common);
    spec.residual = residual_delays(delta, spec.tau, spec.theta);
    return spec;
}

DeadTimeSpec split_dead_times(const DelayMatrix& delays, DeadTimeMode mode)
{
    switch (mode)
    {
    case DeadTimeMode::dts:
        return solve_dts(delays);
    case DeadTimeMode::least_common:
        return solve_least_common(delays);
    case DeadTimeMode::none:
        break;
    }
    DeadTimeSpec spec = DeadTimeSpec::none(delays.outputs(), delays.inputs());
    spec.residual = capped_delays(delays);
    return spec;
}

Index count_dofs(DeadTimeMode mode, Index r, Index p, Index m, const DeadTimeSpec& spec)
{
    const Index base = (r + p) * (r + m);
    switch (mode)
    {
    case DeadTimeMode::none:
        return base;
    case DeadTimeMode::dts:
        return base + spec.theta.sum() + spec.tau.sum();
    case DeadTimeMode::least_common:
    {
        Index common = 0;
        if (spec.theta.size() > 0)
            common = std::max(common, spec.theta.maxCoeff());
        if (spec.tau.size() > 0)
            common = std::max(common, spec.tau.maxCoeff());
        return base + std::min(m, p) * common;
    }
    }
    return base;
}

} // namespace hrom
