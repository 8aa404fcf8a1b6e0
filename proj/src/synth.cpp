#include "hrom/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hrom/core.hpp"

namespace hrom
{

namespace
{

constexpr double array_spacing = 0.05;   // receiver spacing of the linear array [m]
constexpr double inner_radius = 1.0;     // semicircle radii [m]
constexpr double outer_radius = 2.0;
constexpr double plane_extent = 1.0;     // edge length of the planar grids [m]
constexpr double plane_distance = 1.0;   // separation of the planar grids [m]

Mat<double> square_grid(Index count, double z)
{
    Mat<double> out(3, count);
    const auto cols = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(count))));
    const auto rows = (count + cols - 1) / cols;
    const double dx = cols > 1 ? plane_extent / static_cast<double>(cols - 1) : 0.0;
    const double dy = rows > 1 ? plane_extent / static_cast<double>(rows - 1) : 0.0;
    for (Index k = 0; k < count; ++k)
    {
        const Index r = k / cols;
        const Index c = k % cols;
        out(0, k) = -0.5 * plane_extent * (cols > 1) + static_cast<double>(c) * dx;
        out(1, k) = -0.5 * plane_extent * (rows > 1) + static_cast<double>(r) * dy;
        out(2, k) = z;
    }
    return out;
}

} // namespace

std::string to_string(Geometry geometry)
{
    return geometry == Geometry::planar ? "planar" : "semicircle";
}

Geometry parse_geometry(const std::string& name)
{
    if (name == "planar")
        return Geometry::planar;
    if (name == "semicircle")
        return Geometry::semicircle;
    throw invalid_argument_error("unknown geometry '" + name + "'");
}

Mat<double> receiver_positions(Geometry geometry, Index count)
{
    if (geometry == Geometry::planar)
        return square_grid(count, 0.0);
    Mat<double> out = Mat<double>::Zero(3, count);
    for (Index i = 0; i < count; ++i)
        out(0, i) = (static_cast<double>(i) - 0.5 * static_cast<double>(count - 1)) * array_spacing;
    return out;
}

Mat<double> source_positions(Geometry geometry, Index count)
{
    if (geometry == Geometry::planar)
        return square_grid(count, plane_distance);
    // First half (rounded up) on the inner semicircle, the rest on the outer one.
    Mat<double> out = Mat<double>::Zero(3, count);
    const Index inner = (count + 1) / 2;
    for (Index k = 0; k < count; ++k)
    {
        const bool on_inner = k < inner;
        const Index slot = on_inner ? k : k - inner;
        const Index slots = on_inner ? inner : count - inner;
        const double angle = std::numbers::pi * (static_cast<double>(slot) + 0.5) /
                             static_cast<double>(slots);
        const double radius = on_inner ? inner_radius : outer_radius;
        out(0, k) = radius * std::cos(angle);
        out(1, k) = radius * std::sin(angle);
    }
    return out;
}

StateSpaceModel<double> random_core(Index modes, Index horizon, std::uint64_t seed)
{
    if (modes < 0)
        throw invalid_argument_error("random_core: modes must be nonnegative");
    if (horizon < 1)
        throw invalid_argument_error("random_core: horizon must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;

    // Slowest pole decays to 1e-6 in amplitude over the horizon; the fastest
    // three times quicker.
    const double slow = std::log(1e-6) / static_cast<double>(horizon);
    auto radius = [&] { return std::exp(slow * (1.0 + 2.0 * uniform(rng))); };

    Mat<double> A = Mat<double>::Zero(modes, modes);
    Index k = 0;
    for (; k + 1 < modes; k += 2)
    {
        const double rho = radius();
        const double w = std::numbers::pi * (0.05 + 0.9 * uniform(rng));
        A(k, k) = rho * std::cos(w);
        A(k, k + 1) = -rho * std::sin(w);
        A(k + 1, k) = rho * std::sin(w);
        A(k + 1, k + 1) = rho * std::cos(w);
    }
    if (k < modes)
        A(k, k) = (uniform(rng) < 0.5 ? -1.0 : 1.0) * radius();

    Mat<double> B(modes, 1);
    Mat<double> C(1, modes);
    for (Index q = 0; q < modes; ++q)
        B(q, 0) = normal(rng);
    for (Index q = 0; q < modes; ++q)
        C(0, q) = normal(rng);

    if (modes > 0)
    {
        // Scale the dynamic part to unit energy, matching the direct impulse.
        const StateSpaceModel<double> raw(A, B, C, Mat<double>::Ones(1, 1));
        const auto h = markov_params(raw, 4 * horizon + 1);
        double energy = 0;
        for (Index t = 1; t < h.length(); ++t)
            energy += h[t](0, 0) * h[t](0, 0);
        if (energy > 0)
            C /= std::sqrt(energy);
    }
    return StateSpaceModel<double>(std::move(A), std::move(B), std::move(C),
                                   Mat<double>::Ones(1, 1));
}

SynthData synthesize(const SynthConfig& config)
{
    const Index m = config.inputs;
    const Index p = config.outputs;
    const Index n = config.samples;
    if (m < 1 || p < 1)
        throw invalid_argument_error("synthesize: need at least one source and one receiver");
    if (n < 2)
        throw invalid_argument_error("synthesize: need at least two samples");
    if (!(config.sample_rate > 0))
        throw invalid_argument_error("synthesize: sample rate must be positive");

    SynthData out;
    const Mat<double> rcv = receiver_positions(config.geometry, p);
    const Mat<double> src = source_positions(config.geometry, m);
    out.distance.resize(p, m);
    out.delta.resize(p, m);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j)
        {
            const double d = (rcv.col(i) - src.col(j)).norm();
            out.distance(i, j) = d;
            out.delta(i, j) =
                static_cast<Index>(std::floor(config.sample_rate * d / speed_of_sound));
        }
    if (out.delta.maxCoeff() >= n)
        throw invalid_argument_error("synthesize: dead times exceed the number of samples");

    out.core = random_core(config.modes, std::max<Index>(1, n / 4), config.seed);
    const auto core = markov_params(out.core, n);

    std::vector<Mat<double>> h(static_cast<std::size_t>(n), Mat<double>::Zero(p, m));
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j)
        {
            const double g = 1.0 / out.distance(i, j);
            for (Index t = out.delta(i, j); t < n; ++t)
                h[static_cast<std::size_t>(t)](i, j) = g * core[t - out.delta(i, j)](0, 0);
        }
    out.h = MarkovSequence<double>(std::move(h), config.sample_rate);

    if (m == 1 || p == 1)
    {
        DeadTimeSpec spec = DeadTimeSpec::none(p, m);
        if (p == 1)
            spec.tau = out.delta.row(0).transpose();
        else
        {
            spec.tau(0) = out.delta.col(0).minCoeff();
            spec.theta = out.delta.col(0).array() - spec.tau(0);
        }
        out.exact_split = spec;
    }
    return out;
}

} // namespace hrom
