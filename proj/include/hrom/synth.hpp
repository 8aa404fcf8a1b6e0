///
/// \file synth.hpp
///
/// Synthetic free-field multichannel impulse responses with known dead times.
///
/// Channel (i, j) from source j to receiver i is
///
///     h_ij(t) = g_ij core(t - delta_ij),  delta_ij = floor(fs d_ij / c),  g_ij = 1 / d_ij
///
/// with d_ij the source-receiver distance, c = 343 m/s and `core` the impulse
/// response of a random stable SISO system (unit feedthrough plus n_modes
/// states of exponentially decaying oscillations) shared by all channels.
///
#ifndef HROM_SYNTH_HPP
#define HROM_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "hrom/types.hpp"

namespace hrom
{

inline constexpr double speed_of_sound = 343.0;

enum class Geometry
{
    planar,     ///< two parallel square grids of equal extent facing each other
    semicircle  ///< linear receiver array, sources on two concentric semicircles
};

std::string to_string(Geometry geometry);
Geometry parse_geometry(const std::string& name);

struct SynthConfig
{
    Geometry geometry = Geometry::semicircle;
    Index inputs = 4;   ///< m (sources)
    Index outputs = 2;  ///< p (receivers)
    Index modes = 6;    ///< state dimension of the shared core
    double sample_rate = 16000;
    Index samples = 1024; ///< N
    std::uint64_t seed = 0;
};

struct SynthData
{
    MarkovSequence<double> h;
    IndexMatrix delta;       ///< generator dead times
    Mat<double> distance;    ///< d_ij in metres
    StateSpaceModel<double> core;
    /// Zero-residual splitting when the geometry makes it exact (m = 1 or p = 1).
    std::optional<DeadTimeSpec> exact_split;
};

/// Positions (3 x count) used by the generator.
Mat<double> receiver_positions(Geometry geometry, Index count);
Mat<double> source_positions(Geometry geometry, Index count);

/// Random stable SISO system with D = 1 whose impulse response decays by
/// about 120 dB within `horizon` samples.
StateSpaceModel<double> random_core(Index modes, Index horizon, std::uint64_t seed);

SynthData synthesize(const SynthConfig& config);

} // namespace hrom

#endif /* HROM_SYNTH_HPP */
