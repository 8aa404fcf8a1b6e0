///
/// \file pipeline.hpp
///
/// End-to-end reduction: delay estimation, dead-time splitting, rectification,
/// adaptive randomized ERA and re-assembly, plus evaluation of the result.
///
#ifndef HROM_PIPELINE_HPP
#define HROM_PIPELINE_HPP

#include <cstdint>
#include <string>

#include "hrom/deadtime.hpp"
#include "hrom/era.hpp"
#include "hrom/io.hpp"
#include "hrom/types.hpp"

namespace hrom
{

struct PipelineConfig
{
    double gamma = 0.05;
    Index block = 32;
    int power = 2;
    std::uint64_t seed = 0;
    DeadTimeMode mode = DeadTimeMode::dts;
    double tde_threshold = 0.05;
    Index max_order = 0; ///< 0: adaptive order only

    void validate() const;
};

/// Wall-clock seconds per stage.
struct StageTimes
{
    double delays = 0;
    double split = 0;
    double rectify = 0;
    double era = 0;
    double assemble = 0;

    double total() const { return delays + split + rectify + era + assemble; }
};

struct ReduceResult
{
    StructuredModel<double> model;
    DelayMatrix delays;
    DeadTimeSpec spec;
    EraResult<real_t> era;
    StageTimes times;
};

ReduceResult reduce(const MarkovSequence<double>& h, const PipelineConfig& config);

/// Reduction with a given dead-time splitting (the delay and split stages are
/// skipped).
ReduceResult reduce_with_spec(const MarkovSequence<double>& h, const DeadTimeSpec& spec,
                              const PipelineConfig& config);

RomContainer make_container(const ReduceResult& result, const PipelineConfig& config);

///
/// Evaluation of a stored ROM against reference data:
///
///  - erel: relative error of the Markov parameters (dB);
///  - eest: stored leave-one-out estimate relative to the weighted norm (dB);
///  - ekc / ekw: corrected / erroneous a priori bounds, using the first
///    discarded singular value when the reduction recorded one and the
///    leave-one-out estimate (an upper proxy for it) otherwise.
///
EvalRecord evaluate(const MarkovSequence<double>& h, const RomContainer& rom,
                    const std::string& scenario, double wall_seconds);

} // namespace hrom

#endif /* HROM_PIPELINE_HPP */
