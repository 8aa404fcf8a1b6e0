#include "hrom/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "hrom/core.hpp"

namespace hrom
{

namespace
{

using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point start)
{
    return std::chrono::duration<double>(steady::now() - start).count();
}

// sqrt(sum_{k>=1} ||h_k||_F^2), the normalization of the relative error.
double dynamic_norm(const MarkovSequence<double>& h)
{
    double acc = 0;
    for (Index k = 1; k < h.length(); ++k)
        acc += h[k].squaredNorm();
    return std::sqrt(acc);
}

} // namespace

void PipelineConfig::validate() const
{
    if (!(gamma > 0))
        throw invalid_argument_error("gamma must be positive");
    if (block < 1)
        throw invalid_argument_error("block size must be >= 1");
    if (power < 0)
        throw invalid_argument_error("power iterations must be >= 0");
    if (!(tde_threshold > 0 && tde_threshold < 1))
        throw invalid_argument_error("threshold must lie in (0, 1)");
    if (max_order < 0)
        throw invalid_argument_error("order cap must be nonnegative");
}

ReduceResult reduce_with_spec(const MarkovSequence<double>& h, const DeadTimeSpec& spec,
                              const PipelineConfig& config)
{
    config.validate();
    ReduceResult out;
    out.spec = spec;

    auto start = steady::now();
    const MarkovSequence<real_t> rectified = rectify(h, spec).cast<real_t>();
    out.times.rectify = seconds_since(start);

    start = steady::now();
    EraOptions options;
    options.gamma = config.gamma;
    options.block = config.block;
    options.power = config.power;
    options.seed = config.seed;
    options.max_order = config.max_order;
    out.era = adaptive_era(rectified, options);
    out.times.era = seconds_since(start);

    start = steady::now();
    out.model = assemble(out.era.model.template cast<double>(), spec);
    out.times.assemble = seconds_since(start);
    return out;
}

ReduceResult reduce(const MarkovSequence<double>& h, const PipelineConfig& config)
{
    config.validate();
    auto start = steady::now();
    DelayMatrix delays = estimate_delays(h, config.tde_threshold);
    const double t_delays = seconds_since(start);

    start = steady::now();
    const DeadTimeSpec spec = split_dead_times(delays, config.mode);
    const double t_split = seconds_since(start);

    ReduceResult out = reduce_with_spec(h, spec, config);
    out.delays = std::move(delays);
    out.times.delays = t_delays;
    out.times.split = t_split;
    return out;
}

RomContainer make_container(const ReduceResult& result, const PipelineConfig& config)
{
    RomContainer rom;
    rom.model = result.model;
    auto& pv = rom.provenance;
    pv.gamma = config.gamma;
    pv.block = config.block;
    pv.power = config.power;
    pv.seed = config.seed;
    pv.eloo_final = result.era.eloo_final;
    pv.etol = result.era.etol_used;
    pv.weighted_norm = result.era.weighted_norm;
    pv.sigma_next = result.era.sigma_next;
    pv.sketch_width = result.era.sketch_width;
    pv.mode = to_string(config.mode);
    pv.tde_threshold = config.tde_threshold;
    return rom;
}

EvalRecord evaluate(const MarkovSequence<double>& h, const RomContainer& rom,
                    const std::string& scenario, double wall_seconds)
{
    const auto& model = rom.model;
    const auto& pv = rom.provenance;
    const Index r = model.core().order();
    const Index p = model.outputs();
    const Index m = model.inputs();

    EvalRecord rec;
    rec.scenario = scenario;
    rec.mode = pv.mode;
    rec.r = r;
    rec.dofs = count_dofs(parse_dead_time_mode(pv.mode), r, p, m, model.spec());
    rec.erel_db = relative_error_db(h, model);
    rec.eest_db = pv.weighted_norm > 0 ? error_estimate_db(pv.eloo_final, pv.weighted_norm)
                                       : std::numeric_limits<double>::quiet_NaN();
    const double norm = dynamic_norm(h);
    const double sigma = pv.sigma_next ? *pv.sigma_next : pv.eloo_final;
    if (norm > 0)
    {
        rec.ekc_db = kung_bound_corrected(r, m, p, sigma, norm);
        rec.ekw_db = kung_bound_erroneous(r, m, p, sigma, norm);
    }
    else
    {
        rec.ekc_db = std::numeric_limits<double>::quiet_NaN();
        rec.ekw_db = std::numeric_limits<double>::quiet_NaN();
    }
    rec.wall_seconds = wall_seconds;
    return rec;
}

} // namespace hrom
