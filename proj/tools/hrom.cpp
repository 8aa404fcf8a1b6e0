///
/// hrom: command-line front end of the reduction pipeline.
///
///     hrom synth   --geometry semicircle -m 4 -p 2 --out data.json
///     hrom delays  --in data.json --out delays.json
///     hrom split   --in delays.json --mode dts --out split.json
///     hrom reduce  --in data.json --mode dts --gamma 0.05 --out rom.json
///     hrom eval    --in data.json --rom rom.json --out eval.csv
///     hrom respond --rom rom.json --omegas linspace:0:3.14159:64 --out tf.csv
///
/// Failures exit with status 1 (2 for usage errors) and print a JSON object
/// {"schema": "hrom.error", "kind": ..., "message": ...} on stderr.
///
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hrom/core.hpp"
#include "hrom/deadtime.hpp"
#include "hrom/io.hpp"
#include "hrom/pipeline.hpp"
#include "hrom/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

/// Sibling file: "dir/rom.json" + ".timing.json" -> "dir/rom.timing.json".
fs::path sibling(const fs::path& path, const std::string& suffix)
{
    fs::path out = path;
    if (out.extension() == ".json")
        out.replace_extension();
    out += suffix;
    return out;
}

void emit(const std::string& text, const std::string& out)
{
    if (out.empty())
        std::cout << text;
    else
        hrom::write_text(out, text);
}

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// "0,0.5,1" or "linspace:a:b:n".
std::vector<double> parse_omegas(const std::string& text)
{
    std::vector<double> out;
    if (text.rfind("linspace:", 0) == 0)
    {
        std::istringstream in(text.substr(9));
        std::string a, b, n;
        if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, n))
            throw hrom::invalid_argument_error("--omegas: expected linspace:start:stop:count");
        const double lo = std::stod(a);
        const double hi = std::stod(b);
        const long count = std::stol(n);
        if (count < 1)
            throw hrom::invalid_argument_error("--omegas: count must be positive");
        for (long k = 0; k < count; ++k)
            out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) /
                                                     static_cast<double>(count - 1));
        return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
    {
        try
        {
            out.push_back(std::stod(item));
        }
        catch (const std::exception&)
        {
            throw hrom::invalid_argument_error("--omegas: cannot parse '" + item + "'");
        }
    }
    if (out.empty())
        throw hrom::invalid_argument_error("--omegas: no frequencies given");
    return out;
}

json index_matrix_json(const hrom::IndexMatrix& M)
{
    json out = json::array();
    for (hrom::Index i = 0; i < M.rows(); ++i)
    {
        json row = json::array();
        for (hrom::Index j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

json index_vector_json(const hrom::IndexVector& v)
{
    json out = json::array();
    for (hrom::Index k = 0; k < v.size(); ++k)
        out.push_back(v(k));
    return out;
}

int report(const std::string& kind, const std::string& message, json extra = json::object())
{
    json doc = {{"schema", "hrom.error"},
                {"format_version", hrom::format_version},
                {"kind", kind},
                {"message", message}};
    doc.update(extra);
    std::cerr << doc.dump() << "\n";
    return 1;
}

struct SynthArgs
{
    std::string geometry = "semicircle";
    hrom::Index inputs = 4;
    hrom::Index outputs = 2;
    hrom::Index modes = 6;
    double fs = 16000;
    double duration = 0.064;
    hrom::Index samples = 0;
    std::uint64_t seed = 0;
    std::string out;
};

void run_synth(const SynthArgs& args)
{
    hrom::SynthConfig config;
    config.geometry = hrom::parse_geometry(args.geometry);
    config.inputs = args.inputs;
    config.outputs = args.outputs;
    config.modes = args.modes;
    config.sample_rate = args.fs;
    config.samples = args.samples > 0
                         ? args.samples
                         : static_cast<hrom::Index>(std::llround(args.fs * args.duration));
    config.seed = args.seed;
    const hrom::SynthData data = hrom::synthesize(config);
    hrom::write_ir(args.out, data.h);

    json truth = {{"schema", "hrom.synth_truth"},
                  {"format_version", hrom::format_version},
                  {"geometry", hrom::to_string(config.geometry)},
                  {"m", config.inputs},
                  {"p", config.outputs},
                  {"modes", config.modes},
                  {"sample_rate", config.sample_rate},
                  {"N", config.samples},
                  {"seed", config.seed},
                  {"speed_of_sound", hrom::speed_of_sound},
                  {"delta", index_matrix_json(data.delta)}};
    if (data.exact_split)
    {
        truth["tau"] = index_vector_json(data.exact_split->tau);
        truth["theta"] = index_vector_json(data.exact_split->theta);
    }
    hrom::write_text(sibling(args.out, ".truth.json"), truth.dump(2) + "\n");
}

struct PipelineArgs
{
    hrom::PipelineConfig config;
    std::string mode = "dts";
    std::string in;
    std::string split;
    std::string out;
};

void run_reduce(PipelineArgs args)
{
    args.config.mode = hrom::parse_dead_time_mode(args.mode);
    const auto h = hrom::read_ir(args.in).cast<double>();

    hrom::ReduceResult result;
    if (args.split.empty())
        result = hrom::reduce(h, args.config);
    else
    {
        const auto start = std::chrono::steady_clock::now();
        const hrom::DeadTimeSpec spec = hrom::spec_from_json(hrom::read_json(args.split));
        const double t_split =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result = hrom::reduce_with_spec(h, spec, args.config);
        result.times.split = t_split;
    }

    hrom::write_rom(args.out, hrom::make_container(result, args.config));

    const auto& era = result.era;
    json times = {{"delays", result.times.delays},
                  {"split", result.times.split},
                  {"rectify", result.times.rectify},
                  {"era", result.times.era},
                  {"assemble", result.times.assemble},
                  {"total", result.times.total()}};
    // Timings live in a sidecar so the ROM itself stays reproducible.
    hrom::write_text(sibling(args.out, ".timing.json"),
                     json({{"schema", "hrom.timing"},
                           {"format_version", hrom::format_version},
                           {"seconds", times}})
                             .dump(2) +
                         "\n");

    json summary = {{"schema", "hrom.reduce_summary"},
                    {"format_version", hrom::format_version},
                    {"order", result.model.core().order()},
                    {"mode", hrom::to_string(args.config.mode)},
                    {"extracted", result.spec.total_extracted()},
                    {"residual_total", result.spec.total_residual()},
                    {"eloo_final", era.eloo_final},
                    {"etol", era.etol_used},
                    {"sketch_width", era.sketch_width},
                    {"capped", era.capped},
                    {"decay_warning", era.decay_warning},
                    {"stability_warning", era.stability_warning},
                    {"seconds", times}};
    std::cout << summary.dump(2) << "\n";
}

struct EvalArgs
{
    std::string in;
    std::string rom;
    std::string scenario;
    std::string out;
    bool append = false;
};

void run_eval(const EvalArgs& args)
{
    const auto h = hrom::read_ir(args.in).cast<double>();
    const hrom::RomContainer rom = hrom::read_rom(args.rom);

    double wall = std::nan("");
    const fs::path timing = sibling(args.rom, ".timing.json");
    if (fs::exists(timing))
    {
        const json doc = hrom::read_json(timing);
        if (doc.contains("seconds") && doc["seconds"].contains("total"))
            wall = doc["seconds"]["total"].get<double>();
    }
    const std::string scenario =
        args.scenario.empty() ? fs::path(args.in).stem().string() : args.scenario;
    const hrom::EvalRecord rec = hrom::evaluate(h, rom, scenario, wall);
    std::string csv = hrom::export_eval({rec});

    if (args.append && !args.out.empty() && fs::exists(args.out) && fs::file_size(args.out) > 0)
    {
        // Drop the header line when extending an existing table.
        csv = csv.substr(csv.find("\r\n") + 2);
        std::ofstream app(args.out, std::ios::binary | std::ios::app);
        app << csv;
        if (!app)
            throw hrom::format_error("failed appending to '" + args.out + "'");
        return;
    }
    emit(csv, args.out);
}

struct RespondArgs
{
    std::string rom;
    std::string omegas = "linspace:0:3.141592653589793:64";
    std::string out;
};

void run_respond(const RespondArgs& args)
{
    const hrom::RomContainer rom = hrom::read_rom(args.rom);
    const std::vector<double> omegas = parse_omegas(args.omegas);
    const hrom::FrequencyResponse G = hrom::frequency_response(rom.model, omegas);

    std::ostringstream csv;
    csv << "omega,output,input,re,im,magnitude_db\r\n";
    for (std::size_t k = 0; k < omegas.size(); ++k)
        for (hrom::Index i = 0; i < G[k].rows(); ++i)
            for (hrom::Index j = 0; j < G[k].cols(); ++j)
            {
                const auto g = G[k](i, j);
                csv << format_real(omegas[k]) << ',' << i << ',' << j << ','
                    << format_real(g.real()) << ',' << format_real(g.imag()) << ','
                    << format_real(hrom::amplitude_db(std::abs(g))) << "\r\n";
            }
    emit(csv.str(), args.out);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hankel-based model order reduction of multichannel impulse responses"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic IR dataset");
    cmd_synth->add_option("--geometry", synth.geometry, "planar | semicircle")
        ->check(CLI::IsMember({"planar", "semicircle"}));
    cmd_synth->add_option("-m,--inputs", synth.inputs, "Number of sources")->check(CLI::PositiveNumber);
    cmd_synth->add_option("-p,--outputs", synth.outputs, "Number of receivers")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--modes", synth.modes, "State dimension of the shared core")
        ->check(CLI::NonNegativeNumber);
    cmd_synth->add_option("--fs", synth.fs, "Sample rate [Hz]")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--duration", synth.duration, "Length [s]")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--samples", synth.samples, "Length in samples (overrides --duration)");
    cmd_synth->add_option("--seed", synth.seed, "Random seed");
    cmd_synth->add_option("--out", synth.out, "IR header path (.json)")->required();

    std::string delays_in, delays_out;
    double delays_threshold = 0.05;
    auto* cmd_delays = app.add_subcommand("delays", "Estimate the delay matrix of an IR dataset");
    cmd_delays->add_option("--in", delays_in, "IR header path")->required();
    cmd_delays->add_option("--threshold", delays_threshold, "Onset threshold relative to channel peak");
    cmd_delays->add_option("--out", delays_out, "Output JSON (stdout if omitted)");

    std::string split_in, split_out, split_mode = "dts";
    auto* cmd_split = app.add_subcommand("split", "Split a delay matrix into input/output dead times");
    cmd_split->add_option("--in", split_in, "Delay-matrix JSON")->required();
    cmd_split->add_option("--mode", split_mode, "none | least-common | dts");
    cmd_split->add_option("--out", split_out, "Output JSON (stdout if omitted)");

    PipelineArgs reduce;
    auto* cmd_reduce = app.add_subcommand("reduce", "Compute a reduced-order model");
    cmd_reduce->add_option("--in", reduce.in, "IR header path")->required();
    cmd_reduce->add_option("--out", reduce.out, "ROM manifest path (.json)")->required();
    cmd_reduce->add_option("--gamma", reduce.config.gamma, "Relative tolerance");
    cmd_reduce->add_option("--block", reduce.config.block, "Sketch block size");
    cmd_reduce->add_option("--power", reduce.config.power, "Power iterations");
    cmd_reduce->add_option("--seed", reduce.config.seed, "Random seed");
    cmd_reduce->add_option("--mode", reduce.mode, "none | least-common | dts");
    cmd_reduce->add_option("--threshold", reduce.config.tde_threshold, "Onset threshold");
    cmd_reduce->add_option("--order", reduce.config.max_order, "Cap on the ROM order (0: adaptive)");
    cmd_reduce->add_option("--split", reduce.split, "Use this dead-time JSON instead of estimating");

    EvalArgs eval;
    auto* cmd_eval = app.add_subcommand("eval", "Evaluate a ROM against IR data");
    cmd_eval->add_option("--in", eval.in, "IR header path")->required();
    cmd_eval->add_option("--rom", eval.rom, "ROM manifest path")->required();
    cmd_eval->add_option("--scenario", eval.scenario, "Scenario label (default: data file stem)");
    cmd_eval->add_option("--out", eval.out, "CSV output (stdout if omitted)");
    cmd_eval->add_flag("--append", eval.append, "Append a row to an existing CSV");

    RespondArgs respond;
    auto* cmd_respond = app.add_subcommand("respond", "Frequency response of a ROM");
    cmd_respond->add_option("--rom", respond.rom, "ROM manifest path")->required();
    cmd_respond->add_option("--omegas", respond.omegas,
                            "Frequencies [rad/sample]: comma list or linspace:start:stop:count");
    cmd_respond->add_option("--out", respond.out, "CSV output (stdout if omitted)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        report("usage", e.what());
        return 2;
    }

    try
    {
        if (*cmd_synth)
            run_synth(synth);
        else if (*cmd_delays)
        {
            const auto h = hrom::read_ir(delays_in);
            const auto delays = hrom::estimate_delays(h, delays_threshold);
            emit(hrom::delays_to_json(delays).dump(2) + "\n", delays_out);
        }
        else if (*cmd_split)
        {
            const auto delays = hrom::delays_from_json(hrom::read_json(split_in));
            const auto mode = hrom::parse_dead_time_mode(split_mode);
            const auto spec = hrom::split_dead_times(delays, mode);
            emit(hrom::spec_to_json(spec, mode).dump(2) + "\n", split_out);
        }
        else if (*cmd_reduce)
            run_reduce(reduce);
        else if (*cmd_eval)
            run_eval(eval);
        else if (*cmd_respond)
            run_respond(respond);
    }
    catch (const hrom::singularity_error& e)
    {
        return report(e.kind(), e.what(), {{"omega", e.omega()}});
    }
    catch (const hrom::tolerance_unreachable_error& e)
    {
        return report(e.kind(), e.what(), {{"last_estimate", e.last_estimate()}});
    }
    catch (const hrom::error& e)
    {
        return report(e.kind(), e.what());
    }
    catch (const std::exception& e)
    {
        return report("internal", e.what());
    }
    return 0;
}
