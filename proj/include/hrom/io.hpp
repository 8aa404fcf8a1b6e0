///
/// \file io.hpp
///
/// On-disk formats. All binary payloads are little-endian regardless of host.
///
///  - IR container: JSON header {format_version, N, p, m, sample_rate,
///    byte_order, precision, payload} next to a raw float32 payload laid out
///    t-major, then output i, then input j.
///  - ROM container: JSON manifest with dimensions, dead times, residual
///    delays and provenance, next to a float64 payload holding A, B, C, D
///    row-major at the recorded offsets.
///  - Evaluation CSV (RFC 4180).
///  - Delay-matrix and dead-time JSON documents used by the CLI.
///
#ifndef HROM_IO_HPP
#define HROM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hrom/deadtime.hpp"
#include "hrom/types.hpp"

namespace hrom
{

inline constexpr int format_version = 1;

/// Writes `<stem>.bin` next to the header at `header_path` (float32 payload).
void write_ir(const std::filesystem::path& header_path, const MarkovSequence<float>& h);
void write_ir(const std::filesystem::path& header_path, const MarkovSequence<double>& h);

MarkovSequence<float> read_ir(const std::filesystem::path& header_path);

struct Provenance
{
    double gamma = 0;
    Index block = 0;
    int power = 0;
    std::uint64_t seed = 0;
    double eloo_final = 0;
    double etol = 0;
    double weighted_norm = 0;
    std::optional<double> sigma_next;
    Index sketch_width = 0;
    std::string mode = "none";
    double tde_threshold = 0;
};

struct RomContainer
{
    StructuredModel<double> model;
    Provenance provenance;
};

void write_rom(const std::filesystem::path& manifest_path, const RomContainer& rom);
RomContainer read_rom(const std::filesystem::path& manifest_path);

struct EvalRecord
{
    std::string scenario;
    std::string mode;
    Index r = 0;
    Index dofs = 0;
    double erel_db = 0;
    double eest_db = 0;
    double ekc_db = 0;
    double ekw_db = 0;
    double wall_seconds = 0;
};

/// Header plus one CRLF-terminated row per record. Reals are printed with 17
/// significant digits; missing values print as "nan".
std::string export_eval(const std::vector<EvalRecord>& records);
void write_eval(const std::filesystem::path& path, const std::vector<EvalRecord>& records);

/// Quotes a CSV field when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& value);

nlohmann::json delays_to_json(const DelayMatrix& delays);
DelayMatrix delays_from_json(const nlohmann::json& doc);

nlohmann::json spec_to_json(const DeadTimeSpec& spec, DeadTimeMode mode);
DeadTimeSpec spec_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace hrom

#endif /* HROM_IO_HPP */
