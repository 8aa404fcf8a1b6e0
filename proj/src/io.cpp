#include "hrom/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace hrom
{

namespace
{

using json = nlohmann::json;
namespace fs = std::filesystem;

template <typename U>
U to_little(U v)
{
    if constexpr (std::endian::native == std::endian::little)
        return v;
    U out = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
        out |= ((v >> (8 * b)) & U(0xff)) << (8 * (sizeof(U) - 1 - b));
    return out;
}

void put_f32(std::string& buf, float v)
{
    const auto bits = to_little(std::bit_cast<std::uint32_t>(v));
    char bytes[4];
    std::memcpy(bytes, &bits, 4);
    buf.append(bytes, 4);
}

void put_f64(std::string& buf, double v)
{
    const auto bits = to_little(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    buf.append(bytes, 8);
}

float get_f32(const std::string& buf, std::size_t offset)
{
    std::uint32_t bits;
    std::memcpy(&bits, buf.data() + offset, 4);
    return std::bit_cast<float>(to_little(bits));
}

double get_f64(const std::string& buf, std::size_t offset)
{
    std::uint64_t bits;
    std::memcpy(&bits, buf.data() + offset, 8);
    return std::bit_cast<double>(to_little(bits));
}

std::string read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw format_error("cannot open '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw format_error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw format_error("failed writing '" + path.string() + "'");
}

fs::path payload_name(const fs::path& header_path)
{
    fs::path name = header_path.filename();
    // "data.ir.json" -> "data.ir.bin"
    if (name.extension() == ".json")
        name.replace_extension();
    name += ".bin";
    return name;
}

template <typename U>
U field(const json& doc, const char* key, const std::string& what)
{
    if (!doc.contains(key))
        throw format_error(what + ": missing field '" + key + "'");
    try
    {
        return doc.at(key).get<U>();
    }
    catch (const json::exception& e)
    {
        throw format_error(what + ": field '" + key + "' has the wrong type");
    }
}

void check_version(const json& doc, const std::string& what)
{
    const int version = field<int>(doc, "format_version", what);
    if (version != format_version)
        throw format_error(what + ": unknown format_version " + std::to_string(version));
}

void check_payload_size(const std::string& bytes, std::size_t expected, const std::string& what)
{
    if (bytes.size() != expected)
        throw format_error(what + ": payload length mismatch, expected " +
                           std::to_string(expected) + " bytes, found " +
                           std::to_string(bytes.size()));
}

template <typename T>
void write_ir_impl(const fs::path& header_path, const MarkovSequence<T>& h)
{
    const fs::path payload = payload_name(header_path);
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(4 * h.length() * h.outputs() * h.inputs()));
    for (Index t = 0; t < h.length(); ++t)
        for (Index i = 0; i < h.outputs(); ++i)
            for (Index j = 0; j < h.inputs(); ++j)
                put_f32(bytes, static_cast<float>(h[t](i, j)));

    json header = {{"format_version", format_version},
                   {"N", h.length()},
                   {"p", h.outputs()},
                   {"m", h.inputs()},
                   {"sample_rate", h.sample_rate()},
                   {"byte_order", "little"},
                   {"precision", "f32"},
                   {"payload", payload.string()}};
    write_bytes(header_path.parent_path() / payload, bytes);
    write_text(header_path, header.dump(2) + "\n");
}

json matrix_entry(std::size_t offset, const Mat<double>& M)
{
    return {{"offset", offset}, {"rows", M.rows()}, {"cols", M.cols()}};
}

Mat<double> matrix_at(const std::string& bytes, const json& entry, const std::string& name,
                      Index rows, Index cols, const std::string& what)
{
    const auto offset = field<std::size_t>(entry, "offset", what + " matrix " + name);
    const auto r = field<Index>(entry, "rows", what + " matrix " + name);
    const auto c = field<Index>(entry, "cols", what + " matrix " + name);
    if (r != rows || c != cols)
        throw format_error(what + ": matrix " + name + " is " + std::to_string(r) + "x" +
                           std::to_string(c) + ", expected " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    const std::size_t need = static_cast<std::size_t>(r * c) * 8;
    if (offset + need > bytes.size())
        throw format_error(what + ": matrix " + name + " needs bytes [" +
                           std::to_string(offset) + ", " + std::to_string(offset + need) +
                           ") but the payload holds " + std::to_string(bytes.size()));
    Mat<double> M(r, c);
    std::size_t at = offset;
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j, at += 8)
        {
            M(i, j) = get_f64(bytes, at);
            if (!std::isfinite(M(i, j)))
                throw format_error(what + ": non-finite value in " + name + " at byte offset " +
                                   std::to_string(at));
        }
    return M;
}

json index_vector_json(const IndexVector& v)
{
    json out = json::array();
    for (Index k = 0; k < v.size(); ++k)
        out.push_back(v(k));
    return out;
}

json index_matrix_json(const IndexMatrix& M)
{
    json out = json::array();
    for (Index i = 0; i < M.rows(); ++i)
    {
        json row = json::array();
        for (Index j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

IndexVector index_vector_from(const json& doc, const std::string& what)
{
    if (!doc.is_array())
        throw format_error(what + " must be an array");
    IndexVector v(static_cast<Index>(doc.size()));
    for (std::size_t k = 0; k < doc.size(); ++k)
    {
        if (!doc[k].is_number_integer())
            throw format_error(what + " must hold integers");
        v(static_cast<Index>(k)) = doc[k].get<Index>();
    }
    return v;
}

IndexMatrix index_matrix_from(const json& doc, const std::string& what)
{
    if (!doc.is_array())
        throw format_error(what + " must be an array of rows");
    const auto rows = static_cast<Index>(doc.size());
    const Index cols = rows > 0 ? static_cast<Index>(doc[0].size()) : 0;
    IndexMatrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        const IndexVector row = index_vector_from(doc[static_cast<std::size_t>(i)], what);
        if (row.size() != cols)
            throw format_error(what + " rows have different lengths");
        M.row(i) = row.transpose();
    }
    return M;
}

std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_text(const fs::path& path, const std::string& text)
{
    write_bytes(path, text);
}

json read_json(const fs::path& path)
{
    const std::string text = read_bytes(path);
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw format_error("'" + path.string() + "' is not valid JSON at byte " +
                           std::to_string(e.byte));
    }
}

void write_ir(const fs::path& header_path, const MarkovSequence<float>& h)
{
    write_ir_impl(header_path, h);
}

void write_ir(const fs::path& header_path, const MarkovSequence<double>& h)
{
    write_ir_impl(header_path, h);
}

MarkovSequence<float> read_ir(const fs::path& header_path)
{
    const std::string what = "IR container '" + header_path.string() + "'";
    const json header = read_json(header_path);
    check_version(header, what);
    const auto n = field<Index>(header, "N", what);
    const auto p = field<Index>(header, "p", what);
    const auto m = field<Index>(header, "m", what);
    const auto rate = field<double>(header, "sample_rate", what);
    if (n < 1 || p < 1 || m < 1 || !(rate > 0))
        throw format_error(what + ": N, p, m and sample_rate must be positive");
    if (field<std::string>(header, "byte_order", what) != "little")
        throw format_error(what + ": unsupported byte_order");
    if (field<std::string>(header, "precision", what) != "f32")
        throw format_error(what + ": unsupported precision");
    const fs::path payload = header_path.parent_path() / field<std::string>(header, "payload", what);

    const std::string bytes = read_bytes(payload);
    check_payload_size(bytes, static_cast<std::size_t>(4 * n * p * m), what);

    std::vector<Mat<float>> samples(static_cast<std::size_t>(n), Mat<float>(p, m));
    std::size_t at = 0;
    for (Index t = 0; t < n; ++t)
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < m; ++j, at += 4)
            {
                const float v = get_f32(bytes, at);
                if (!std::isfinite(v))
                    throw format_error(what + ": non-finite value at byte offset " +
                                       std::to_string(at));
                samples[static_cast<std::size_t>(t)](i, j) = v;
            }
    return MarkovSequence<float>(std::move(samples), rate);
}

void write_rom(const fs::path& manifest_path, const RomContainer& rom)
{
    const auto& core = rom.model.core();
    const auto& spec = rom.model.spec();
    const fs::path payload = payload_name(manifest_path);

    std::string bytes;
    json matrices;
    for (const auto& [name, M] :
         {std::pair<const char*, const Mat<double>*>{"A", &core.A()}, {"B", &core.B()},
          {"C", &core.C()}, {"D", &core.D()}})
    {
        matrices[name] = matrix_entry(bytes.size(), *M);
        for (Index i = 0; i < M->rows(); ++i)
            for (Index j = 0; j < M->cols(); ++j)
                put_f64(bytes, (*M)(i, j));
    }

    const auto& pv = rom.provenance;
    json provenance = {{"gamma", pv.gamma},
                       {"b", pv.block},
                       {"q", pv.power},
                       {"seed", pv.seed},
                       {"eloo_final", pv.eloo_final},
                       {"etol", pv.etol},
                       {"weighted_norm", pv.weighted_norm},
                       {"sketch_width", pv.sketch_width},
                       {"mode", pv.mode},
                       {"tde_threshold", pv.tde_threshold}};
    provenance["sigma_next"] = pv.sigma_next ? json(*pv.sigma_next) : json(nullptr);

    json manifest = {{"format_version", format_version},
                     {"kind", "hrom.rom"},
                     {"order", core.order()},
                     {"m", core.inputs()},
                     {"p", core.outputs()},
                     {"tau", index_vector_json(spec.tau)},
                     {"theta", index_vector_json(spec.theta)},
                     {"residual", index_matrix_json(spec.residual)},
                     {"provenance", provenance},
                     {"payload",
                      {{"file", payload.string()},
                       {"byte_order", "little"},
                       {"precision", "f64"},
                       {"layout", "row-major"},
                       {"matrices", matrices}}}};
    write_bytes(manifest_path.parent_path() / payload, bytes);
    write_text(manifest_path, manifest.dump(2) + "\n");
}

RomContainer read_rom(const fs::path& manifest_path)
{
    const std::string what = "ROM container '" + manifest_path.string() + "'";
    const json doc = read_json(manifest_path);
    check_version(doc, what);
    if (field<std::string>(doc, "kind", what) != "hrom.rom")
        throw format_error(what + ": not a ROM manifest (kind is not \"hrom.rom\")");
    const auto n = field<Index>(doc, "order", what);
    const auto m = field<Index>(doc, "m", what);
    const auto p = field<Index>(doc, "p", what);
    if (n < 0 || m < 1 || p < 1)
        throw format_error(what + ": invalid dimensions");

    DeadTimeSpec spec;
    spec.tau = index_vector_from(field<json>(doc, "tau", what), what + " tau");
    spec.theta = index_vector_from(field<json>(doc, "theta", what), what + " theta");
    spec.residual = index_matrix_from(field<json>(doc, "residual", what), what + " residual");
    if (spec.tau.size() != m)
        throw format_error(what + ": tau has length " + std::to_string(spec.tau.size()) +
                           ", expected m = " + std::to_string(m));
    if (spec.theta.size() != p)
        throw format_error(what + ": theta has length " + std::to_string(spec.theta.size()) +
                           ", expected p = " + std::to_string(p));
    if (spec.residual.size() != 0 && (spec.residual.rows() != p || spec.residual.cols() != m))
        throw format_error(what + ": residual matrix must be p x m");

    const json payload = field<json>(doc, "payload", what);
    if (field<std::string>(payload, "byte_order", what) != "little" ||
        field<std::string>(payload, "precision", what) != "f64" ||
        field<std::string>(payload, "layout", what) != "row-major")
        throw format_error(what + ": unsupported payload encoding");
    const std::string bytes =
        read_bytes(manifest_path.parent_path() / field<std::string>(payload, "file", what));
    const json matrices = field<json>(payload, "matrices", what);
    const std::size_t expected = static_cast<std::size_t>(n * n + n * m + p * n + p * m) * 8;
    check_payload_size(bytes, expected, what);

    auto get = [&](const char* name, Index r, Index c) {
        return matrix_at(bytes, field<json>(matrices, name, what), name, r, c, what);
    };
    StateSpaceModel<double> core(get("A", n, n), get("B", n, m), get("C", p, n), get("D", p, m));

    RomContainer rom;
    try
    {
        rom.model = StructuredModel<double>(std::move(core), std::move(spec));
    }
    catch (const error& e)
    {
        throw format_error(what + ": " + e.what());
    }

    const json pv = field<json>(doc, "provenance", what);
    auto& out = rom.provenance;
    out.gamma = field<double>(pv, "gamma", what);
    out.block = field<Index>(pv, "b", what);
    out.power = field<int>(pv, "q", what);
    out.seed = field<std::uint64_t>(pv, "seed", what);
    out.eloo_final = field<double>(pv, "eloo_final", what);
    out.etol = pv.value("etol", 0.0);
    out.weighted_norm = pv.value("weighted_norm", 0.0);
    out.sketch_width = pv.value("sketch_width", Index(0));
    out.mode = pv.value("mode", std::string("none"));
    out.tde_threshold = pv.value("tde_threshold", 0.0);
    if (pv.contains("sigma_next") && pv["sigma_next"].is_number())
        out.sigma_next = pv["sigma_next"].get<double>();
    return rom;
}

std::string csv_field(const std::string& value)
{
    if (value.find_first_of(",\"\r\n") == std::string::npos)
        return value;
    std::string out = "\"";
    for (const char c : value)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string export_eval(const std::vector<EvalRecord>& records)
{
    std::ostringstream out;
    out << "scenario,mode,r,dofs,erel_db,eest_db,ekc_db,ekw_db,wall_seconds\r\n";
    for (const auto& rec : records)
        out << csv_field(rec.scenario) << ',' << csv_field(rec.mode) << ',' << rec.r << ','
            << rec.dofs << ',' << format_real(rec.erel_db) << ',' << format_real(rec.eest_db)
            << ',' << format_real(rec.ekc_db) << ',' << format_real(rec.ekw_db) << ','
            << format_real(rec.wall_seconds) << "\r\n";
    return out.str();
}

void write_eval(const fs::path& path, const std::vector<EvalRecord>& records)
{
    write_text(path, export_eval(records));
}

json delays_to_json(const DelayMatrix& delays)
{
    json silent = json::array();
    for (Index i = 0; i < delays.outputs(); ++i)
    {
        json row = json::array();
        for (Index j = 0; j < delays.inputs(); ++j)
            row.push_back(static_cast<bool>(delays.silent()(i, j)));
        silent.push_back(std::move(row));
    }
    return {{"schema", "hrom.delays"},
            {"format_version", format_version},
            {"p", delays.outputs()},
            {"m", delays.inputs()},
            {"delta", index_matrix_json(delays.delta())},
            {"silent", silent}};
}

DelayMatrix delays_from_json(const json& doc)
{
    const std::string what = "delay document";
    check_version(doc, what);
    const IndexMatrix delta = index_matrix_from(field<json>(doc, "delta", what), what + " delta");
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> silent =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(delta.rows(), delta.cols(),
                                                                      false);
    if (doc.contains("silent"))
    {
        const json& s = doc["silent"];
        if (!s.is_array() || static_cast<Index>(s.size()) != delta.rows())
            throw format_error(what + ": silent mask must be p x m");
        for (Index i = 0; i < delta.rows(); ++i)
        {
            const json& row = s[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<Index>(row.size()) != delta.cols())
                throw format_error(what + ": silent mask must be p x m");
            for (Index j = 0; j < delta.cols(); ++j)
                silent(i, j) = row[static_cast<std::size_t>(j)].get<bool>();
        }
    }
    try
    {
        return DelayMatrix(delta, silent);
    }
    catch (const error& e)
    {
        throw format_error(what + ": " + e.what());
    }
}

json spec_to_json(const DeadTimeSpec& spec, DeadTimeMode mode)
{
    return {{"schema", "hrom.deadtimes"},
            {"format_version", format_version},
            {"mode", to_string(mode)},
            {"tau", index_vector_json(spec.tau)},
            {"theta", index_vector_json(spec.theta)},
            {"residual", index_matrix_json(spec.residual)},
            {"extracted", spec.total_extracted()},
            {"residual_total", spec.residual.size() ? spec.total_residual() : Index(0)}};
}

DeadTimeSpec spec_from_json(const json& doc)
{
    const std::string what = "dead-time document";
    check_version(doc, what);
    DeadTimeSpec spec;
    spec.tau = index_vector_from(field<json>(doc, "tau", what), what + " tau");
    spec.theta = index_vector_from(field<json>(doc, "theta", what), what + " theta");
    spec.residual = index_matrix_from(field<json>(doc, "residual", what), what + " residual");
    try
    {
        spec.validate();
    }
    catch (const error& e)
    {
        throw format_error(what + ": " + e.what());
    }
    return spec;
}

} // namespace hrom
