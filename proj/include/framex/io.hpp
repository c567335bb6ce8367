#pragma once

// Frame files (JSON and CSV), a deterministic JSON writer with fixed float
// formatting, and JSON/CSV serializers for every report type.

#include "framex/counterexamples.hpp"
#include "framex/extraction.hpp"
#include "framex/frame.hpp"
#include "framex/infinite.hpp"
#include "framex/selection.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace framex::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "frame-extract/1";

/// Malformed input. line and column are 1-based; 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                            std::to_string(column) + ")"
                                      : what),
          line_(line), column_(column)
    {
    }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// 17 significant digits; round-trips every double.
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void dump(const Json& j, std::string& out, int indent, int depth)
{
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += Json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                dump(it.value(), out, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
            out += '[';
            bool first = true;
            for (const Json& e : j) {
                if (!first) out += flat && indent >= 0 ? ", " : ",";
                first = false;
                if (!flat) newline(depth + 1);
                dump(e, out, indent, depth + 1);
            }
            if (!flat) newline(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline Json index_array(const IndexList& idx)
{
    Json a = Json::array();
    for (Index i : idx) a.push_back(i);
    return a;
}

inline Json double_array(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline Json vector_array(const Eigen::Ref<const Vector>& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

/// Finite doubles, or null for infinity.
inline double number_or_inf(const Json& j)
{
    return j.is_null() ? kInf : j.get<double>();
}

}  // namespace detail

/// Deterministic serialization: insertion key order, floats with 17
/// significant digits, non-finite floats as null. indent < 0 is compact.
inline std::string dump(const Json& j, int indent = 2)
{
    std::string out;
    detail::dump(j, out, indent, 0);
    if (indent >= 0) out += '\n';
    return out;
}

// ---- frame files ---------------------------------------------------------

/// {"dim": n, "vectors": [[...], ...]}, one array per vector.
inline Frame parse_frame_json(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("malformed JSON", line, col);
    }
    if (!j.is_object()) throw ParseError("frame file must be a JSON object", 1, 1);
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0)
        throw ParseError("\"dim\" must be a positive integer", 0, 0);
    if (!j.contains("vectors") || !j["vectors"].is_array())
        throw ParseError("\"vectors\" must be an array of coordinate arrays", 0, 0);
    const auto dim = static_cast<Index>(j["dim"].get<long long>());
    const Json& vs = j["vectors"];
    Matrix x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(vs.size()));
    for (std::size_t c = 0; c < vs.size(); ++c) {
        const Json& v = vs[c];
        if (!v.is_array() || v.size() != dim)
            throw ParseError("vectors[" + std::to_string(c) + "] must have " + std::to_string(dim) + " coordinates",
                             0, 0);
        for (std::size_t r = 0; r < dim; ++r) {
            if (!v[r].is_number())
                throw ParseError("vectors[" + std::to_string(c) + "][" + std::to_string(r) + "] is not a number", 0,
                                 0);
            const double value = v[r].get<double>();
            if (!std::isfinite(value))
                throw ParseError("vectors[" + std::to_string(c) + "] has a non-finite coordinate", 0, 0);
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value;
        }
    }
    return Frame(std::move(x));
}

/// One vector per line, comma separated; blank lines and lines starting with
/// '#' are skipped. The dimension is the field count of the first vector.
inline Frame parse_frame_csv(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            if (end == text.size()) break;
            continue;
        }
        std::vector<double> row;
        std::size_t col = 0;
        while (true) {
            std::size_t comma = line.find(',', col);
            if (comma == std::string::npos) comma = line.size();
            std::size_t b = col, e = comma;
            while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
            while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
            double v = 0.0;
            const char* s = line.data() + b;
            const auto [ptr, ec] = std::from_chars(s, line.data() + e, v);
            if (b == e || ec != std::errc() || ptr != line.data() + e || !std::isfinite(v))
                throw ParseError("invalid number", line_no, b + 1);
            row.push_back(v);
            if (comma == line.size()) break;
            col = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("expected " + std::to_string(rows.front().size()) + " fields, found " +
                                 std::to_string(row.size()),
                             line_no, 1);
        rows.push_back(std::move(row));
        if (end == text.size()) break;
    }
    if (rows.empty()) throw ParseError("no vectors in CSV input", 0, 0);
    return Frame(rows.front().size(), rows);
}

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path, 0, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bool has_csv_extension(const std::string& path)
{
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline Frame read_frame_file(const std::string& path)
{
    const std::string text = read_text(path);
    return has_csv_extension(path) ? parse_frame_csv(text) : parse_frame_json(text);
}

inline Json frame_to_json(const Frame& frame)
{
    Json j;
    j["dim"] = frame.dim();
    Json vs = Json::array();
    for (Index c = 0; c < frame.size(); ++c) vs.push_back(detail::vector_array(frame.vector(c)));
    j["vectors"] = std::move(vs);
    return j;
}

inline std::string frame_to_csv(const Frame& frame)
{
    std::string out;
    for (Index c = 0; c < frame.size(); ++c) {
        for (Index r = 0; r < frame.dim(); ++r) {
            if (r > 0) out += ',';
            out += format_double(frame.synthesis()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        out += '\n';
    }
    return out;
}

// ---- reports -------------------------------------------------------------

inline Json header(const std::string& command)
{
    Json j;
    j["schema"] = kSchema;
    j["command"] = command;
    return j;
}

inline Json to_json(const EquivalenceCertificate& c)
{
    Json j;
    j["hilbertian"] = c.hilbertian;
    j["besselian"] = c.besselian;
    j["constant"] = c.constant;
    return j;
}

inline EquivalenceCertificate certificate_from_json(const Json& j)
{
    EquivalenceCertificate c;
    c.hilbertian = detail::number_or_inf(j.at("hilbertian"));
    c.besselian = detail::number_or_inf(j.at("besselian"));
    c.constant = detail::number_or_inf(j.at("constant"));
    return c;
}

inline Json to_json(const FrameBounds& fb)
{
    Json j;
    j["A"] = fb.lower;
    j["B"] = fb.upper;
    j["frame_constant"] = fb.frame_constant;
    j["is_frame"] = fb.is_frame;
    return j;
}

inline Json to_json(const SubsetSelection& s)
{
    Json j;
    j["indices"] = detail::index_array(s.indices);
    j["achieved_value"] = s.achieved_value;
    j["method"] = std::string(to_string(s.method));
    j["meets_target"] = s.meets_target;
    return j;
}

inline Json to_json(const ExtractionParams& p)
{
    Json j;
    j["epsilon"] = p.epsilon;
    j["nu"] = p.nu;
    j["delta"] = p.delta();
    j["c1"] = p.c1;
    j["c2"] = p.c2;
    j["max_steps"] = p.step_budget();
    return j;
}

inline Json to_json(const StepRecord& s)
{
    Json j;
    j["k"] = s.k;
    j["tau_size"] = s.tau_size;
    j["tau_lower_bound"] = s.tau_lower_bound;
    j["projection_rank"] = s.projection_rank;
    j["besselian_scale"] = s.besselian_scale;
    j["lunin_value"] = s.lunin_value;
    j["bt_value"] = s.bt_value;
    j["degraded"] = s.degraded;
    j["lunin_indices"] = detail::index_array(s.lunin_indices);
    j["sigma_k"] = detail::index_array(s.sigma);
    return j;
}

inline Json to_json(const ExtractionReport& r)
{
    Json j = header("extract");
    j["params"] = to_json(r.params);
    j["dim"] = r.dim;
    j["frame_size"] = r.frame_size;
    j["split_size"] = r.split_size;
    j["split_lambda"] = r.split_lambda;
    j["split_nu_achieved"] = r.split_nu_achieved;
    Json steps = Json::array();
    for (const StepRecord& s : r.steps) steps.push_back(to_json(s));
    j["steps"] = std::move(steps);
    j["final_sigma"] = detail::index_array(r.final_sigma);
    j["sigma_size"] = r.final_sigma.size();
    j["multiplicity"] = detail::index_array(r.multiplicity);
    j["certificate"] = to_json(r.certificate);
    j["stopped_reason"] = std::string(to_string(r.stopped_reason));
    Json w = Json::array();
    for (const std::string& s : r.warnings) w.push_back(s);
    j["warnings"] = std::move(w);
    return j;
}

inline Json to_json(const GreedySelection& sel, const StabilityReport& stab, std::optional<Index> tail_k0,
                    double tail_epsilon)
{
    Json j = header("greedy");
    j["status"] = std::string(to_string(sel.status));
    j["scanned"] = sel.scanned;
    j["terms"] = sel.indices.size();
    j["indices"] = detail::index_array(sel.indices);
    j["distances"] = detail::double_array(sel.distances);
    Json thresholds = Json::array();
    for (Index k = 1; k <= sel.indices.size(); ++k) thresholds.push_back(k == 1 ? 0.0 : greedy_threshold(k));
    j["thresholds"] = std::move(thresholds);
    j["certificate"] = to_json(stab.certificate);
    j["stable"] = stab.stable;
    Json viol = Json::array();
    for (const StabilityViolation& v : stab.violations) {
        Json e;
        e["i"] = v.i;
        e["k"] = v.k;
        e["inner_product"] = v.inner_product;
        e["bound"] = v.bound;
        viol.push_back(std::move(e));
    }
    j["violations"] = std::move(viol);
    j["tail_epsilon"] = tail_epsilon;
    j["tail_index"] = tail_k0 ? Json(*tail_k0) : Json(nullptr);
    Json vs = Json::array();
    for (const Vector& v : sel.vectors) vs.push_back(detail::vector_array(v));
    j["vectors"] = std::move(vs);
    return j;
}

inline GreedySelection greedy_from_json(const Json& j)
{
    GreedySelection sel;
    const std::string status = j.at("status").get<std::string>();
    sel.status = status == "complete"            ? GreedyStatus::complete
                 : status == "stream_exhausted" ? GreedyStatus::stream_exhausted
                                                 : GreedyStatus::threshold_unattainable;
    sel.scanned = j.at("scanned").get<Index>();
    for (const Json& i : j.at("indices")) sel.indices.push_back(i.get<Index>());
    for (const Json& d : j.at("distances")) sel.distances.push_back(d.get<double>());
    for (const Json& v : j.at("vectors")) {
        Vector x(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i].get<double>();
        sel.vectors.push_back(std::move(x));
    }
    return sel;
}

inline Json to_json(const BracketDiagnostics& d)
{
    Json j;
    j["block"] = d.block;
    j["bracket_point"] = d.bracket_point;
    j["position"] = d.position;
    j["witness"] = d.witness;
    j["dist_head"] = d.dist_head;
    j["dist_tail"] = d.dist_tail;
    j["closeness_constant"] = d.closeness_constant;
    j["min_principal_angle"] = d.min_principal_angle;
    j["projection_norm_lb"] = d.projection_norm_lb;
    return j;
}

inline std::string diagnostics_csv(const std::vector<BracketDiagnostics>& rows)
{
    std::string out = "n,j0,dist_head,dist_tail,projection_norm_lb\n";
    for (const BracketDiagnostics& d : rows) {
        out += std::to_string(d.block) + ',' + std::to_string(d.bracket_point) + ',' + format_double(d.dist_head) +
               ',' + format_double(d.dist_tail) + ',' +
               (std::isfinite(d.projection_norm_lb) ? format_double(d.projection_norm_lb) : std::string("inf")) +
               '\n';
    }
    return out;
}

inline Json to_json(const CompletenessReport& c)
{
    Json j;
    j["complete"] = c.complete;
    j["rank"] = c.rank;
    j["per_block"] = detail::index_array(c.per_block);
    j["violating_blocks"] = detail::index_array(c.violating_blocks);
    return j;
}

inline Json to_json(const PartialSumCheck& c)
{
    Json j;
    j["k"] = c.k;
    j["norm_sq"] = c.norm_sq;
    j["closed_form"] = c.closed_form;
    j["bound"] = c.bound;
    j["holds"] = c.holds;
    return j;
}

}  // namespace framex::io
