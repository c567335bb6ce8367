// frame_extract: command-line front end for the framex library.
//
// Exit codes: 0 ok, 1 internal or self-test failure, 2 usage or parse error,
// 3 input is not a frame, 4 step or scan budget exhausted.

#include "framex/framex.hpp"
#include "framex/io.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>

namespace {

using namespace framex;
using io::Json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotFrame = 3;
constexpr int kExitBudget = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double tolerance_from_env(double fallback)
{
    const char* raw = std::getenv("FRAME_EXTRACT_TOL");
    if (raw == nullptr || *raw == '\0') return fallback;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !(v > 0.0) || !std::isfinite(v))
        throw UsageError(std::string("FRAME_EXTRACT_TOL must be a positive number, got '") + raw + "'");
    return v;
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

void require_open_unit(double v, const char* name)
{
    if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(name) + " must lie in (0, 1)");
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeOptions {
    std::string file;
    std::string output;
};

int run_analyze(const AnalyzeOptions& o)
{
    const double tol = tolerance_from_env(1e-8);
    const Frame frame = io::read_frame_file(o.file);
    if (frame.empty()) throw io::ParseError("frame has no vectors", 0, 0);
    const FrameBounds fb = frame_bounds(frame);

    Json j = io::header("analyze");
    j["dim"] = frame.dim();
    j["size"] = frame.size();
    j["A"] = fb.lower;
    j["B"] = fb.upper;
    j["frame_constant"] = fb.frame_constant;
    j["is_frame"] = fb.is_frame;
    j["tight"] = fb.is_frame && fb.upper / fb.lower <= 1.0 + tol;
    j["parseval"] = is_parseval(frame, tol);
    j["tolerance"] = tol;
    j["sum_sq_norms"] = frame.synthesis().squaredNorm();
    j["dimension_identity"] = fb.is_frame ? Json(dimension_identity(tighten(frame))) : Json(nullptr);
    emit(io::dump(j), o.output);
    return fb.is_frame ? kExitOk : kExitNotFrame;
}

// ---- extract -------------------------------------------------------------

struct ExtractOptions {
    std::string file;
    std::vector<Index> random;  // {n, m}
    std::uint64_t seed = 0;
    ExtractionParams params;
    bool timing = false;
    std::string output;
};

int run_extract(const ExtractOptions& o)
{
    require_open_unit(o.params.epsilon, "--epsilon");
    if (!(o.params.nu >= 0.0)) throw UsageError("--nu must be >= 0");
    if (!(o.params.c1 > 0.0)) throw UsageError("--c1 must be positive");
    if (!(o.params.c2 > 0.0 && o.params.c2 < 1.0)) throw UsageError("--c2 must lie in (0, 1)");
    if (o.file.empty() == o.random.empty()) throw UsageError("give exactly one of FILE or --random N M");

    Frame frame;
    if (!o.random.empty()) {
        if (o.random[0] == 0 || o.random[1] < o.random[0]) throw UsageError("--random needs 0 < N <= M");
        Rng rng(o.seed);
        frame = Frame(random::row_orthonormal(rng, static_cast<Eigen::Index>(o.random[0]),
                                              static_cast<Eigen::Index>(o.random[1])));
    } else {
        frame = io::read_frame_file(o.file);
    }

    const auto start = std::chrono::steady_clock::now();
    const ExtractionReport report = extract_orthogonal_subset(frame, o.params);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!report.final_sigma.empty()) {
        const EquivalenceCertificate again = recertify(frame, report);
        const double a = report.certificate.constant;
        if (std::isfinite(a) != std::isfinite(again.constant) ||
            (std::isfinite(a) && std::abs(a - again.constant) > 1e-10 * std::max(1.0, a))) {
            std::cerr << "error: certificate failed re-certification\n";
            return kExitInternal;
        }
    }

    Json j = io::to_json(report);
    if (!o.random.empty()) {
        Json src;
        src["kind"] = "random_row_orthonormal";
        src["n"] = o.random[0];
        src["m"] = o.random[1];
        src["seed"] = o.seed;
        j["source"] = std::move(src);
    } else {
        j["source"] = o.file;
    }
    if (o.timing) j["wall_time_s"] = seconds;
    emit(io::dump(j), o.output);
    return report.stopped_reason == StopReason::target_reached ? kExitOk : kExitBudget;
}

// ---- greedy --------------------------------------------------------------

struct GreedyOptions {
    std::string generator = "projected-basis";
    std::string file;
    bool cyclic = false;
    Index terms = 12;
    Index scan_limit = 100000;
    Index ambient = 200;
    Index rank = 40;
    std::uint64_t seed = 0;
    double tail_epsilon = 0.1;
    std::string output;
};

int run_greedy(const GreedyOptions& o)
{
    if (o.terms < 1 || o.terms > kMaxGreedyTerms)
        throw UsageError("--terms must lie in [1, " + std::to_string(kMaxGreedyTerms) + "]");
    if (o.scan_limit < 1) throw UsageError("--scan-limit must be >= 1");
    require_open_unit(o.tail_epsilon, "--tail-epsilon");

    std::unique_ptr<FrameSequence> seq;
    if (o.generator == "file") {
        if (o.file.empty()) throw UsageError("--generator file needs --file");
        seq = std::make_unique<FrameFileSequence>(io::read_frame_file(o.file), o.cyclic);
    } else {
        if (o.rank < 1 || o.rank > o.ambient) throw UsageError("--rank must lie in [1, --ambient]");
        seq = std::make_unique<ProjectedBasisSequence>(o.seed, o.ambient, o.rank);
    }

    const GreedySelection sel = greedy_subsequence(*seq, o.terms, o.scan_limit);
    const StabilityReport stab = stability_check(sel);
    const std::optional<Index> k0 = tail_index(sel, o.tail_epsilon);

    Json j = io::to_json(sel, stab, k0, o.tail_epsilon);
    Json src;
    src["generator"] = o.generator;
    if (o.generator == "file") {
        src["file"] = o.file;
        src["cyclic"] = o.cyclic;
    } else {
        src["ambient"] = o.ambient;
        src["rank"] = o.rank;
        src["seed"] = o.seed;
    }
    src["scan_limit"] = o.scan_limit;
    j["source"] = std::move(src);
    const std::string text = io::dump(j);

    // Reload the serialized selection and certify it again.
    const StabilityReport again = stability_check(io::greedy_from_json(Json::parse(text)));
    const double a = stab.certificate.constant, b = again.certificate.constant;
    if (again.stable != stab.stable || std::isfinite(a) != std::isfinite(b) ||
        (std::isfinite(a) && std::abs(a - b) > 1e-12 * std::max(1.0, a))) {
        std::cerr << "error: greedy selection failed re-certification after reload\n";
        return kExitInternal;
    }
    emit(text, o.output);
    return sel.status == GreedyStatus::complete ? kExitOk : kExitBudget;
}

// ---- counterexample ------------------------------------------------------

struct CounterexampleOptions {
    std::string kind;
    Index blocks = 0;
    Index n = 0;
    bool diagnose = false;
    std::vector<double> epsilons;
    bool csv = false;
    std::string frame_output;
    std::string output;
};

int run_counterexample(const CounterexampleOptions& o)
{
    if (o.kind == "bracketless") {
        if (o.blocks < 2) throw UsageError("--kind bracketless needs --blocks N with N >= 2");
        const BracketlessFrame bf = bracketless_frame(o.blocks);
        const Matrix s = bf.frame.frame_operator();
        const Matrix off = s - Matrix(s.diagonal().asDiagonal());
        if (off.cwiseAbs().maxCoeff() > 1e-12) {
            std::cerr << "error: constructed frame operator is not diagonal\n";
            return kExitInternal;
        }
        if (!o.diagnose) {
            if (o.csv) {
                emit(io::frame_to_csv(bf.frame), o.output);
            } else {
                emit(io::dump(io::frame_to_json(bf.frame)), o.output);
            }
            return kExitOk;
        }
        if (!o.frame_output.empty())
            emit(io::has_csv_extension(o.frame_output) ? io::frame_to_csv(bf.frame)
                                                       : io::dump(io::frame_to_json(bf.frame)),
                 o.frame_output);
        const IndexList subset = minimal_complete_subset(bf.layout);
        const CompletenessReport comp = completeness_check(bf, subset);
        if (!comp.complete) {
            std::cerr << "error: reference subsequence is not complete\n";
            return kExitInternal;
        }
        std::vector<BracketDiagnostics> rows;
        for (Index n = 2; n + 2 <= o.blocks; ++n)
            rows.push_back(bracket_diagnostics(bf, subset, n, midpoint_bracket(bf.layout, n)));
        if (o.csv) {
            emit(io::diagnostics_csv(rows), o.output);
            return kExitOk;
        }
        Json j = io::header("counterexample");
        j["kind"] = "bracketless";
        j["blocks"] = o.blocks;
        j["ambient_dim"] = bf.layout.ambient_dim();
        j["vector_count"] = bf.layout.vector_count();
        j["frame_bounds"] = io::to_json(frame_bounds(bf.frame));
        j["subsequence"] = io::detail::index_array(subset);
        j["completeness"] = io::to_json(comp);
        Json diag = Json::array();
        for (const BracketDiagnostics& d : rows) diag.push_back(io::to_json(d));
        j["diagnostics"] = std::move(diag);
        emit(io::dump(j), o.output);
        return kExitOk;
    }
    if (o.kind == "cc") {
        if (o.n < 2) throw UsageError("--kind cc needs --n n with n >= 2");
        const Frame f = casazza_christensen_frame(o.n);
        if (!is_parseval(f, 1e-10)) {
            std::cerr << "error: constructed frame is not Parseval\n";
            return kExitInternal;
        }
        if (!o.diagnose) {
            if (o.csv) {
                emit(io::frame_to_csv(f), o.output);
            } else {
                emit(io::dump(io::frame_to_json(f)), o.output);
            }
            return kExitOk;
        }
        if (!o.frame_output.empty())
            emit(io::has_csv_extension(o.frame_output) ? io::frame_to_csv(f) : io::dump(io::frame_to_json(f)),
                 o.frame_output);
        const std::vector<double> eps = o.epsilons.empty() ? std::vector<double>{0.5, 0.25, 0.1} : o.epsilons;
        for (double e : eps) require_open_unit(e, "--epsilon");
        IndexList first(o.n - 1);
        std::iota(first.begin(), first.end(), Index{0});
        const EquivalenceCertificate cert = equivalence_certificate(linalg::select_columns(f.synthesis(), first));
        if (o.csv) {
            std::string out = "n,epsilon,k,norm_sq,closed_form,bound,holds\n";
            for (double e : eps) {
                const PartialSumCheck c = casazza_christensen_partial_sum(o.n, e);
                out += std::to_string(o.n) + ',' + io::format_double(e) + ',' + std::to_string(c.k) + ',' +
                       io::format_double(c.norm_sq) + ',' + io::format_double(c.closed_form) + ',' +
                       io::format_double(c.bound) + ',' + (c.holds ? "true" : "false") + '\n';
            }
            emit(out, o.output);
            return kExitOk;
        }
        Json j = io::header("counterexample");
        j["kind"] = "cc";
        j["n"] = o.n;
        j["frame_bounds"] = io::to_json(frame_bounds(f));
        j["first_n_minus_1_certificate"] = io::to_json(cert);
        Json checks = Json::array();
        for (double e : eps) {
            Json c = io::to_json(casazza_christensen_partial_sum(o.n, e));
            Json row;
            row["epsilon"] = e;
            for (auto it = c.begin(); it != c.end(); ++it) row[it.key()] = it.value();
            checks.push_back(std::move(row));
        }
        j["partial_sums"] = std::move(checks);
        emit(io::dump(j), o.output);
        return kExitOk;
    }
    throw UsageError("--kind must be bracketless or cc");
}

// ---- selftest ------------------------------------------------------------

int run_selftest()
{
    int failures = 0;
    const auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
        if (!ok) ++failures;
    };

    {
        // Greedy Lunin against the exhaustive optimum on small instances.
        SelectionConfig greedy_cfg;
        greedy_cfg.exhaustive_limit = 1;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            Rng rng(1000 + s);
            const Matrix a = rng.gaussian(3, 8);
            const double opt = brute_force_subset_oracle(a, 3, SubsetObjective::min_sigma_max).achieved_value;
            const double got = lunin_select(a, 3, greedy_cfg).achieved_value;
            worst = std::max(worst, got / opt);
        }
        report("lunin_vs_oracle", worst <= 2.0, "worst ratio " + io::format_double(worst));
    }
    {
        // Exhaustive Bourgain-Tzafriri against independent enumeration.
        bool ok = true;
        for (std::uint64_t s = 0; s < 10; ++s) {
            Rng rng(2000 + s);
            const Matrix a = random::unit_columns(rng, 3, 7);
            const SubsetSelection bt = bt_select(a, 0.3, SelectionConfig{});
            Index best = 0;
            for (Index size = 3; size >= 1 && best == 0; --size)
                linalg::for_each_combination(7, size, [&](std::span<const Index> c) {
                    if (linalg::sigma_min_columns(linalg::select_columns(a, c)) >= 0.3) best = size;
                    return best == 0;
                });
            ok = ok && bt.indices.size() == best;
        }
        report("bt_vs_enumeration", ok, "maximum feasible cardinality");
    }
    {
        Rng rng(3000);
        const Matrix p = random::projection(rng, 16, 5);
        const double d = dimension_identity(frame_from_projection(p));
        report("dimension_identity", std::abs(d - 5.0) <= 1e-8 * 5.0, "sum = " + io::format_double(d));
    }
    {
        const Frame onb(Matrix::Identity(6, 6));
        ExtractionParams params;
        params.epsilon = 0.1;
        const ExtractionReport r = extract_orthogonal_subset(onb, params);
        report("extract_orthonormal_basis",
               r.final_sigma.size() == 6 && std::abs(r.certificate.constant - 1.0) <= 1e-8,
               "|sigma| = " + std::to_string(r.final_sigma.size()));
    }
    {
        bool ok = true;
        for (Index n : {8, 16, 32})
            for (double e : {0.5, 0.25, 0.1}) {
                const PartialSumCheck c = casazza_christensen_partial_sum(n, e);
                ok = ok && c.holds && std::abs(c.norm_sq - c.closed_form) <= 1e-9;
            }
        report("partial_sum_identity", ok, "closed form and bound");
    }
    {
        const BracketlessFrame bf = bracketless_frame(8);
        const Matrix s = bf.frame.frame_operator();
        bool ok = (s - Matrix(s.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-12;
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            ok = ok && (std::abs(s(i, i) - 1.0) <= 1e-12 || std::abs(s(i, i) - 2.0) <= 1e-12);
        report("bracketless_frame_operator", ok, "diagonal with entries 1 and 2");
    }
    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << '\n';
    return failures == 0 ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Extract well-conditioned near-orthogonal subsystems from frames"};
    app.require_subcommand(1);
    bool parallel = false;
    app.add_flag("--parallel", parallel,
                 "Accepted for compatibility; enumeration always runs sequentially");

    AnalyzeOptions ao;
    auto* analyze = app.add_subcommand("analyze", "Frame bounds, tightness and the dimension identity");
    analyze->add_option("file", ao.file, "Frame file (.json or .csv)")->required();
    analyze->add_option("-o,--output", ao.output, "Write the report here instead of stdout");

    ExtractOptions eo;
    auto* extract = app.add_subcommand("extract", "Extract a near-orthogonal subsystem");
    extract->add_option("file", eo.file, "Frame file (.json or .csv)");
    extract->add_option("--random", eo.random, "Random row-orthonormal N x M frame instead of a file")
        ->expected(2);
    extract->add_option("--seed", eo.seed, "Seed for --random");
    extract->add_option("--epsilon", eo.params.epsilon, "Fraction of the dimension that may be lost");
    extract->add_option("--nu", eo.params.nu, "Norm slack of the splitting step");
    extract->add_option("--c1", eo.params.c1, "Restriction-norm calibration constant");
    extract->add_option("--c2", eo.params.c2, "Restricted-invertibility calibration constant");
    extract->add_option("--max-steps", eo.params.max_steps, "Step budget (0 = default)");
    extract->add_flag("--timing", eo.timing, "Include wall time in the report");
    extract->add_option("-o,--output", eo.output, "Write the report here instead of stdout");

    GreedyOptions go;
    auto* greedy = app.add_subcommand("greedy", "Greedy almost-orthonormal subsequence of a frame stream");
    greedy->add_option("--generator", go.generator, "Stream source")
        ->check(CLI::IsMember({"file", "projected-basis"}));
    greedy->add_option("--file", go.file, "Frame file for --generator file");
    greedy->add_flag("--cyclic", go.cyclic, "Replay the file cyclically");
    greedy->add_option("--terms,-K", go.terms, "Number of terms to select");
    greedy->add_option("--scan-limit", go.scan_limit, "Maximum number of stream elements to inspect");
    greedy->add_option("--ambient", go.ambient, "Block dimension of the projected-basis generator");
    greedy->add_option("--rank", go.rank, "Projection rank of the projected-basis generator");
    greedy->add_option("--seed", go.seed, "Seed of the projected-basis generator");
    greedy->add_option("--tail-epsilon", go.tail_epsilon, "Report the first tail with C <= 1/(1 - eps)");
    greedy->add_option("-o,--output", go.output, "Write the report here instead of stdout");

    CounterexampleOptions co;
    auto* counter = app.add_subcommand("counterexample", "Build the explicit counterexample frames");
    counter->add_option("--kind", co.kind, "bracketless or cc")
        ->required()
        ->check(CLI::IsMember({"bracketless", "cc"}));
    counter->add_option("--blocks", co.blocks, "Number of blocks N (bracketless)");
    counter->add_option("--n", co.n, "Dimension n (cc)");
    counter->add_flag("--diagnose", co.diagnose, "Emit diagnostics instead of the frame");
    counter->add_option("--epsilon", co.epsilons, "Epsilon values for the partial-sum check (cc)");
    counter->add_flag("--csv", co.csv, "CSV output");
    counter->add_option("--frame-output", co.frame_output, "With --diagnose, also write the frame here");
    counter->add_option("-o,--output", co.output, "Write the output here instead of stdout");

    auto* selftest = app.add_subcommand("selftest", "Compare the selection routines with oracles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*analyze) return run_analyze(ao);
        if (*extract) return run_extract(eo);
        if (*greedy) return run_greedy(go);
        if (*counter) return run_counterexample(co);
        if (*selftest) return run_selftest();
    } catch (const io::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotAFrameError& e) {
        std::cerr << "not a frame: " << e.what() << '\n';
        return kExitNotFrame;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
