#pragma once
//
// Six-method comparison harness (POD, cPOD, POD-DEIM, cPOD-cDEIM, DMD, cDMD)
// and the SVD vs rSVD dimension-scaling study.
//
// Every method of a run shares the same snapshot data and the same
// full-order reference. Offline time covers basis construction and operator
// assembly, online time the reduced solve; the report also carries their sum.
//

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmor/deim.hpp"
#include "rmor/dmd.hpp"
#include "rmor/errors.hpp"
#include "rmor/io.hpp"
#include "rmor/linalg.hpp"
#include "rmor/models.hpp"
#include "rmor/pod.hpp"
#include "rmor/random.hpp"
#include "rmor/rom.hpp"
#include "rmor/sketch.hpp"

namespace rmor {

enum class TestCase { parabolic, elliptic };

enum class Method { pod, cpod, pod_deim, cpod_cdeim, dmd, cdmd };

inline const std::vector< Method >& all_methods()
{
    static const std::vector< Method > all{ Method::pod,        Method::cpod, Method::pod_deim,
                                            Method::cpod_cdeim, Method::dmd,  Method::cdmd };
    return all;
}

inline std::string method_name(Method m)
{
    switch (m)
    {
        case Method::pod: return "POD";
        case Method::cpod: return "cPOD";
        case Method::pod_deim: return "POD-DEIM";
        case Method::cpod_cdeim: return "cPOD-cDEIM";
        case Method::dmd: return "DMD";
        case Method::cdmd: return "cDMD";
    }
    return "?";
}

/// Case-insensitive; '-' and '_' are interchangeable.
inline Method parse_method(std::string name)
{
    for (auto& c : name)
        c = c == '_' ? '-' : static_cast< char >(std::tolower(static_cast< unsigned char >(c)));
    for (Method m : all_methods())
    {
        std::string canon = method_name(m);
        for (auto& c : canon)
            c = static_cast< char >(std::tolower(static_cast< unsigned char >(c)));
        if (canon == name)
            return m;
    }
    throw ConfigError("unknown method '" + name + "'");
}

inline std::vector< Method > parse_method_list(const std::string& csv)
{
    std::vector< Method > out;
    for (const auto& item : detail::split(csv))
        if (!item.empty())
            out.push_back(parse_method(item));
    if (out.empty())
        throw ConfigError("method list is empty");
    return out;
}

inline std::string test_name(TestCase t)
{
    return t == TestCase::parabolic ? "parabolic" : "elliptic";
}

inline TestCase parse_test(const std::string& s)
{
    if (s == "parabolic" || s == "1")
        return TestCase::parabolic;
    if (s == "elliptic" || s == "2")
        return TestCase::elliptic;
    throw ConfigError("unknown test '" + s + "', expected parabolic or elliptic");
}

struct RunConfig
{
    TestCase              test      = TestCase::parabolic;
    Index                 grid      = 50;   // interior points per side
    Index                 snapshots = 500;  // time snapshots, or parameter samples (a perfect square)
    std::vector< Index >  ranks{ 10 };      // one row per (method, rank)
    Index                 nl_rank           = 0;    // 0: same as the state rank
    double                sampling_multiple = 2.0;  // sketch columns = ceil(multiple * rank) + oversample
    Index                 oversample        = 0;
    Index                 power_iters       = 1;
    std::uint64_t         seed              = 0;
    std::vector< Method > methods           = all_methods();
    std::string           out_dir           = "rmor_out";

    // parabolic model
    double final_time = 5.0;
    double theta      = 0.1;
    double mu         = 1.0;

    // elliptic model: held-out parameters drawn log-uniformly from the box
    Index test_samples = 10;

    // scaling study
    std::vector< Index > dimensions{ 500, 1000, 2000 };
    Index                scaling_rank = 10;
    double               byte_budget  = 4e9;

    Index deim_rank(Index rank) const { return nl_rank > 0 ? nl_rank : rank; }

    void validate() const
    {
        if (grid < 2)
            throw ConfigError("grid must be >= 2");
        if (snapshots < 2)
            throw ConfigError("snapshot count must be >= 2");
        if (ranks.empty())
            throw ConfigError("at least one rank is required");
        for (Index r : ranks)
            if (r < 1)
                throw ConfigError("ranks must be >= 1");
        if (nl_rank < 0)
            throw ConfigError("nl_rank must be >= 1 (or 0 for the state rank)");
        if (!(sampling_multiple >= 1.0))
            throw ConfigError("sampling multiple must be >= 1");
        if (oversample < 0 || power_iters < 0)
            throw ConfigError("oversample and power_iters must be >= 0");
        if (methods.empty())
            throw ConfigError("method list is empty");
        if (!(final_time > 0.0) || !(theta > 0.0))
            throw ConfigError("final_time and theta must be positive");
        if (test_samples < 1)
            throw ConfigError("test_samples must be >= 1");
        if (test == TestCase::elliptic)
        {
            const auto side = static_cast< Index >(std::llround(std::sqrt(static_cast< double >(snapshots))));
            if (side * side != snapshots)
                throw ConfigError("elliptic snapshot count must be a perfect square (log grid per axis)");
        }
        if (scaling_rank < 1)
            throw ConfigError("scaling_rank must be >= 1");
        for (std::size_t i = 0; i < dimensions.size(); ++i)
        {
            if (dimensions[i] < 1)
                throw ConfigError("dimensions must be >= 1");
            if (i > 0 && dimensions[i] <= dimensions[i - 1])
                throw ConfigError("dimensions must be strictly ascending");
        }
        if (!(byte_budget > 0.0))
            throw ConfigError("byte_budget must be positive");
    }
};

inline RunConfig config_from_json(const nlohmann::json& j, RunConfig cfg = {})
{
    try
    {
        for (auto it = j.begin(); it != j.end(); ++it)
        {
            const auto& key = it.key();
            const auto& v   = it.value();
            if (key == "test")
                cfg.test = parse_test(v.get< std::string >());
            else if (key == "grid")
                cfg.grid = v.get< Index >();
            else if (key == "snapshots")
                cfg.snapshots = v.get< Index >();
            else if (key == "rank")
                cfg.ranks = { v.get< Index >() };
            else if (key == "ranks")
                cfg.ranks = v.get< std::vector< Index > >();
            else if (key == "nl_rank")
                cfg.nl_rank = v.get< Index >();
            else if (key == "sampling_multiple")
                cfg.sampling_multiple = v.get< double >();
            else if (key == "oversample")
                cfg.oversample = v.get< Index >();
            else if (key == "power_iters")
                cfg.power_iters = v.get< Index >();
            else if (key == "seed")
                cfg.seed = v.get< std::uint64_t >();
            else if (key == "methods")
            {
                cfg.methods.clear();
                if (v.is_string())
                    cfg.methods = parse_method_list(v.get< std::string >());
                else
                    for (const auto& m : v)
                        cfg.methods.push_back(parse_method(m.get< std::string >()));
            }
            else if (key == "out_dir")
                cfg.out_dir = v.get< std::string >();
            else if (key == "final_time")
                cfg.final_time = v.get< double >();
            else if (key == "theta")
                cfg.theta = v.get< double >();
            else if (key == "mu")
                cfg.mu = v.get< double >();
            else if (key == "test_samples")
                cfg.test_samples = v.get< Index >();
            else if (key == "dimensions")
                cfg.dimensions = v.get< std::vector< Index > >();
            else if (key == "scaling_rank")
                cfg.scaling_rank = v.get< Index >();
            else if (key == "byte_budget")
                cfg.byte_budget = v.get< double >();
            else
                throw ConfigError("unknown config key '" + key + "'");
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg)
{
    nlohmann::json methods = nlohmann::json::array();
    for (Method m : cfg.methods)
        methods.push_back(method_name(m));
    return nlohmann::json{ { "test", test_name(cfg.test) },
                           { "grid", cfg.grid },
                           { "snapshots", cfg.snapshots },
                           { "ranks", cfg.ranks },
                           { "nl_rank", cfg.nl_rank },
                           { "sampling_multiple", cfg.sampling_multiple },
                           { "oversample", cfg.oversample },
                           { "power_iters", cfg.power_iters },
                           { "seed", cfg.seed },
                           { "methods", methods },
                           { "out_dir", cfg.out_dir },
                           { "final_time", cfg.final_time },
                           { "theta", cfg.theta },
                           { "mu", cfg.mu },
                           { "test_samples", cfg.test_samples },
                           { "dimensions", cfg.dimensions },
                           { "scaling_rank", cfg.scaling_rank },
                           { "byte_budget", cfg.byte_budget } };
}

// -------------------------------------------------------------------------
// metrics and timing
// -------------------------------------------------------------------------

inline double rel_frobenius_error(const DenseMatrix& reference, const DenseMatrix& approx)
{
    if (reference.rows() != approx.rows() || reference.cols() != approx.cols())
        throw ShapeError("rel_frobenius_error: shapes differ");
    const double ref = reference.norm();
    if (!(ref > 0.0))
        throw DomainError("rel_frobenius_error: reference is zero");
    return (reference - approx).norm() / ref;
}

class Stopwatch
{
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    double seconds() const
    {
        return std::chrono::duration< double >(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Sketch for a rank-`rank` randomized factorization of a rows x cols matrix,
/// width ceil(multiple * rank) + oversample clipped to min(rows, cols).
inline SketchConfig sketch_for(const RunConfig& cfg, Index rank, Index rows, Index cols)
{
    const auto width = static_cast< Index >(std::ceil(cfg.sampling_multiple * static_cast< double >(rank))) +
                       cfg.oversample;
    SketchConfig sk;
    sk.target_rank      = rank;
    sk.oversampling     = std::max< Index >(0, std::min(width, std::min(rows, cols)) - rank);
    sk.power_iterations = cfg.power_iters;
    sk.seed             = cfg.seed;
    return sk;
}

// -------------------------------------------------------------------------
// data shared by all methods of a run
// -------------------------------------------------------------------------

struct BenchData
{
    TestCase       test = TestCase::parabolic;
    Grid2d         grid{ 50 };
    SnapshotMatrix states;
    SnapshotMatrix nonlinear;
    SnapshotMatrix reference;  // parabolic: FOM trajectory; elliptic: held-out solutions, stamps = mu
    double         dt           = 0.0;
    double         generation_s = 0.0;
};

inline ParabolicSpec parabolic_spec(const RunConfig& cfg)
{
    ParabolicSpec spec;
    spec.theta      = cfg.theta;
    spec.mu         = cfg.mu;
    spec.final_time = cfg.final_time;
    return spec;
}

/// Held-out parameters, log-uniform in the admissible box.
inline DenseMatrix held_out_parameters(Index count, std::uint64_t seed)
{
    Rng         rng(seed ^ 0x9e3779b97f4a7c15ULL);
    DenseMatrix mu(2, count);
    const double lo = std::log(parameter_min);
    const double hi = std::log(parameter_max);
    for (Index j = 0; j < count; ++j)
        for (Index i = 0; i < 2; ++i)
            mu(i, j) = std::clamp(std::exp(lo + (hi - lo) * rng.uniform()), parameter_min, parameter_max);
    return mu;
}

inline BenchData generate_bench_data(const RunConfig& cfg)
{
    cfg.validate();
    BenchData data;
    data.test = cfg.test;
    data.grid = Grid2d(cfg.grid);

    Stopwatch clock;
    if (cfg.test == TestCase::parabolic)
    {
        // snapshots at t_j = j dt, j = 0 .. m-1, the last one at T
        data.dt   = cfg.final_time / static_cast< double >(cfg.snapshots - 1);
        auto pair = generate_snapshots_parabolic(data.grid, parabolic_spec(cfg), data.dt, cfg.snapshots);
        data.states    = std::move(pair.states);
        data.nonlinear = std::move(pair.nonlinear);
        data.reference = data.states;
    }
    else
    {
        const auto side   = static_cast< Index >(std::llround(std::sqrt(static_cast< double >(cfg.snapshots))));
        auto       train  = generate_snapshots_elliptic(data.grid, log_spaced_parameters(side));
        if (!train.failures.empty())
            throw ConvergenceError("elliptic training sample " + std::to_string(train.failures.front().sample) +
                                       " failed: " + train.failures.front().message,
                                   std::numeric_limits< double >::quiet_NaN(), 0);
        auto test = generate_snapshots_elliptic(data.grid, held_out_parameters(cfg.test_samples, cfg.seed));
        if (!test.failures.empty())
            throw ConvergenceError("elliptic held-out sample failed: " + test.failures.front().message,
                                   std::numeric_limits< double >::quiet_NaN(), 0);
        data.states    = std::move(train.states);
        data.nonlinear = std::move(train.nonlinear);
        data.reference = std::move(test.states);
    }
    data.generation_s = clock.seconds();
    return data;
}

/// Data written by `simulate`: states.rmor, nonlinear.rmor, reference.rmor.
inline void save_bench_data(const std::filesystem::path& dir, const BenchData& data)
{
    std::filesystem::create_directories(dir);
    save_snapshots(dir / "states.rmor", data.states);
    save_snapshots(dir / "nonlinear.rmor", data.nonlinear);
    save_snapshots(dir / "reference.rmor", data.reference);
}

inline BenchData load_bench_data(const std::filesystem::path& dir, const RunConfig& cfg)
{
    BenchData data;
    data.test      = cfg.test;
    data.grid      = Grid2d(cfg.grid);
    data.states    = load_snapshots(dir / "states.rmor");
    data.nonlinear = load_snapshots(dir / "nonlinear.rmor");
    data.reference = load_snapshots(dir / "reference.rmor");

    const Index n = data.grid.size();
    if (data.states.rows() != n || data.nonlinear.rows() != n || data.reference.rows() != n)
        throw ConfigError("stored snapshots have " + std::to_string(data.states.rows()) +
                          " rows, grid " + std::to_string(cfg.grid) + " needs " + std::to_string(n));
    if (data.states.cols() != data.nonlinear.cols())
        throw ConfigError("stored state and nonlinear snapshot counts differ");
    if (cfg.test == TestCase::parabolic)
    {
        if (data.states.cols() < 2 || data.states.stamps().rows() != 1)
            throw ConfigError("stored parabolic snapshots need time stamps and at least two columns");
        data.dt = data.states.stamps()(0, 1) - data.states.stamps()(0, 0);
    }
    else if (data.reference.stamps().rows() != 2)
        throw ConfigError("stored elliptic reference needs (mu1, mu2) stamps");
    return data;
}

// -------------------------------------------------------------------------
// one method
// -------------------------------------------------------------------------

struct BenchRow
{
    std::string   method;
    Index         rank      = 0;  // basis dimension actually used
    Index         samples   = 0;  // sketch columns (cPOD, cPOD-cDEIM) or measurements (cDMD), else 0
    std::uint64_t seed      = 0;
    double        offline_s = 0.0;
    double        online_s  = 0.0;
    double        rel_frob_err = std::numeric_limits< double >::quiet_NaN();
    std::string   status       = "ok";

    bool failed() const { return status.rfind("error", 0) == 0; }
};

struct MethodResult
{
    BenchRow    row;
    DenseMatrix approx;  // lifted reduced solution, same layout as the reference
};

namespace detail {

struct OfflineProduct
{
    DenseMatrix                   basis;
    std::optional< DeimOperator > deim;
    Index                         samples = 0;
    std::vector< std::string >    notes;
};

inline DenseMatrix pod_modes(const SnapshotMatrix& snap, Index rank, bool randomized, const RunConfig& cfg,
                             Index& samples, std::vector< std::string >& notes, const char* label)
{
    PodBasis b;
    if (randomized)
    {
        const SketchConfig sk = sketch_for(cfg, rank, snap.rows(), snap.cols());
        samples               = std::max(samples, sk.sketch_width());
        b                     = cpod_basis(snap, rank, sk);
    }
    else
        b = pod_basis(snap, rank);
    if (b.status == PodStatus::rank_truncated)
        notes.push_back(std::string(label) + " rank truncated to " + std::to_string(b.rank));
    return b.modes;
}

inline OfflineProduct build_offline(const BenchData& data, const RunConfig& cfg, Method method, Index rank)
{
    OfflineProduct out;
    const bool     randomized = method == Method::cpod || method == Method::cpod_cdeim;

    switch (method)
    {
        case Method::pod:
        case Method::cpod:
        case Method::pod_deim:
        case Method::cpod_cdeim:
            out.basis = pod_modes(data.states, rank, randomized, cfg, out.samples, out.notes, "state");
            break;
        case Method::dmd:
        case Method::cdmd: {
            const DenseMatrix& Y  = data.states.data();
            const Index        m  = Y.cols();
            const DenseMatrix  Y0 = Y.leftCols(m - 1);
            const DenseMatrix  Y1 = Y.rightCols(m - 1);
            DmdModel           model;
            if (method == Method::dmd)
                model = exact_dmd(Y0, Y1, rank);
            else
            {
                const auto p = std::min< Index >(
                    Y.rows(), static_cast< Index >(std::ceil(cfg.sampling_multiple * static_cast< double >(rank))) +
                                  cfg.oversample);
                out.samples = p;
                model = cdmd(Y0, Y1, measurement_matrix(p, Y.rows(), MeasurementEnsemble::gaussian, cfg.seed), rank);
            }
            RealBasis real = realify_modes(model, rank);
            if (real.count == 0)
                throw RankError("realify_modes produced an empty basis");
            if (real.status == RealifyStatus::reduced_rank)
                out.notes.push_back("real basis reduced to " + std::to_string(real.count));
            out.basis = std::move(real.modes);
            break;
        }
    }

    if (method == Method::pod_deim || method == Method::cpod_cdeim)
    {
        const Index k = std::min(cfg.deim_rank(rank), std::min(data.nonlinear.rows(), data.nonlinear.cols()));
        const DenseMatrix U = pod_modes(data.nonlinear, k, method == Method::cpod_cdeim, cfg, out.samples, out.notes,
                                        "nonlinear");
        out.deim = build_deim(U, DeimSelection::greedy);
    }
    return out;
}

} // namespace detail

inline MethodResult run_method(const BenchData& data, const RunConfig& cfg, Method method, Index rank)
{
    MethodResult res;
    res.row.method = method_name(method);
    res.row.rank   = rank;
    res.row.seed   = cfg.seed;

    try
    {
        if (data.test == TestCase::parabolic)
        {
            const auto fom = build_parabolic_fom(data.grid, parabolic_spec(cfg));

            Stopwatch                 offline;
            detail::OfflineProduct    prod = detail::build_offline(data, cfg, method, rank);
            const ReducedModel        rom  = prod.deim ? project_model(fom, prod.basis, *prod.deim)
                                                       : project_model(fom, prod.basis);
            res.row.offline_s = offline.seconds();

            Stopwatch        online;
            const Trajectory traj = integrate_steps(rom, data.dt, data.reference.cols() - 1);
            res.row.online_s      = online.seconds();

            res.approx = lift(prod.basis, traj.states);
            res.row.rank    = prod.basis.cols();
            res.row.samples = prod.samples;
            if (!prod.notes.empty())
                res.row.status = "ok: " + prod.notes.front();
        }
        else
        {
            const DenseMatrix& mu  = data.reference.stamps();
            auto               fom = build_elliptic_fom(data.grid, EllipticSpec{ mu(0, 0), mu(1, 0) });

            Stopwatch              offline;
            detail::OfflineProduct prod = detail::build_offline(data, cfg, method, rank);
            ReducedModel rom = prod.deim ? project_model(fom, prod.basis, *prod.deim) : project_model(fom, prod.basis);
            res.row.offline_s = offline.seconds();

            Stopwatch   online;
            DenseMatrix coeffs(prod.basis.cols(), mu.cols());
            for (Index j = 0; j < mu.cols(); ++j)
            {
                rom.f         = elliptic_nonlinearity(EllipticSpec{ mu(0, j), mu(1, j) });
                coeffs.col(j) = solve_steady_newton(rom).solution;
            }
            res.row.online_s = online.seconds();

            res.approx      = lift(prod.basis, coeffs);
            res.row.rank    = prod.basis.cols();
            res.row.samples = prod.samples;
            if (!prod.notes.empty())
                res.row.status = "ok: " + prod.notes.front();
        }
        res.row.rel_frob_err = rel_frobenius_error(data.reference.data(), res.approx);
    }
    catch (const std::exception& e)
    {
        res.row.status = std::string("error: ") + e.what();
        res.approx.resize(0, 0);
    }
    return res;
}

// -------------------------------------------------------------------------
// the comparison run
// -------------------------------------------------------------------------

struct BenchReport
{
    RunConfig               config;
    double                  generation_s = 0.0;
    std::vector< BenchRow > rows;

    bool any_failure() const
    {
        return std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.failed(); });
    }

    const BenchRow* find(const std::string& method, Index rank) const
    {
        for (const auto& r : rows)
            if (r.method == method && r.rank == rank)
                return &r;
        return nullptr;
    }
};

/// Methods run sequentially, in the configured order, for every rank.
inline BenchReport run_bench(const BenchData& data, const RunConfig& cfg)
{
    cfg.validate();
    BenchReport report;
    report.config       = cfg;
    report.generation_s = data.generation_s;
    for (Index rank : cfg.ranks)
        for (Method m : cfg.methods)
        {
            BenchRow row = run_method(data, cfg, m, rank).row;
            if (row.failed())
                row.rank = rank;
            report.rows.push_back(std::move(row));
        }
    return report;
}

inline constexpr std::string_view bench_csv_header = "method,rank,samples,seed,offline_s,online_s,rel_frob_err,status";

inline std::string bench_to_csv(const std::vector< BenchRow >& rows)
{
    std::string out(bench_csv_header);
    out.push_back('\n');
    for (const auto& r : rows)
    {
        out += r.method + "," + std::to_string(r.rank) + "," + std::to_string(r.samples) + "," +
               std::to_string(r.seed) + "," + detail::format_double(r.offline_s) + "," +
               detail::format_double(r.online_s) + "," + detail::format_double(r.rel_frob_err) + "," +
               csv_escape(r.status) + "\n";
    }
    return out;
}

inline std::vector< BenchRow > bench_from_csv(const std::string& text)
{
    const CsvTable table = parse_csv_table(text);
    if (table.header != detail::split(bench_csv_header))
        throw FormatError("bench csv: unexpected header");
    std::vector< BenchRow > rows;
    std::size_t             line = 1;
    for (const auto& c : table.rows)
    {
        ++line;
        BenchRow r;
        r.method = c[0];
        try
        {
            r.rank    = std::stoll(c[1]);
            r.samples = std::stoll(c[2]);
            r.seed    = std::stoull(c[3]);
        }
        catch (const std::exception&)
        {
            throw FormatError("bench csv line " + std::to_string(line) + ": bad integer field");
        }
        r.offline_s    = detail::parse_double(c[4], line);
        r.online_s     = detail::parse_double(c[5], line);
        r.rel_frob_err = detail::parse_double(c[6], line);
        r.status       = c[7];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::json report_to_json(const BenchReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
    {
        nlohmann::json err = std::isfinite(r.rel_frob_err) ? nlohmann::json(r.rel_frob_err) : nlohmann::json();
        rows.push_back({ { "method", r.method },
                         { "rank", r.rank },
                         { "samples", r.samples },
                         { "seed", r.seed },
                         { "offline_s", r.offline_s },
                         { "online_s", r.online_s },
                         { "total_s", r.offline_s + r.online_s },
                         { "rel_frob_err", err },
                         { "status", r.status } });
    }
    return { { "config", config_to_json(report.config) },
             { "snapshot_generation_s", report.generation_s },
             { "rows", rows } };
}

// -------------------------------------------------------------------------
// dimension scaling: full SVD vs rSVD on square low-rank matrices
// -------------------------------------------------------------------------

struct ScalingRow
{
    Index       n        = 0;
    double      t_svd    = 0.0;
    double      t_rsvd   = 0.0;
    double      speedup  = 0.0;
    double      err_svd  = 0.0;  // relative Frobenius projection error with the leading modes
    double      err_rsvd = 0.0;
    std::string status   = "ok";
};

/// n x n matrix with spectrum 2^{-j/2}, j = 0 .. min(n, 60) - 1, and random singular vectors.
inline DenseMatrix synthetic_square(Index n, std::uint64_t seed)
{
    const Index k  = std::min< Index >(n, 60);
    DenseMatrix Qa = qr_thin(gaussian_test_matrix(n, k, seed)).Q;
    DenseMatrix Qb = qr_thin(gaussian_test_matrix(n, k, seed + 1)).Q;
    Vector      s(k);
    for (Index j = 0; j < k; ++j)
        s(j) = std::pow(2.0, -0.5 * static_cast< double >(j));
    return Qa * s.asDiagonal() * Qb.transpose();
}

inline double projection_error(const DenseMatrix& Y, const DenseMatrix& modes)
{
    return rel_frobenius_error(Y, modes * (modes.transpose() * Y));
}

inline std::vector< ScalingRow > run_scaling(const RunConfig& cfg)
{
    cfg.validate();
    std::vector< ScalingRow > rows;
    for (Index n : cfg.dimensions)
    {
        ScalingRow row;
        row.n = n;
        // Y, U, V and the BDC workspace are each about n^2 doubles
        const double bytes = 4.0 * 8.0 * static_cast< double >(n) * static_cast< double >(n);
        if (bytes > cfg.byte_budget)
        {
            row.status = "skipped: needs ~" + std::to_string(static_cast< long long >(bytes)) +
                         " bytes, budget " + std::to_string(static_cast< long long >(cfg.byte_budget));
            row.t_svd = row.t_rsvd = row.speedup = row.err_svd = row.err_rsvd =
                std::numeric_limits< double >::quiet_NaN();
            rows.push_back(row);
            continue;
        }
        try
        {
            const Index       l = std::min(cfg.scaling_rank, n);
            const DenseMatrix Y = synthetic_square(n, cfg.seed);

            Stopwatch       t_full;
            const SvdResult full = svd_thin(Y);
            row.t_svd            = t_full.seconds();

            // best of three; a single rSVD is short enough to be timer-noise dominated at small n
            const SketchConfig sk = sketch_for(cfg, l, n, n);
            SvdResult          fast;
            row.t_rsvd = std::numeric_limits< double >::infinity();
            for (int rep = 0; rep < 3; ++rep)
            {
                Stopwatch t_fast;
                fast       = rsvd(Y, sk);
                row.t_rsvd = std::min(row.t_rsvd, t_fast.seconds());
            }

            row.speedup  = row.t_svd / row.t_rsvd;
            row.err_svd  = projection_error(Y, full.U.leftCols(l));
            row.err_rsvd = projection_error(Y, fast.U.leftCols(l));
        }
        catch (const std::exception& e)
        {
            row.status = std::string("error: ") + e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

inline constexpr std::string_view scaling_csv_header = "n,t_svd,t_rsvd,speedup,err10_svd,err10_rsvd,status";

inline std::string scaling_to_csv(const std::vector< ScalingRow >& rows)
{
    std::string out(scaling_csv_header);
    out.push_back('\n');
    for (const auto& r : rows)
        out += std::to_string(r.n) + "," + detail::format_double(r.t_svd) + "," + detail::format_double(r.t_rsvd) +
               "," + detail::format_double(r.speedup) + "," + detail::format_double(r.err_svd) + "," +
               detail::format_double(r.err_rsvd) + "," + csv_escape(r.status) + "\n";
    return out;
}

inline std::vector< ScalingRow > scaling_from_csv(const std::string& text)
{
    const CsvTable table = parse_csv_table(text);
    if (table.header != detail::split(scaling_csv_header))
        throw FormatError("scaling csv: unexpected header");
    std::vector< ScalingRow > rows;
    std::size_t               line = 1;
    for (const auto& c : table.rows)
    {
        ++line;
        ScalingRow r;
        try
        {
            r.n = std::stoll(c[0]);
        }
        catch (const std::exception&)
        {
            throw FormatError("scaling csv line " + std::to_string(line) + ": bad dimension");
        }
        r.t_svd    = detail::parse_double(c[1], line);
        r.t_rsvd   = detail::parse_double(c[2], line);
        r.speedup  = detail::parse_double(c[3], line);
        r.err_svd  = detail::parse_double(c[4], line);
        r.err_rsvd = detail::parse_double(c[5], line);
        r.status   = c[6];
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace rmor
