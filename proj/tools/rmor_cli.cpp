// rmor_cli: snapshot generation, bases, reduced models, DMD and the
// benchmark / scaling harness.
//
//   rmor_cli bench --test parabolic --grid 50 --snapshots 500 --rank 10 --out out/
//
// Exit codes: 0 success, 1 a method (or computation) failed, 2 bad configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "rmor/rmor.hpp"

namespace fs = std::filesystem;
using namespace rmor;

namespace {

struct Flags
{
    std::string                  config_path;
    std::optional< std::string > test;
    std::optional< Index >       grid, snapshots, nl_rank, oversample, power_iters;
    std::optional< std::string > rank;  // single rank or comma list
    std::optional< double >      sampling_multiple;
    std::optional< std::uint64_t > seed;
    std::optional< std::string >   methods;
    std::optional< std::string >   out;
    std::optional< std::string >   input;
    std::optional< std::string >   dimensions;
};

std::vector< Index > parse_index_list(const std::string& csv, const char* what)
{
    std::vector< Index > out;
    for (const auto& item : detail::split(csv))
    {
        try
        {
            std::size_t used = 0;
            out.push_back(std::stoll(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        }
        catch (const std::exception&)
        {
            throw ConfigError(std::string("bad ") + what + " '" + item + "'");
        }
    }
    return out;
}

RunConfig resolve_config(const Flags& f)
{
    RunConfig cfg;
    if (!f.config_path.empty())
    {
        std::ifstream in(f.config_path);
        if (!in)
            throw ConfigError("cannot read config file " + f.config_path);
        nlohmann::json j;
        try
        {
            in >> j;
        }
        catch (const nlohmann::json::exception& e)
        {
            throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
        }
        cfg = config_from_json(j, cfg);
    }

    // flags win over the file
    if (f.test)
        cfg.test = parse_test(*f.test);
    if (f.grid)
        cfg.grid = *f.grid;
    if (f.snapshots)
        cfg.snapshots = *f.snapshots;
    if (f.rank)
        cfg.ranks = parse_index_list(*f.rank, "rank");
    if (f.nl_rank)
        cfg.nl_rank = *f.nl_rank;
    if (f.sampling_multiple)
        cfg.sampling_multiple = *f.sampling_multiple;
    if (f.oversample)
        cfg.oversample = *f.oversample;
    if (f.power_iters)
        cfg.power_iters = *f.power_iters;
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.methods)
        cfg.methods = parse_method_list(*f.methods);
    if (f.out)
        cfg.out_dir = *f.out;
    if (f.dimensions)
        cfg.dimensions = parse_index_list(*f.dimensions, "dimension");

    cfg.validate();

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec || !fs::is_directory(cfg.out_dir))
        throw ConfigError("output directory " + cfg.out_dir + " is not writable");
    return cfg;
}

BenchData obtain_data(const RunConfig& cfg, const Flags& f)
{
    if (f.input)
        return load_bench_data(*f.input, cfg);
    return generate_bench_data(cfg);
}

void write_text(const fs::path& path, const std::string& text)
{
    detail::write_file_atomic(path, text);
    std::cout << "wrote " << path.string() << "\n";
}

void print_row(const BenchRow& r)
{
    std::cout << r.method << "  rank=" << r.rank << "  samples=" << r.samples << "  offline=" << r.offline_s
              << "s  online=" << r.online_s << "s  err=" << r.rel_frob_err << "  " << r.status << "\n";
}

int cmd_simulate(const RunConfig& cfg)
{
    const BenchData data = generate_bench_data(cfg);
    save_bench_data(cfg.out_dir, data);
    std::cout << test_name(cfg.test) << ": n=" << data.states.rows() << " snapshots=" << data.states.cols()
              << " reference columns=" << data.reference.cols() << " generated in " << data.generation_s << "s\n";
    return 0;
}

int cmd_basis(const RunConfig& cfg, const Flags& f)
{
    const BenchData data = obtain_data(cfg, f);
    const Index     l    = cfg.ranks.front();

    const Vector sigma_full = singular_values(data.states.weighted());
    const auto   sk         = sketch_for(cfg, l, data.states.rows(), data.states.cols());
    const Vector sigma_fast = rsvd(data.states.weighted(), sk).sigma;

    std::string csv = "index,sigma_svd,sigma_rsvd\n";
    for (Index i = 0; i < sigma_full.size(); ++i)
        csv += std::to_string(i) + "," + detail::format_double(sigma_full(i)) + "," +
               (i < sigma_fast.size() ? detail::format_double(sigma_fast(i)) : std::string("nan")) + "\n";
    write_text(fs::path(cfg.out_dir) / "spectrum.csv", csv);

    const PodBasis pod = pod_basis(data.states, l);
    write_matrix_csv(fs::path(cfg.out_dir) / "pod_modes.csv", pod.modes);
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "pod_modes.csv").string() << "\n";

    const Index    k    = std::min(cfg.deim_rank(l), std::min(data.nonlinear.rows(), data.nonlinear.cols()));
    const PodBasis nl   = pod_basis(data.nonlinear, k);
    const auto     deim = build_deim(nl.modes);
    std::string    idx  = "index,row,x1,x2\n";
    for (std::size_t i = 0; i < deim.indices.size(); ++i)
    {
        const Index row = deim.indices[i];
        idx += std::to_string(i) + "," + std::to_string(row) + "," + detail::format_double(data.grid.x1(row)) + "," +
               detail::format_double(data.grid.x2(row)) + "\n";
    }
    write_text(fs::path(cfg.out_dir) / "deim_points.csv", idx);

    std::cout << "POD energy captured by " << pod.rank << " modes: " << energy_ratio(sigma_full, pod.rank)
              << ", DEIM error constant " << deim.error_constant << "\n";
    return 0;
}

int cmd_rom(const RunConfig& cfg, const Flags& f)
{
    const BenchData    data   = obtain_data(cfg, f);
    const Method       method = cfg.methods.front();
    const MethodResult res    = run_method(data, cfg, method, cfg.ranks.front());
    print_row(res.row);
    write_text(fs::path(cfg.out_dir) / "rom.csv", bench_to_csv({ res.row }));
    if (res.approx.size() > 0)
    {
        save_snapshots(fs::path(cfg.out_dir) / "rom_states.rmor",
                       SnapshotMatrix(res.approx, data.reference.stamps(), data.reference.weights()));
        std::cout << "wrote " << (fs::path(cfg.out_dir) / "rom_states.rmor").string() << "\n";
    }
    return res.row.failed() ? 1 : 0;
}

int cmd_dmd(const RunConfig& cfg, const Flags& f)
{
    const BenchData    data = obtain_data(cfg, f);
    const Index        r    = cfg.ranks.front();
    const DenseMatrix& Y    = data.states.data();
    const Index        m    = Y.cols();
    const DenseMatrix  Y0   = Y.leftCols(m - 1);
    const DenseMatrix  Y1   = Y.rightCols(m - 1);

    const auto p = std::min< Index >(
        Y.rows(), static_cast< Index >(std::ceil(cfg.sampling_multiple * static_cast< double >(r))) + cfg.oversample);

    std::string csv = "kind,index,re,im,abs,amplitude_abs\n";
    auto        add = [&](const char* kind, const DmdModel& model) {
        for (Index i = 0; i < model.eigenvalues.size(); ++i)
        {
            const auto lam = model.eigenvalues(i);
            csv += std::string(kind) + "," + std::to_string(i) + "," + detail::format_double(lam.real()) + "," +
                   detail::format_double(lam.imag()) + "," + detail::format_double(std::abs(lam)) + "," +
                   detail::format_double(std::abs(model.amplitudes(i))) + "\n";
        }
    };
    add("exact", exact_dmd(Y0, Y1, r));
    add("compressive", cdmd(Y0, Y1, measurement_matrix(p, Y.rows(), MeasurementEnsemble::gaussian, cfg.seed), r));
    write_text(fs::path(cfg.out_dir) / "dmd_eigenvalues.csv", csv);
    return 0;
}

int cmd_bench(const RunConfig& cfg, const Flags& f)
{
    const BenchData   data   = obtain_data(cfg, f);
    const BenchReport report = run_bench(data, cfg);
    for (const auto& r : report.rows)
        print_row(r);
    write_text(fs::path(cfg.out_dir) / "bench.csv", bench_to_csv(report.rows));
    write_text(fs::path(cfg.out_dir) / "report.json", report_to_json(report).dump(2) + "\n");
    return report.any_failure() ? 1 : 0;
}

int cmd_scaling(const RunConfig& cfg)
{
    const auto rows = run_scaling(cfg);
    bool       failed = false;
    for (const auto& r : rows)
    {
        std::cout << "n=" << r.n << "  svd=" << r.t_svd << "s  rsvd=" << r.t_rsvd << "s  speedup=" << r.speedup
                  << "  err10 svd=" << r.err_svd << " rsvd=" << r.err_rsvd << "  " << r.status << "\n";
        failed = failed || r.status.rfind("error", 0) == 0;
    }
    write_text(fs::path(cfg.out_dir) / "scaling.csv", scaling_to_csv(rows));
    return failed ? 1 : 0;
}

void apply_thread_cap()
{
    const char* env = std::getenv("RMOR_THREADS");
    if (!env || !*env)
        return;
    char*      end = nullptr;
    const long n   = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1)
        throw ConfigError(std::string("RMOR_THREADS must be a positive integer, got '") + env + "'");
    Eigen::setNbThreads(static_cast< int >(n));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Randomized model order reduction toolkit" };
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    app.add_option("--config", f.config_path, "JSON run configuration; flags override its fields");
    app.add_option("--test", f.test, "parabolic | elliptic");
    app.add_option("--grid", f.grid, "interior grid points per side");
    app.add_option("--snapshots", f.snapshots, "time snapshots (parabolic) or training samples (elliptic)");
    app.add_option("--rank", f.rank, "reduced rank, or a comma list of ranks");
    app.add_option("--nl-rank", f.nl_rank, "DEIM rank (default: same as --rank)");
    app.add_option("--sampling-multiple", f.sampling_multiple, "sketch columns per unit of rank (default 2)");
    app.add_option("--oversample", f.oversample, "extra sketch columns");
    app.add_option("--power-iters", f.power_iters, "power iterations in the range finder");
    app.add_option("--seed", f.seed, "random seed");
    app.add_option("--methods", f.methods, "comma list of POD,cPOD,POD-DEIM,cPOD-cDEIM,DMD,cDMD");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--input", f.input, "directory written by `simulate` to reuse instead of regenerating");
    app.add_option("--dimensions", f.dimensions, "scaling study: ascending comma list of n");

    auto* simulate = app.add_subcommand("simulate", "generate and store snapshots and the full-order reference");
    auto* basis    = app.add_subcommand("basis", "POD / rSVD spectra, POD modes and DEIM points");
    auto* rom      = app.add_subcommand("rom", "build and run one reduced model (first of --methods)");
    auto* dmd      = app.add_subcommand("dmd", "exact and compressive DMD eigenvalues");
    auto* bench    = app.add_subcommand("bench", "six-method comparison: timing and error per (method, rank)");
    auto* scaling  = app.add_subcommand("scaling", "full SVD vs rSVD timing across dimensions");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return 2;
    }

    RunConfig cfg;
    try
    {
        apply_thread_cap();
        cfg = resolve_config(f);
    }
    catch (const Error& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try
    {
        if (simulate->parsed())
            return cmd_simulate(cfg);
        if (basis->parsed())
            return cmd_basis(cfg, f);
        if (rom->parsed())
            return cmd_rom(cfg, f);
        if (dmd->parsed())
            return cmd_dmd(cfg, f);
        if (bench->parsed())
            return cmd_bench(cfg, f);
        if (scaling->parsed())
            return cmd_scaling(cfg);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
