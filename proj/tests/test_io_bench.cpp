#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "rmor/bench.hpp"
#include "rmor/io.hpp"
#include "test_support.hpp"

using namespace rmor;
using testing_support::random_matrix;

namespace fs = std::filesystem;

namespace {

SnapshotMatrix sample_snapshots()
{
    DenseMatrix Y = random_matrix(7, 4, 1);
    Y(0, 0)       = -0.0;
    Y(1, 0)       = std::numeric_limits< double >::denorm_min();
    Y(2, 0)       = std::numeric_limits< double >::infinity();
    Y(3, 0)       = std::numeric_limits< double >::quiet_NaN();
    DenseMatrix stamps = random_matrix(2, 4, 2);
    Vector      w(4);
    w << 0.0, 1.0, 0.25, 3.5;
    return SnapshotMatrix(Y, stamps, w);
}

bool same_bits(const DenseMatrix& a, const DenseMatrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast< std::size_t >(a.size())) == 0;
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("rmor_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

// ---------------------------------------------------------------- binary snapshots

TEST(SnapshotFile, RoundTripIsBitwise)
{
    const SnapshotMatrix s   = sample_snapshots();
    const SnapshotMatrix out = decode_snapshots(encode_snapshots(s));
    EXPECT_TRUE(same_bits(out.data(), s.data()));
    EXPECT_TRUE(same_bits(out.stamps(), s.stamps()));
    EXPECT_TRUE(same_bits(out.weights(), s.weights()));
}

TEST(SnapshotFile, SaveLoadThroughDisk)
{
    const fs::path       dir = scratch_dir("saveload");
    const SnapshotMatrix s   = sample_snapshots();
    save_snapshots(dir / "s.rmor", s);
    EXPECT_FALSE(fs::exists(dir / "s.rmor.tmp"));
    const SnapshotMatrix out = load_snapshots(dir / "s.rmor");
    EXPECT_TRUE(same_bits(out.data(), s.data()));
    fs::remove_all(dir);
}

TEST(SnapshotFile, LittleEndianLayout)
{
    DenseMatrix one(1, 1);
    one(0, 0) = 1.0;
    const std::string bytes = encode_snapshots(SnapshotMatrix(one, DenseMatrix(0, 1), Vector::Ones(1)));
    ASSERT_EQ(bytes.size(), 5u + 24u + 8u + 8u);
    EXPECT_EQ(bytes.substr(0, 5), "RMOR1");
    EXPECT_EQ(static_cast< unsigned char >(bytes[5]), 1u);   // n = 1, low byte first
    EXPECT_EQ(static_cast< unsigned char >(bytes[13]), 1u);  // m = 1
    EXPECT_EQ(static_cast< unsigned char >(bytes[21]), 0u);  // flags: no stamps
    // 1.0 = 0x3FF0000000000000, little-endian
    EXPECT_EQ(static_cast< unsigned char >(bytes[29 + 6]), 0xF0u);
    EXPECT_EQ(static_cast< unsigned char >(bytes[29 + 7]), 0x3Fu);
}

TEST(SnapshotFile, EveryTruncationIsParseError)
{
    const std::string bytes = encode_snapshots(sample_snapshots());
    for (std::size_t len = 0; len < bytes.size(); ++len)
    {
        try
        {
            decode_snapshots(std::string_view(bytes).substr(0, len));
            FAIL() << "prefix of " << len << " bytes decoded";
        }
        catch (const ParseError& e)
        {
            EXPECT_LE(e.offset, len);
        }
    }
}

TEST(SnapshotFile, HeaderProblems)
{
    std::string bytes = encode_snapshots(sample_snapshots());

    std::string bad_magic = bytes;
    bad_magic[0]          = 'X';
    try
    {
        decode_snapshots(bad_magic);
        FAIL();
    }
    catch (const ParseError& e)
    {
        EXPECT_EQ(e.offset, 0u);
    }

    std::string reserved = bytes;
    reserved[5 + 16 + 5] = 1;  // a flag bit above 32
    EXPECT_THROW(decode_snapshots(reserved), FormatError);

    EXPECT_THROW(decode_snapshots(bytes + "x"), FormatError);

    std::string huge = bytes;
    huge[5 + 7]      = 0x7f;  // n around 2^62
    EXPECT_THROW(decode_snapshots(huge), FormatError);

    std::string negative = bytes;
    negative[bytes.size() - 1] = static_cast< char >(0xC0);  // last weight becomes negative
    EXPECT_THROW(decode_snapshots(negative), FormatError);
}

TEST(SnapshotFile, MissingFile)
{
    EXPECT_THROW(load_snapshots("/nonexistent/dir/x.rmor"), Error);
}

// ---------------------------------------------------------------- CSV

TEST(MatrixCsv, TwoByTwoLayout)
{
    DenseMatrix A(2, 2);
    A << 1.0, -2.5, 0.1, 3e-300;
    const std::string text = matrix_to_csv(A);
    std::istringstream in(text);
    std::string        line;
    int                lines = 0;
    std::getline(in, line);
    EXPECT_EQ(line, "n=2,m=2");
    while (std::getline(in, line))
        ++lines;
    EXPECT_EQ(lines, 2);
    EXPECT_TRUE(same_bits(matrix_from_csv(text), A));
}

TEST(MatrixCsv, RandomRoundTripAndErrors)
{
    const DenseMatrix A = random_matrix(5, 3, 9);
    EXPECT_TRUE(same_bits(matrix_from_csv(matrix_to_csv(A)), A));
    EXPECT_THROW(matrix_from_csv(""), FormatError);
    EXPECT_THROW(matrix_from_csv("rows=2\n"), FormatError);
    EXPECT_THROW(matrix_from_csv("n=2,m=2\n1,2\n"), FormatError);
    EXPECT_THROW(matrix_from_csv("n=1,m=2\n1\n"), FormatError);
    EXPECT_THROW(matrix_from_csv("n=1,m=2\n1,abc\n"), FormatError);
    EXPECT_THROW(matrix_from_csv("n=1,m=1\n1\n2\n"), FormatError);

    const fs::path dir = scratch_dir("csv");
    write_matrix_csv(dir / "a.csv", A);
    EXPECT_TRUE(same_bits(read_matrix_csv(dir / "a.csv"), A));
    fs::remove_all(dir);
}

TEST(BenchCsv, RoundTrip)
{
    std::vector< BenchRow > rows(2);
    rows[0].method       = "cPOD";
    rows[0].rank         = 10;
    rows[0].samples      = 20;
    rows[0].seed         = 123456789012345ULL;
    rows[0].offline_s    = 0.123;
    rows[0].online_s     = 1e-5;
    rows[0].rel_frob_err = 2.5e-7;
    rows[1].method       = "DMD";
    rows[1].status       = "error: rank 12, too big";

    const std::string text = bench_to_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), "method,rank,samples,seed,offline_s,online_s,rel_frob_err,status");
    const auto back = bench_from_csv(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].method, "cPOD");
    EXPECT_EQ(back[0].seed, rows[0].seed);
    EXPECT_EQ(back[0].rel_frob_err, rows[0].rel_frob_err);
    EXPECT_EQ(back[0].offline_s, rows[0].offline_s);
    EXPECT_TRUE(std::isnan(back[1].rel_frob_err));
    EXPECT_EQ(back[1].status, "error: rank 12; too big");
    EXPECT_TRUE(back[1].failed());
    EXPECT_THROW(bench_from_csv("a,b\n1,2\n"), FormatError);
}

TEST(ScalingCsv, RoundTrip)
{
    std::vector< ScalingRow > rows(1);
    rows[0].n        = 500;
    rows[0].t_svd    = 0.5;
    rows[0].t_rsvd   = 0.01;
    rows[0].speedup  = 50.0;
    rows[0].err_svd  = 1e-3;
    rows[0].err_rsvd = 1.1e-3;
    const auto back  = scaling_from_csv(scaling_to_csv(rows));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].n, 500);
    EXPECT_EQ(back[0].speedup, 50.0);
    EXPECT_EQ(back[0].err_rsvd, 1.1e-3);
}

// ---------------------------------------------------------------- metrics

TEST(RelFrobeniusError, Examples)
{
    const DenseMatrix R = random_matrix(6, 4, 3);
    EXPECT_EQ(rel_frobenius_error(R, R), 0.0);
    EXPECT_EQ(rel_frobenius_error(R, DenseMatrix::Zero(6, 4)), 1.0);
    EXPECT_NEAR(rel_frobenius_error(R, 1.1 * R), 0.1, 1e-14);
    EXPECT_THROW(rel_frobenius_error(DenseMatrix::Zero(2, 2), DenseMatrix::Ones(2, 2)), DomainError);
    EXPECT_THROW(rel_frobenius_error(R, DenseMatrix::Zero(6, 3)), ShapeError);
}

// ---------------------------------------------------------------- config

TEST(RunConfig, JsonAndValidation)
{
    const auto j = nlohmann::json::parse(R"({"test":"elliptic","grid":12,"snapshots":25,"ranks":[3,5],
                                             "methods":["pod","cpod-cdeim"],"seed":9,"sampling_multiple":3})");
    const RunConfig cfg = config_from_json(j);
    EXPECT_EQ(cfg.test, TestCase::elliptic);
    EXPECT_EQ(cfg.grid, 12);
    EXPECT_EQ(cfg.ranks, (std::vector< Index >{ 3, 5 }));
    ASSERT_EQ(cfg.methods.size(), 2u);
    EXPECT_EQ(cfg.methods[1], Method::cpod_cdeim);
    EXPECT_EQ(cfg.sampling_multiple, 3.0);
    EXPECT_NO_THROW(cfg.validate());

    const RunConfig back = config_from_json(config_to_json(cfg));
    EXPECT_EQ(config_to_json(back), config_to_json(cfg));

    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"gird":3})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"grid":"big"})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"methods":["PCA"]})")), ConfigError);

    RunConfig bad;
    bad.ranks = { 0 };
    EXPECT_THROW(bad.validate(), ConfigError);
    bad                   = RunConfig{};
    bad.sampling_multiple = 0.5;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad            = RunConfig{};
    bad.test       = TestCase::elliptic;
    bad.snapshots  = 50;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad            = RunConfig{};
    bad.dimensions = { 1000, 500 };
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(RunConfig, MethodNames)
{
    EXPECT_EQ(parse_method("POD-DEIM"), Method::pod_deim);
    EXPECT_EQ(parse_method("pod_deim"), Method::pod_deim);
    EXPECT_EQ(parse_method("cDMD"), Method::cdmd);
    EXPECT_EQ(parse_method_list("POD,cPOD,DMD").size(), 3u);
    for (Method m : all_methods())
        EXPECT_EQ(parse_method(method_name(m)), m);
}

// ---------------------------------------------------------------- bench runs

namespace {

RunConfig small_parabolic()
{
    RunConfig cfg;
    cfg.grid      = 10;
    cfg.snapshots = 60;
    cfg.ranks     = { 5 };
    return cfg;
}

} // namespace

TEST(Bench, FullRankPodReproducesTrajectory)
{
    RunConfig       cfg  = small_parabolic();
    const BenchData data = generate_bench_data(cfg);
    const Index     r    = numerical_rank(singular_values(data.states.data()));
    cfg.ranks            = { r };
    cfg.methods          = { Method::pod };
    const BenchReport rep = run_bench(data, cfg);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_EQ(rep.rows[0].status, "ok");
    EXPECT_LE(rep.rows[0].rel_frob_err, 1e-6);
}

TEST(Bench, AllMethodsRunAndAreReproducible)
{
    const RunConfig   cfg  = small_parabolic();
    const BenchData   data = generate_bench_data(cfg);
    const BenchReport a    = run_bench(data, cfg);
    const BenchReport b    = run_bench(data, cfg);
    ASSERT_EQ(a.rows.size(), 6u);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        EXPECT_FALSE(a.rows[i].failed()) << a.rows[i].method << ": " << a.rows[i].status;
        EXPECT_EQ(a.rows[i].rel_frob_err, b.rows[i].rel_frob_err) << a.rows[i].method;
        EXPECT_GE(a.rows[i].rel_frob_err, 0.0);
        EXPECT_GE(a.rows[i].offline_s, 0.0);
        EXPECT_GE(a.rows[i].online_s, 0.0);
    }
    EXPECT_FALSE(a.any_failure());
    EXPECT_EQ(a.find("cPOD", 5)->samples, 10);
    EXPECT_EQ(a.find("cDMD", 5)->samples, 10);
    EXPECT_EQ(a.find("POD", 5)->samples, 0);

    const auto j = report_to_json(a);
    EXPECT_EQ(j["rows"].size(), 6u);
    EXPECT_DOUBLE_EQ(j["rows"][0]["total_s"].get< double >(), a.rows[0].offline_s + a.rows[0].online_s);
}

TEST(Bench, FailureIsRecordedAndRunContinues)
{
    RunConfig       cfg  = small_parabolic();
    const BenchData data = generate_bench_data(cfg);
    cfg.ranks            = { 200, 4 };  // 200 exceeds min(n, m) = 60
    cfg.methods          = { Method::pod, Method::cpod };
    const BenchReport rep = run_bench(data, cfg);
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_TRUE(rep.rows[0].failed());
    EXPECT_TRUE(rep.rows[1].failed());
    EXPECT_EQ(rep.rows[0].rank, 200);
    EXPECT_FALSE(rep.rows[2].failed());
    EXPECT_FALSE(rep.rows[3].failed());
    EXPECT_TRUE(rep.any_failure());
}

TEST(Bench, EllipticSweep)
{
    RunConfig cfg;
    cfg.test         = TestCase::elliptic;
    cfg.grid         = 10;
    cfg.snapshots    = 36;
    cfg.ranks        = { 6 };
    cfg.test_samples = 3;
    cfg.methods      = { Method::pod, Method::cpod, Method::pod_deim, Method::cpod_cdeim };
    const BenchData data = generate_bench_data(cfg);
    EXPECT_EQ(data.states.cols(), 36);
    EXPECT_EQ(data.reference.cols(), 3);
    const BenchReport rep = run_bench(data, cfg);
    for (const auto& r : rep.rows)
    {
        EXPECT_FALSE(r.failed()) << r.method << ": " << r.status;
        EXPECT_LT(r.rel_frob_err, 0.1) << r.method;
    }
}

TEST(Bench, StoredDataGivesSameErrors)
{
    const RunConfig cfg  = small_parabolic();
    const BenchData data = generate_bench_data(cfg);
    const fs::path  dir  = scratch_dir("benchdata");
    save_bench_data(dir, data);
    const BenchData back = load_bench_data(dir, cfg);
    EXPECT_EQ(back.states, data.states);
    EXPECT_EQ(back.dt, data.dt);
    const auto a = run_bench(data, cfg);
    const auto b = run_bench(back, cfg);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        EXPECT_EQ(a.rows[i].rel_frob_err, b.rows[i].rel_frob_err);

    RunConfig wrong = cfg;
    wrong.grid      = 11;
    EXPECT_THROW(load_bench_data(dir, wrong), ConfigError);
    fs::remove_all(dir);
}

// ---------------------------------------------------------------- scaling

TEST(Scaling, SingleDimensionAndBudgetSkip)
{
    RunConfig cfg;
    cfg.dimensions = { 120 };
    auto rows      = run_scaling(cfg);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].status, "ok");
    EXPECT_DOUBLE_EQ(rows[0].speedup, rows[0].t_svd / rows[0].t_rsvd);
    EXPECT_LE(rows[0].err_rsvd, 10.0 * rows[0].err_svd);
    EXPECT_GE(rows[0].err_rsvd, rows[0].err_svd * (1.0 - 1e-12));

    cfg.dimensions  = { 50, 100 };
    cfg.byte_budget = 4.0 * 8.0 * 60 * 60;
    rows            = run_scaling(cfg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].status, "ok");
    EXPECT_EQ(rows[1].status.rfind("skipped", 0), 0u);
    EXPECT_EQ(scaling_from_csv(scaling_to_csv(rows)).size(), 2u);
}
