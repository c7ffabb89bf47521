// Assertions stay live in this file so Eigen's runtime allocation guard works.
#undef NDEBUG
#define EIGEN_RUNTIME_NO_MALLOC

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "rmor/deim.hpp"
#include "rmor/models.hpp"
#include "rmor/pod.hpp"
#include "rmor/rom.hpp"
#include "rmor/sketch.hpp"
#include "test_support.hpp"

using namespace rmor;
using testing_support::random_matrix;
using testing_support::random_orthonormal;
using testing_support::random_vector;

namespace {

FullOrderModel< DenseMatrix > small_dense_model(Index n, std::uint64_t seed)
{
    FullOrderModel< DenseMatrix > fom;
    const DenseMatrix             R = random_matrix(n, n, seed);
    fom.mass      = DenseMatrix::Identity(n, n) + 0.1 * R * R.transpose();
    fom.stiffness = -DenseMatrix(R.transpose() * R) - DenseMatrix::Identity(n, n);
    fom.f         = Nonlinearity::componentwise([](double, Index, double y) { return -y * y * y; },
                                                [](double, Index, double y) { return -3.0 * y * y; });
    fom.forcing   = 0.1 * random_vector(n, seed + 1);
    fom.y0        = random_vector(n, seed + 2);
    return fom;
}

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast< std::size_t >(a.size())) == 0;
}

} // namespace

// ---------------------------------------------------------------- projection

TEST(ProjectModel, IdentityBasis)
{
    const auto         fom = small_dense_model(6, 1);
    const ReducedModel rom = project_model(fom, DenseMatrix::Identity(6, 6));
    EXPECT_TRUE(bitwise_equal(rom.mass, fom.mass));
    EXPECT_TRUE(bitwise_equal(rom.stiffness, fom.stiffness));
    EXPECT_TRUE(bitwise_equal(rom.y0, fom.y0));
}

TEST(ProjectModel, CoordinateProjectionOfDiagonal)
{
    FullOrderModel< DenseMatrix > fom;
    Vector                        d(5);
    d << -1, -2, -3, -4, -5;
    fom.mass      = DenseMatrix::Identity(5, 5);
    fom.stiffness = d.asDiagonal();
    fom.f         = Nonlinearity::zero();
    fom.y0        = Vector::Ones(5);

    const ReducedModel rom = project_model(fom, DenseMatrix::Identity(5, 3));
    EXPECT_EQ(rom.stiffness, DenseMatrix(fom.stiffness.topLeftCorner(3, 3)));
}

TEST(ProjectModel, SymmetricMassStaysSymmetric)
{
    const auto         fom = small_dense_model(20, 3);
    const ReducedModel rom = project_model(fom, random_orthonormal(20, 7, 4));
    EXPECT_LE((rom.mass - rom.mass.transpose()).norm(), 1e-12 * rom.mass.norm());
}

TEST(ProjectModel, NonOrthonormalBasisIsRejected)
{
    const auto  fom = small_dense_model(8, 5);
    DenseMatrix Psi = random_orthonormal(8, 3, 6);
    Psi.col(1) *= 1.0 + 1e-6;
    EXPECT_THROW(project_model(fom, Psi), BasisError);
    EXPECT_THROW(project_model(fom, random_orthonormal(7, 3, 6)), ShapeError);
}

TEST(ProjectModel, DeimNeedsPointwiseTerm)
{
    auto fom   = small_dense_model(8, 5);
    fom.f      = Nonlinearity{};
    fom.f.full = [](double, const Vector& y) { return Vector(-y); };
    const auto op = build_deim(random_orthonormal(8, 3, 1));
    EXPECT_THROW(project_model(fom, random_orthonormal(8, 3, 2), op), InvalidInputError);
}

// ---------------------------------------------------------------- right-hand side

TEST(ReducedRhs, ZeroNonlinearity)
{
    auto fom    = small_dense_model(10, 7);
    fom.f       = Nonlinearity::zero();
    fom.forcing = Vector();
    const ReducedModel rom = project_model(fom, random_orthonormal(10, 4, 8));
    const Vector       a   = random_vector(4, 9);
    EXPECT_LE((reduced_rhs(rom, 0.0, a) - rom.stiffness * a).norm(), 1e-14);
    EXPECT_THROW(reduced_rhs(rom, 0.0, Vector::Zero(3)), ShapeError);
}

TEST(ReducedRhs, DeimMatchesFullLiftWhenUSpansEverything)
{
    const auto         fom  = small_dense_model(12, 10);
    const DenseMatrix  Psi  = random_orthonormal(12, 4, 11);
    const DeimOperator op   = build_deim(random_orthonormal(12, 12, 12));
    const ReducedModel full = project_model(fom, Psi);
    const ReducedModel hyp  = project_model(fom, Psi, op);
    for (std::uint64_t s = 0; s < 5; ++s)
    {
        const Vector a = random_vector(4, 20 + s);
        EXPECT_LE((reduced_rhs(full, 0.3, a) - reduced_rhs(hyp, 0.3, a)).norm(), 1e-8);
    }
}

TEST(ReducedRhs, IdentityBasisIdentityDeimEqualsFullRhs)
{
    const auto  fom = small_dense_model(6, 13);
    IndexList   all{ 0, 1, 2, 3, 4, 5 };
    const auto  op  = build_deim(DenseMatrix::Identity(6, 6), all);
    const auto  rom = project_model(fom, DenseMatrix::Identity(6, 6), op);
    const Vector y  = random_vector(6, 14);
    const Vector expected = fom.stiffness * y + fom.f.full(0.0, y) + fom.forcing;
    EXPECT_LE((reduced_rhs(rom, 0.0, y) - expected).norm(), 1e-14 * expected.norm());
}

TEST(ReducedRhs, DeimPathDoesNotAllocateOrLift)
{
    const auto   fom = small_dense_model(30, 15);
    const auto   op  = build_deim(random_orthonormal(30, 6, 16));
    ReducedModel rom = project_model(fom, random_orthonormal(30, 5, 17), op);
    rom.f.full       = [](double, const Vector&) -> Vector { throw std::logic_error("full f evaluated"); };

    Workspace    ws  = make_workspace(rom);
    const Vector a   = random_vector(5, 18);
    Vector       out(5);

    Eigen::internal::set_is_malloc_allowed(false);
    EXPECT_NO_THROW(nonlinear_term(rom, 0.0, a, out, ws));
    Eigen::internal::set_is_malloc_allowed(true);
    EXPECT_TRUE(out.allFinite());
}

// ---------------------------------------------------------------- integration

TEST(Integrate, NoDynamicsIsConstant)
{
    FullOrderModel< DenseMatrix > fom;
    fom.mass      = DenseMatrix::Identity(3, 3);
    fom.stiffness = DenseMatrix::Zero(3, 3);
    fom.f         = Nonlinearity::zero();
    fom.y0        = random_vector(3, 1);
    const Trajectory tr = integrate_semi_implicit(fom, 0.1, 1.0);
    ASSERT_EQ(tr.states.cols(), 11);
    for (Index j = 0; j < 11; ++j)
        EXPECT_EQ(tr.states.col(j), fom.y0);
    EXPECT_NEAR(tr.times.back(), 1.0, 1e-15);
}

TEST(Integrate, ScalarDecayClosedFormAndFirstOrder)
{
    FullOrderModel< DenseMatrix > fom;
    fom.mass      = DenseMatrix::Ones(1, 1);
    fom.stiffness = -DenseMatrix::Ones(1, 1);
    fom.f         = Nonlinearity::zero();
    fom.y0        = Vector::Ones(1);

    const double     dt = 0.01;
    const Trajectory tr = integrate_steps(fom, dt, 100);
    for (Index j = 0; j <= 100; ++j)
        EXPECT_NEAR(tr.states(0, j), std::pow(1.0 + dt, -static_cast< double >(j)), 1e-14);

    // halving dt halves the error at T = 1
    double prev = 0.0;
    for (int level = 0; level < 4; ++level)
    {
        const Index  steps = 50 << level;
        const double err   = std::abs(integrate_steps(fom, 1.0 / static_cast< double >(steps), steps).states(0, steps) -
                                    std::exp(-1.0));
        if (level > 0)
        {
            EXPECT_NEAR(prev / err, 2.0, 0.1);
        }
        prev = err;
    }
}

TEST(Integrate, DivergenceReportsStep)
{
    FullOrderModel< DenseMatrix > fom;
    fom.mass      = DenseMatrix::Ones(1, 1);
    fom.stiffness = DenseMatrix::Zero(1, 1);
    fom.f         = Nonlinearity::componentwise([](double, Index, double y) { return y * y; });
    fom.y0        = Vector::Constant(1, 10.0);
    try
    {
        integrate_steps(fom, 1.0, 50);
        FAIL() << "expected DivergenceError";
    }
    catch (const DivergenceError& e)
    {
        EXPECT_GT(e.step, 3u);
        EXPECT_LT(e.step, 15u);
    }
}

TEST(Integrate, SingularSteppingMatrix)
{
    FullOrderModel< DenseMatrix > fom;
    fom.mass      = DenseMatrix::Zero(2, 2);
    fom.stiffness = DenseMatrix::Zero(2, 2);
    fom.f         = Nonlinearity::zero();
    fom.y0        = Vector::Ones(2);
    EXPECT_THROW(integrate_steps(fom, 0.1, 3), SingularityError);
    EXPECT_THROW(integrate_steps(small_dense_model(3, 1), 0.0, 3), DomainError);
}

TEST(Integrate, IdentityBasisReproducesFullOrderBitwise)
{
    const Grid2d  grid(6);
    ParabolicSpec spec;
    const auto    fom   = to_dense(build_parabolic_fom(grid, spec));
    const auto    rom   = project_model(fom, DenseMatrix::Identity(36, 36));
    const double  dt    = 0.01;
    const auto    full  = integrate_steps(fom, dt, 200);
    const auto    red   = integrate_steps(rom, dt, 200);
    EXPECT_TRUE(bitwise_equal(full.states, lift(rom.basis, red.states)));
}

TEST(Integrate, SparseAndDenseAgree)
{
    const Grid2d  grid(7);
    ParabolicSpec spec;
    const auto    sparse = build_parabolic_fom(grid, spec);
    const auto    a      = integrate_steps(sparse, 0.01, 100).states;
    const auto    b      = integrate_steps(to_dense(sparse), 0.01, 100).states;
    EXPECT_LE((a - b).norm(), 1e-12 * b.norm());
}

TEST(Integrate, GalerkinResidualIsOrthogonalToBasis)
{
    const auto        fom = small_dense_model(15, 30);
    const DenseMatrix Psi = random_orthonormal(15, 4, 31);
    const auto        rom = project_model(fom, Psi);
    const double      dt  = 0.05;
    const auto        tr  = integrate_steps(rom, dt, 20);
    for (Index j = 0; j < 20; ++j)
    {
        const Vector y0 = Psi * tr.states.col(j);
        const Vector y1 = Psi * tr.states.col(j + 1);
        const Vector r  = fom.mass * (y1 - y0) - dt * (fom.stiffness * y1 + fom.f.full(0.0, y0) + fom.forcing);
        EXPECT_LE((Psi.transpose() * r).norm(), 1e-12 * std::max(1.0, y1.norm()));
    }
}

// ---------------------------------------------------------------- lift

TEST(Lift, Basics)
{
    const DenseMatrix A = random_matrix(4, 3, 1);
    EXPECT_EQ(lift(DenseMatrix::Identity(4, 4), A), A);
    const DenseMatrix Psi = random_orthonormal(20, 5, 2);
    EXPECT_EQ(lift(Psi, DenseMatrix::Zero(5, 2)), DenseMatrix::Zero(20, 2));
    const DenseMatrix a = random_matrix(5, 3, 3);
    EXPECT_LE((Psi.transpose() * lift(Psi, a) - a).norm(), 1e-12 * a.norm());
    EXPECT_THROW(lift(Psi, DenseMatrix::Zero(4, 2)), ShapeError);
}

// ---------------------------------------------------------------- models

TEST(Laplacian, StencilAndRowSums)
{
    const Grid2d       grid(9);
    const SparseMatrix L  = laplacian(grid);
    const double       h2 = grid.spacing() * grid.spacing();
    const Index        c  = 4 + 9 * 4;  // centre node
    EXPECT_NEAR(L.coeff(c, c), -4.0 / h2, 1e-9);
    EXPECT_NEAR(L.coeff(c, c + 1), 1.0 / h2, 1e-9);
    EXPECT_NEAR(L.coeff(c, c + 9), 1.0 / h2, 1e-9);
    EXPECT_NEAR(DenseMatrix(L).row(c).sum(), 0.0, 1e-9);
    EXPECT_EQ(L.nonZeros(), 5 * 81 - 4 * 9);
}

TEST(Laplacian, ClosedFormEigenvalues)
{
    const Index  N = 5;
    const Grid2d grid(N);
    const double h = grid.spacing();
    Eigen::SelfAdjointEigenSolver< DenseMatrix > es{ DenseMatrix(laplacian(grid)) };

    std::vector< double > expected;
    for (Index i = 1; i <= N; ++i)
        for (Index j = 1; j <= N; ++j)
        {
            const double si = std::sin(static_cast< double >(i) * std::numbers::pi * h / 2.0);
            const double sj = std::sin(static_cast< double >(j) * std::numbers::pi * h / 2.0);
            expected.push_back(-4.0 / (h * h) * (si * si + sj * sj));
        }
    std::sort(expected.begin(), expected.end());
    for (Index k = 0; k < N * N; ++k)
        EXPECT_NEAR(es.eigenvalues()(k), expected[static_cast< std::size_t >(k)], 1e-9 * std::abs(expected[0]));
}

TEST(ParabolicModel, Construction)
{
    ParabolicSpec spec;
    EXPECT_EQ(build_parabolic_fom(Grid2d(100), spec).dimension(), 10000);
    const Vector ones = Vector::Ones(25);
    EXPECT_EQ(parabolic_nonlinearity(1.0).full(0.0, ones), Vector::Zero(25));
    EXPECT_THROW(Grid2d(1), DomainError);
    spec.theta = 0.0;
    EXPECT_THROW(build_parabolic_fom(Grid2d(4), spec), DomainError);
}

TEST(ParabolicModel, InitialStateBand)
{
    const Grid2d  grid(50);
    ParabolicSpec spec;
    const Vector  y0 = parabolic_initial_state(grid, spec);
    for (Index k = 0; k < grid.size(); ++k)
    {
        const double p = grid.x1(k) * grid.x2(k);
        EXPECT_EQ(y0(k), (p >= 0.1 && p <= 0.6) ? 0.1 : 0.0);
    }
}

TEST(ParabolicSnapshots, SingleColumnIsInitialState)
{
    const Grid2d       grid(8);
    ParabolicSpec      spec;
    const SnapshotPair s = generate_snapshots_parabolic(grid, spec, 0.01, 1);
    ASSERT_EQ(s.states.cols(), 1);
    EXPECT_EQ(s.states.data().col(0), parabolic_initial_state(grid, spec));
    EXPECT_THROW(generate_snapshots_parabolic(grid, spec, 0.1, 52), DomainError);
}

TEST(ParabolicSnapshots, MaximumPrincipleAndDecay)
{
    // with zero boundary data and f = -mu (y - y^3) on [0, 0.1] the solution
    // stays in [0, max y0] and decays towards the stable zero state
    const Grid2d       grid(20);
    ParabolicSpec      spec;
    const SnapshotPair s = generate_snapshots_parabolic(grid, spec, 0.05, 101);
    EXPECT_GE(s.states.data().minCoeff(), 0.0);
    EXPECT_LE(s.states.data().maxCoeff(), 0.1 + 1e-15);
    EXPECT_LT(s.states.data().col(100).maxCoeff(), 1e-3);
    EXPECT_EQ(s.states.stamps()(0, 100), 100 * 0.05);
    // nonlinear snapshots are f at the stored states
    EXPECT_EQ(s.nonlinear.data().col(37), parabolic_nonlinearity(1.0).full(0.0, s.states.data().col(37)));
}

TEST(EllipticModel, Construction)
{
    const Grid2d grid(50);
    const auto   fom = build_elliptic_fom(grid, EllipticSpec{ 1.0, 2.0 });
    EXPECT_EQ(fom.dimension(), 2500);
    const Vector R0 = elliptic_residual(fom, Vector::Zero(2500));
    EXPECT_LE((R0 + elliptic_source(grid, 100.0)).norm(), 1e-12);
    EXPECT_THROW(build_elliptic_fom(grid, EllipticSpec{ 1.0, 0.0 }), DomainError);
}

TEST(EllipticModel, JacobianMatchesFiniteDifferences)
{
    const Grid2d grid(12);
    const auto   fom = build_elliptic_fom(grid, EllipticSpec{ 2.0, 3.0 });
    const Vector u   = 0.1 * random_vector(grid.size(), 1);
    const Vector v   = random_vector(grid.size(), 2);
    const Vector Jv  = steady_jacobian(fom, u) * v;

    const double eps = 1e-6;
    const Vector fd  = (steady_residual(fom, Vector(u + eps * v)) - steady_residual(fom, Vector(u - eps * v))) / (2 * eps);
    EXPECT_LE((fd - Jv).norm(), 1e-6 * Jv.norm());
}

TEST(ReducedJacobian, MatchesFiniteDifferencesBothModes)
{
    const Grid2d grid(12);
    const auto   fom = build_elliptic_fom(grid, EllipticSpec{ 2.0, 3.0 });
    const DenseMatrix Psi = random_orthonormal(grid.size(), 6, 3);
    const auto        op  = build_deim(random_orthonormal(grid.size(), 8, 4));
    for (const auto& rom : { project_model(fom, Psi), project_model(fom, Psi, op) })
    {
        const Vector a   = 0.1 * random_vector(6, 5);
        const Vector v   = random_vector(6, 6);
        const Vector Jv  = steady_jacobian(rom, a) * v;
        const double eps = 1e-6;
        const Vector fd  = (steady_residual(rom, Vector(a + eps * v)) - steady_residual(rom, Vector(a - eps * v))) / (2 * eps);
        EXPECT_LE((fd - Jv).norm(), 1e-6 * Jv.norm());
    }
}

// ---------------------------------------------------------------- Newton

TEST(Newton, ExactRootAtStart)
{
    const Grid2d grid(8);
    auto         fom = build_elliptic_fom(grid, EllipticSpec{ 1.0, 1.0, 0.0 });
    const auto   res = solve_steady_newton(fom);
    EXPECT_LE(res.iterations, 1);
    EXPECT_EQ(res.solution, Vector::Zero(64));
}

TEST(Newton, LinearResidualConvergesInOneStep)
{
    const Grid2d grid(10);
    auto         fom = build_elliptic_fom(grid, EllipticSpec{ 1.0, 1.0 });
    const double mu1 = 3.0;
    fom.f = Nonlinearity::componentwise([mu1](double, Index, double u) { return -mu1 * u; },
                                        [mu1](double, Index, double) { return -mu1; });
    const auto res = solve_steady_newton(fom);
    EXPECT_EQ(res.iterations, 1);

    const DenseMatrix K      = DenseMatrix(fom.stiffness) - mu1 * DenseMatrix::Identity(100, 100);
    const Vector      oracle = K.partialPivLu().solve(Vector(-fom.forcing));
    EXPECT_LE((res.solution - oracle).lpNorm< Eigen::Infinity >(), 1e-10 * oracle.lpNorm< Eigen::Infinity >());
}

TEST(Newton, SmallParametersApproachLinearPoisson)
{
    const Grid2d grid(20);
    const auto   fom    = build_elliptic_fom(grid, EllipticSpec{ 0.01, 0.01 });
    const auto   res    = solve_steady_newton(fom);
    const Vector linear = DenseMatrix(fom.stiffness).partialPivLu().solve(Vector(-fom.forcing));
    EXPECT_LE((res.solution - linear).lpNorm< Eigen::Infinity >(), 0.05 * linear.lpNorm< Eigen::Infinity >());
    EXPECT_LE(steady_residual(fom, res.solution).lpNorm< Eigen::Infinity >(), 1e-10);
}

TEST(Newton, IterationCapCarriesResidual)
{
    const Grid2d  grid(10);
    const auto    fom = build_elliptic_fom(grid, EllipticSpec{ 10.0, 10.0 });
    NewtonOptions opts;
    opts.max_iter = 1;
    try
    {
        solve_steady_newton(fom, opts);
        FAIL() << "expected ConvergenceError";
    }
    catch (const ConvergenceError& e)
    {
        EXPECT_EQ(e.iterations, 1);
        EXPECT_GT(e.residual, opts.tol);
    }
}

TEST(Newton, SingularJacobian)
{
    FullOrderModel< DenseMatrix > fom;
    fom.mass      = DenseMatrix::Identity(3, 3);
    fom.stiffness = DenseMatrix::Zero(3, 3);
    fom.f         = Nonlinearity::zero();
    fom.forcing   = Vector::Ones(3);
    fom.y0        = Vector::Zero(3);
    EXPECT_THROW(solve_steady_newton(fom), SingularityError);
}

TEST(Newton, ReducedFullRankBasisMatchesFullOrder)
{
    const Grid2d grid(6);
    const auto   fom = build_elliptic_fom(grid, EllipticSpec{ 1.0, 2.0 });
    const auto   rom = project_model(fom, random_orthonormal(36, 36, 1));
    const Vector a   = solve_steady_newton(rom).solution;
    const Vector u   = solve_steady_newton(fom).solution;
    EXPECT_LE((rom.basis * a - u).norm(), 1e-9 * u.norm());
}

// ---------------------------------------------------------------- elliptic snapshots

TEST(LogSpacedParameters, EndpointsAndOrdering)
{
    const DenseMatrix p = log_spaced_parameters(10);
    ASSERT_EQ(p.cols(), 100);
    EXPECT_EQ(p(0, 0), 0.01);
    EXPECT_EQ(p(0, 9), 10.0);
    EXPECT_EQ(p(1, 99), 10.0);
    EXPECT_EQ(p(1, 0), p(1, 9));   // mu1 varies fastest
    EXPECT_NEAR(p(0, 1) / p(0, 0), p(0, 2) / p(0, 1), 1e-12);
}

TEST(EllipticSnapshots, SweepBookkeepingAndDuplicates)
{
    const Grid2d grid(8);
    DenseMatrix  params(2, 3);
    params << 0.5, 2.0, 0.5, 1.0, 3.0, 1.0;
    const auto s = generate_snapshots_elliptic(grid, params);
    EXPECT_TRUE(s.failures.empty());
    EXPECT_EQ(s.states.data().col(0), s.states.data().col(2));
    EXPECT_EQ(s.nonlinear.data().col(0), s.nonlinear.data().col(2));
    EXPECT_EQ(s.states.stamps(), params);

    const auto full = generate_snapshots_elliptic(grid, log_spaced_parameters(10));
    EXPECT_EQ(full.states.cols(), 100);
    EXPECT_TRUE(full.failures.empty());

    DenseMatrix bad(2, 1);
    bad << 20.0, 1.0;
    EXPECT_THROW(generate_snapshots_elliptic(grid, bad), DomainError);
}

TEST(EllipticSnapshots, RandomizedSpectrumTracksFull)
{
    const Grid2d grid(16);
    const auto   s     = generate_snapshots_elliptic(grid, log_spaced_parameters(10));
    const Vector full  = singular_values(s.states.data());
    for (Index i = 1; i < full.size(); ++i)
        EXPECT_LE(full(i), full(i - 1));

    SketchConfig cfg;
    cfg.target_rank  = 8;
    cfg.oversampling = 8;
    const Vector fast = rsvd(s.states.data(), cfg).sigma;
    for (Index i = 0; i < 8; ++i)
        EXPECT_NEAR(fast(i), full(i), 0.1 * full(i)) << "index " << i;
}
