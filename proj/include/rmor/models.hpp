#pragma once
//
// Finite-difference full-order models on the unit square with homogeneous
// Dirichlet data (boundary nodes eliminated, N x N interior nodes, h = 1/(N+1)).
//
// Parabolic:   y_t = theta * Lap(y) - mu (y - y^3),   y(0) = y0
// Elliptic:    -Lap(u) + (mu1/mu2)(exp(mu2 u) - 1) = amp * sin(2 pi x) sin(2 pi y)
//
// Interior node (i, j), 0-based, sits at x1 = (i+1) h, x2 = (j+1) h and has
// unknown index i + N j.
//

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"
#include "rmor/pod.hpp"
#include "rmor/rom.hpp"

namespace rmor {

struct Grid2d
{
    Index points_per_side = 50;

    explicit Grid2d(Index n_side) : points_per_side(n_side)
    {
        if (n_side < 2)
            throw DomainError("Grid2d: need at least 2 interior points per side");
    }

    double spacing() const { return 1.0 / static_cast< double >(points_per_side + 1); }
    Index  size() const { return points_per_side * points_per_side; }

    double x1(Index k) const { return static_cast< double >(k % points_per_side + 1) * spacing(); }
    double x2(Index k) const { return static_cast< double >(k / points_per_side + 1) * spacing(); }
};

/// 5-point Laplacian, Dirichlet boundary eliminated: -4/h^2 center, 1/h^2 neighbours.
inline SparseMatrix laplacian(const Grid2d& grid)
{
    const Index  N   = grid.points_per_side;
    const Index  n   = grid.size();
    const double ih2 = 1.0 / (grid.spacing() * grid.spacing());

    std::vector< Eigen::Triplet< double > > entries;
    entries.reserve(static_cast< std::size_t >(5 * n));
    for (Index j = 0; j < N; ++j)
        for (Index i = 0; i < N; ++i)
        {
            const Index k = i + N * j;
            entries.emplace_back(k, k, -4.0 * ih2);
            if (i > 0)
                entries.emplace_back(k, k - 1, ih2);
            if (i + 1 < N)
                entries.emplace_back(k, k + 1, ih2);
            if (j > 0)
                entries.emplace_back(k, k - N, ih2);
            if (j + 1 < N)
                entries.emplace_back(k, k + N, ih2);
        }

    SparseMatrix L(n, n);
    L.setFromTriplets(entries.begin(), entries.end());
    L.makeCompressed();
    return L;
}

inline SparseMatrix sparse_identity(Index n)
{
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

// -------------------------------------------------------------------------
// semilinear parabolic problem
// -------------------------------------------------------------------------

enum class InitialRule {
    product,  // y0 = value where lo <= x1 * x2 <= hi
    box       // y0 = value where lo <= x1 <= hi and lo <= x2 <= hi
};

struct ParabolicSpec
{
    double      theta      = 0.1;
    double      mu         = 1.0;
    double      final_time = 5.0;
    InitialRule rule       = InitialRule::product;
    double      initial_value = 0.1;
    double      band_low      = 0.1;
    double      band_high     = 0.6;

    void validate() const
    {
        if (!(theta > 0.0))
            throw DomainError("ParabolicSpec: theta must be positive");
        if (!(final_time > 0.0))
            throw DomainError("ParabolicSpec: final time must be positive");
    }
};

inline Vector parabolic_initial_state(const Grid2d& grid, const ParabolicSpec& spec)
{
    Vector y0(grid.size());
    for (Index k = 0; k < grid.size(); ++k)
    {
        const double a = grid.x1(k);
        const double b = grid.x2(k);
        bool inside;
        if (spec.rule == InitialRule::product)
            inside = spec.band_low <= a * b && a * b <= spec.band_high;
        else
            inside = spec.band_low <= a && a <= spec.band_high && spec.band_low <= b && b <= spec.band_high;
        y0(k) = inside ? spec.initial_value : 0.0;
    }
    return y0;
}

/// componentwise -mu (y - y^3)
inline Nonlinearity parabolic_nonlinearity(double mu)
{
    return Nonlinearity::componentwise(
        [mu](double, Index, double y) { return -mu * (y - y * y * y); },
        [mu](double, Index, double y) { return -mu * (1.0 - 3.0 * y * y); });
}

inline FullOrderModel< SparseMatrix > build_parabolic_fom(const Grid2d& grid, const ParabolicSpec& spec)
{
    spec.validate();
    FullOrderModel< SparseMatrix > fom;
    fom.mass      = sparse_identity(grid.size());
    fom.stiffness = spec.theta * laplacian(grid);
    fom.f         = parabolic_nonlinearity(spec.mu);
    fom.y0        = parabolic_initial_state(grid, spec);
    return fom;
}

/// State and nonlinear-term snapshots collected in one pass.
struct SnapshotPair
{
    SnapshotMatrix states;
    SnapshotMatrix nonlinear;
};

//
// Integrates the parabolic model with step dt and stores m columns at
// t_j = j dt, j = 0 .. m-1, together with f(t_j, y(t_j)).
//
inline SnapshotPair generate_snapshots_parabolic(const Grid2d& grid, const ParabolicSpec& spec, double dt,
                                                 Index m)
{
    if (m < 1)
        throw DomainError("generate_snapshots_parabolic: need at least one snapshot");
    if (!(dt > 0.0) || static_cast< double >(m - 1) * dt > spec.final_time * (1.0 + 1e-12))
        throw DomainError("generate_snapshots_parabolic: (m - 1) * dt exceeds the final time");

    const auto       fom  = build_parabolic_fom(grid, spec);
    const Trajectory traj = integrate_steps(fom, dt, m - 1);

    DenseMatrix f_values(fom.dimension(), m);
    DenseMatrix stamps(1, m);
    for (Index j = 0; j < m; ++j)
    {
        const double t  = traj.times[static_cast< std::size_t >(j)];
        f_values.col(j) = fom.f.full(t, traj.states.col(j));
        stamps(0, j)    = t;
    }

    return SnapshotPair{ SnapshotMatrix(traj.states, stamps, Vector::Ones(m)),
                         SnapshotMatrix(std::move(f_values), stamps, Vector::Ones(m)) };
}

// -------------------------------------------------------------------------
// parametric elliptic problem
// -------------------------------------------------------------------------

inline constexpr double parameter_min = 0.01;
inline constexpr double parameter_max = 10.0;

struct EllipticSpec
{
    double mu1       = 1.0;
    double mu2       = 1.0;
    double amplitude = 100.0;

    void validate() const
    {
        if (mu2 == 0.0)
            throw DomainError("EllipticSpec: mu2 must be nonzero");
        if (!std::isfinite(mu1) || !std::isfinite(mu2))
            throw DomainError("EllipticSpec: parameters must be finite");
    }
};

/// s(u; mu) = (mu1 / mu2) (exp(mu2 u) - 1)
inline double elliptic_reaction(double u, double mu1, double mu2)
{
    return mu1 / mu2 * std::expm1(mu2 * u);
}

inline Vector elliptic_source(const Grid2d& grid, double amplitude)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Vector           src(grid.size());
    for (Index k = 0; k < grid.size(); ++k)
        src(k) = amplitude * std::sin(two_pi * grid.x1(k)) * std::sin(two_pi * grid.x2(k));
    return src;
}

/// f(u) = -s(u; mu), so that A u + f(u) + b = Lap(u) - s(u) + source
inline Nonlinearity elliptic_nonlinearity(const EllipticSpec& spec)
{
    spec.validate();
    const double mu1 = spec.mu1;
    const double mu2 = spec.mu2;
    return Nonlinearity::componentwise(
        [mu1, mu2](double, Index, double u) { return -elliptic_reaction(u, mu1, mu2); },
        [mu1, mu2](double, Index, double u) { return -mu1 * std::exp(mu2 * u); });
}

inline FullOrderModel< SparseMatrix > build_elliptic_fom(const Grid2d& grid, const EllipticSpec& spec)
{
    spec.validate();
    FullOrderModel< SparseMatrix > fom;
    fom.mass      = sparse_identity(grid.size());
    fom.stiffness = laplacian(grid);
    fom.f         = elliptic_nonlinearity(spec);
    fom.forcing   = elliptic_source(grid, spec.amplitude);
    fom.y0        = Vector::Zero(grid.size());
    return fom;
}

/// R(u) = -Lap(u) + s(u; mu) - source
template < typename System >
Vector elliptic_residual(const System& sys, const Vector& u)
{
    return -steady_residual(sys, u);
}

/// per_axis^2 parameter pairs, log-spaced on [lo, hi] in each coordinate, mu1 varying fastest
inline DenseMatrix log_spaced_parameters(Index per_axis, double lo = parameter_min, double hi = parameter_max)
{
    if (per_axis < 1)
        throw DomainError("log_spaced_parameters: need at least one point per axis");
    Vector axis(per_axis);
    for (Index i = 0; i < per_axis; ++i)
    {
        const double s = per_axis == 1 ? 0.0 : static_cast< double >(i) / static_cast< double >(per_axis - 1);
        axis(i)        = std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)));
    }
    axis(0)            = lo;
    axis(per_axis - 1) = per_axis == 1 ? lo : hi;

    DenseMatrix out(2, per_axis * per_axis);
    for (Index j = 0; j < per_axis; ++j)
        for (Index i = 0; i < per_axis; ++i)
        {
            out(0, i + per_axis * j) = axis(i);
            out(1, i + per_axis * j) = axis(j);
        }
    return out;
}

struct SampleFailure
{
    Index       sample;
    std::string message;
};

struct EllipticSnapshots
{
    SnapshotMatrix              states;     // u(mu), stamps = (mu1, mu2)
    SnapshotMatrix              nonlinear;  // s(u(mu); mu)
    std::vector< int >          iterations; // Newton iterations per stored column
    std::vector< SampleFailure > failures;
};

inline EllipticSnapshots generate_snapshots_elliptic(const Grid2d& grid, const DenseMatrix& parameters,
                                                     const NewtonOptions& opts = {}, double amplitude = 100.0)
{
    if (parameters.rows() != 2)
        throw ShapeError("generate_snapshots_elliptic: parameters must be a 2 x s matrix");
    for (Index j = 0; j < parameters.cols(); ++j)
        for (Index i = 0; i < 2; ++i)
            if (!(parameters(i, j) >= parameter_min && parameters(i, j) <= parameter_max))
                throw DomainError("generate_snapshots_elliptic: sample " + std::to_string(j) +
                                  " lies outside the admissible box");

    const Index n = grid.size();
    std::vector< Vector > solutions, reactions;
    std::vector< Index >  kept;
    EllipticSnapshots     out;

    auto fom = build_elliptic_fom(grid, EllipticSpec{ parameters(0, 0), parameters(1, 0), amplitude });
    for (Index j = 0; j < parameters.cols(); ++j)
    {
        const EllipticSpec spec{ parameters(0, j), parameters(1, j), amplitude };
        fom.f = elliptic_nonlinearity(spec);
        try
        {
            const NewtonResult res = solve_steady_newton(fom, opts);
            Vector             s(n);
            for (Index k = 0; k < n; ++k)
                s(k) = elliptic_reaction(res.solution(k), spec.mu1, spec.mu2);
            solutions.push_back(res.solution);
            reactions.push_back(std::move(s));
            kept.push_back(j);
            out.iterations.push_back(res.iterations);
        }
        catch (const Error& e)
        {
            out.failures.push_back(SampleFailure{ j, e.what() });
        }
    }

    const Index m = static_cast< Index >(kept.size());
    DenseMatrix U(n, m), S(n, m), stamps(2, m);
    for (Index c = 0; c < m; ++c)
    {
        U.col(c)      = solutions[static_cast< std::size_t >(c)];
        S.col(c)      = reactions[static_cast< std::size_t >(c)];
        stamps.col(c) = parameters.col(kept[static_cast< std::size_t >(c)]);
    }
    out.states    = SnapshotMatrix(std::move(U), stamps, Vector::Ones(m));
    out.nonlinear = SnapshotMatrix(std::move(S), stamps, Vector::Ones(m));
    return out;
}

} // namespace rmor
