#pragma once
//
// Galerkin reduced-order models.
//
// Full-order model:     M y' = A y + f(t, y) + b,   y(0) = y0
// Reduced model:        M_l a' = A_l a + N(t, a) + Psi^T b,   a(0) = Psi^T y0
//
// with M_l = Psi^T M Psi, A_l = Psi^T A Psi and N either the full lift
// Psi^T f(t, Psi a) or the DEIM approximation
// (Psi^T U (S^T U)^{-1}) f|_S(t, S^T Psi a).
//
// Time stepping is linearly-implicit Euler:
//
//   (M - dt A) y_{j+1} = M y_j + dt (f(t_j, y_j) + b)
//
// Steady problems A y + f(y) + b = 0 are solved by Newton's method.
//
// The integrator and the Newton solver are templates over the system type, so
// a reduced model with Psi = I and a dense full-order model execute the same
// arithmetic and produce identical results.
//

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "rmor/deim.hpp"
#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"

namespace rmor {

using SparseMatrix = Eigen::SparseMatrix< double >;

//
// Nonlinear term f(t, y). A componentwise term f_i(t, y) = g(t, i, y_i) also
// carries its pointwise form, which DEIM and the analytic Jacobian need.
//
struct Nonlinearity
{
    using FullFn      = std::function< Vector(double, const Vector&) >;
    using PointwiseFn = std::function< double(double, Index, double) >;

    FullFn      full;
    PointwiseFn pointwise;             // g(t, row, value)
    PointwiseFn pointwise_derivative;  // dg/dvalue

    bool is_pointwise() const { return static_cast< bool >(pointwise); }
    bool has_derivative() const { return static_cast< bool >(pointwise_derivative); }

    static Nonlinearity zero()
    {
        return componentwise([](double, Index, double) { return 0.0; },
                             [](double, Index, double) { return 0.0; });
    }

    static Nonlinearity componentwise(PointwiseFn value, PointwiseFn derivative = {})
    {
        Nonlinearity f;
        f.pointwise            = value;
        f.pointwise_derivative = std::move(derivative);
        f.full                 = [value](double t, const Vector& y) {
            Vector out(y.size());
            for (Index i = 0; i < y.size(); ++i)
                out(i) = value(t, i, y(i));
            return out;
        };
        return f;
    }
};

template < typename Op >
struct FullOrderModel
{
    Op           mass;
    Op           stiffness;
    Nonlinearity f;
    Vector       forcing;  // empty means zero
    Vector       y0;

    Index dimension() const { return y0.size(); }

    void validate() const
    {
        const Index n = y0.size();
        if (mass.rows() != n || mass.cols() != n || stiffness.rows() != n || stiffness.cols() != n)
            throw ShapeError("FullOrderModel: operators must be n x n with n = " + std::to_string(n));
        if (forcing.size() != 0 && forcing.size() != n)
            throw ShapeError("FullOrderModel: forcing has wrong length");
        if (!f.full)
            throw InvalidInputError("FullOrderModel: nonlinearity is not set");
    }
};

template < typename Op >
FullOrderModel< DenseMatrix > to_dense(const FullOrderModel< Op >& fom)
{
    FullOrderModel< DenseMatrix > out;
    out.mass      = DenseMatrix(fom.mass);
    out.stiffness = DenseMatrix(fom.stiffness);
    out.f         = fom.f;
    out.forcing   = fom.forcing;
    out.y0        = fom.y0;
    return out;
}

enum class NonlinearMode { full_lift, deim };

struct ReducedModel
{
    DenseMatrix   mass;       // l x l
    DenseMatrix   stiffness;  // l x l
    DenseMatrix   basis;      // n x l
    Vector        y0;         // l
    Vector        forcing;    // l, empty means zero
    NonlinearMode mode = NonlinearMode::full_lift;
    Nonlinearity  f;

    // DEIM only
    std::optional< DeimOperator > deim;
    DenseMatrix                   deim_projection;  // l x k, Psi^T U (S^T U)^{-1}
    DenseMatrix                   sampled_basis;    // k x l, S^T Psi

    Index dimension() const { return basis.cols(); }
    Index full_dimension() const { return basis.rows(); }
};

// -------------------------------------------------------------------------
// linear solvers for the stepping and Jacobian matrices
// -------------------------------------------------------------------------

class SparseLu
{
public:
    explicit SparseLu(const SparseMatrix& A)
    {
        if (A.rows() != A.cols())
            throw ShapeError("SparseLu: matrix is not square");
        SparseMatrix compressed = A;
        compressed.makeCompressed();
        lu_.compute(compressed);
        if (lu_.info() != Eigen::Success)
            throw SingularityError("SparseLu: factorization failed: " + lu_.lastErrorMessage(),
                                   std::numeric_limits< double >::infinity());
    }

    template < typename Rhs >
    Vector solve(const Eigen::MatrixBase< Rhs >& b) const
    {
        Vector x = lu_.solve(b);
        if (!x.allFinite())
            throw SingularityError("SparseLu: solve produced non-finite values",
                                   std::numeric_limits< double >::infinity());
        return x;
    }

private:
    // SparseLU::solve is logically const but not marked so
    mutable Eigen::SparseLU< SparseMatrix, Eigen::COLAMDOrdering< int > > lu_;
};

template < typename Op >
struct SolverFor;

template <>
struct SolverFor< DenseMatrix >
{
    using type = DenseLu;
};

template <>
struct SolverFor< SparseMatrix >
{
    using type = SparseLu;
};

template < typename Op >
using solver_for_t = typename SolverFor< Op >::type;

// -------------------------------------------------------------------------
// projection
// -------------------------------------------------------------------------

namespace detail {

inline void check_orthonormal(const DenseMatrix& basis, Index n)
{
    if (basis.rows() != n)
        throw ShapeError("project_model: basis has " + std::to_string(basis.rows()) +
                         " rows, model has dimension " + std::to_string(n));
    if (basis.cols() < 1)
        throw ShapeError("project_model: empty basis");
    // Frobenius norm bounds the spectral norm; only fall back to the SVD when it is inconclusive
    const DenseMatrix gram = basis.transpose() * basis - DenseMatrix::Identity(basis.cols(), basis.cols());
    if (gram.norm() <= 1e-8)
        return;
    const double defect = spectral_norm(gram);
    if (!(defect <= 1e-8))
        throw BasisError("project_model: basis is not orthonormal (||Psi^T Psi - I|| = " +
                         std::to_string(defect) + ")");
}

template < typename Op >
ReducedModel project_common(const FullOrderModel< Op >& fom, const DenseMatrix& basis)
{
    fom.validate();
    check_orthonormal(basis, fom.dimension());

    ReducedModel rom;
    const DenseMatrix m_psi = fom.mass * basis;
    const DenseMatrix a_psi = fom.stiffness * basis;
    rom.mass      = basis.transpose() * m_psi;
    rom.stiffness = basis.transpose() * a_psi;
    rom.basis     = basis;
    rom.y0        = basis.transpose() * fom.y0;
    if (fom.forcing.size() != 0)
        rom.forcing = basis.transpose() * fom.forcing;
    rom.f = fom.f;
    return rom;
}

} // namespace detail

/// Galerkin projection with the nonlinearity evaluated on the lifted state.
template < typename Op >
ReducedModel project_model(const FullOrderModel< Op >& fom, const DenseMatrix& basis)
{
    ReducedModel rom = detail::project_common(fom, basis);
    rom.mode         = NonlinearMode::full_lift;
    return rom;
}

/// Galerkin projection with DEIM hyper-reduction of the nonlinearity.
template < typename Op >
ReducedModel project_model(const FullOrderModel< Op >& fom, const DenseMatrix& basis,
                           const DeimOperator& deim)
{
    if (!fom.f.is_pointwise())
        throw InvalidInputError("project_model: DEIM needs a componentwise nonlinearity");
    if (deim.U.rows() != fom.dimension())
        throw ShapeError("project_model: DEIM basis has wrong row count");

    ReducedModel rom    = detail::project_common(fom, basis);
    rom.mode            = NonlinearMode::deim;
    rom.deim            = deim;
    rom.deim_projection = basis.transpose() * deim.interp_map;
    rom.sampled_basis   = detail::sample_rows(basis, deim.indices);
    return rom;
}

// -------------------------------------------------------------------------
// right-hand sides
// -------------------------------------------------------------------------

//
// Scratch space for nonlinear evaluations. Sized once per integration so the
// DEIM path allocates nothing inside the time loop.
//
struct Workspace
{
    Vector samples;   // k
    Vector fsamples;  // k
};

inline Workspace make_workspace(const ReducedModel& rom)
{
    Workspace ws;
    if (rom.mode == NonlinearMode::deim)
    {
        ws.samples.resize(rom.deim->size());
        ws.fsamples.resize(rom.deim->size());
    }
    return ws;
}

template < typename Op >
Workspace make_workspace(const FullOrderModel< Op >&)
{
    return {};
}

/// out = N(t, a) + Psi^T b
inline void nonlinear_term(const ReducedModel& rom, double t, const Vector& a, Vector& out, Workspace& ws)
{
    if (rom.mode == NonlinearMode::deim)
    {
        const auto& idx = rom.deim->indices;
        ws.samples.noalias() = rom.sampled_basis * a;
        for (Index i = 0; i < ws.samples.size(); ++i)
            ws.fsamples(i) = rom.f.pointwise(t, idx[static_cast< std::size_t >(i)], ws.samples(i));
        out.noalias() = rom.deim_projection * ws.fsamples;
    }
    else
    {
        const Vector lifted = rom.basis * a;
        const Vector fv     = rom.f.full(t, lifted);
        out.noalias()       = rom.basis.transpose() * fv;
    }
    if (rom.forcing.size() != 0)
        out += rom.forcing;
}

/// out = f(t, y) + b
template < typename Op >
void nonlinear_term(const FullOrderModel< Op >& fom, double t, const Vector& y, Vector& out, Workspace&)
{
    out = fom.f.full(t, y);
    if (fom.forcing.size() != 0)
        out += fom.forcing;
}

/// A_l a + N(t, a) + Psi^T b
inline Vector reduced_rhs(const ReducedModel& rom, double t, const Vector& a)
{
    if (a.size() != rom.dimension())
        throw ShapeError("reduced_rhs: state has wrong length");
    Workspace ws = make_workspace(rom);
    Vector    nl(rom.dimension());
    nonlinear_term(rom, t, a, nl, ws);
    return rom.stiffness * a + nl;
}

// -------------------------------------------------------------------------
// time integration
// -------------------------------------------------------------------------

struct Trajectory
{
    std::vector< double > times;
    DenseMatrix           states;  // dimension x (steps + 1), column j at times[j]
};

template < typename System >
Trajectory integrate_steps(const System& sys, double dt, Index steps)
{
    if (!(dt > 0.0))
        throw DomainError("integrate_semi_implicit: time step must be positive");
    if (steps < 0)
        throw DomainError("integrate_semi_implicit: negative step count");

    const auto& M = sys.mass;
    const auto& A = sys.stiffness;
    using Op      = std::decay_t< decltype(M) >;

    const Op                 stepping = M - dt * A;
    const solver_for_t< Op > solver(stepping);

    const Index n = sys.y0.size();
    Trajectory  traj;
    traj.times.resize(static_cast< std::size_t >(steps + 1));
    traj.states.resize(n, steps + 1);
    traj.states.col(0) = sys.y0;
    traj.times[0]      = 0.0;

    Workspace ws = make_workspace(sys);
    Vector    y  = sys.y0;
    Vector    nl(n);
    Vector    rhs(n);

    for (Index j = 0; j < steps; ++j)
    {
        const double t = static_cast< double >(j) * dt;
        nonlinear_term(sys, t, y, nl, ws);
        rhs.noalias() = M * y;
        rhs += dt * nl;
        y = solver.solve(rhs);

        if (!y.allFinite())
            throw DivergenceError("integrate_semi_implicit: non-finite state at step " +
                                      std::to_string(j + 1),
                                  static_cast< std::size_t >(j + 1));
        traj.states.col(j + 1)                       = y;
        traj.times[static_cast< std::size_t >(j + 1)] = static_cast< double >(j + 1) * dt;
    }
    return traj;
}

/// Integrate from 0 to T (rounded to a whole number of steps).
template < typename System >
Trajectory integrate_semi_implicit(const System& sys, double dt, double T)
{
    if (!(dt > 0.0) || !(T >= 0.0))
        throw DomainError("integrate_semi_implicit: need dt > 0 and T >= 0");
    return integrate_steps(sys, dt, static_cast< Index >(std::llround(T / dt)));
}

/// Psi a for every column of the reduced trajectory.
inline DenseMatrix lift(const DenseMatrix& basis, const DenseMatrix& reduced_states)
{
    if (basis.cols() != reduced_states.rows())
        throw ShapeError("lift: basis has " + std::to_string(basis.cols()) + " columns, states have " +
                         std::to_string(reduced_states.rows()) + " rows");
    return basis * reduced_states;
}

// -------------------------------------------------------------------------
// steady problems
// -------------------------------------------------------------------------

/// A y + f(0, y) + b
template < typename Op >
Vector steady_residual(const FullOrderModel< Op >& fom, const Vector& y)
{
    Vector out(y.size());
    Workspace ws;
    nonlinear_term(fom, 0.0, y, out, ws);
    return Vector(fom.stiffness * y) + out;
}

inline Vector steady_residual(const ReducedModel& rom, const Vector& a)
{
    return reduced_rhs(rom, 0.0, a);
}

/// A + diag(f'(y))
template < typename Op >
Op steady_jacobian(const FullOrderModel< Op >& fom, const Vector& y)
{
    if (!fom.f.has_derivative())
        throw InvalidInputError("steady_jacobian: nonlinearity has no analytic derivative");
    Vector d(y.size());
    for (Index i = 0; i < y.size(); ++i)
        d(i) = fom.f.pointwise_derivative(0.0, i, y(i));

    if constexpr (std::is_same_v< Op, SparseMatrix >)
    {
        SparseMatrix diag(y.size(), y.size());
        diag.reserve(Eigen::VectorXi::Constant(y.size(), 1));
        for (Index i = 0; i < y.size(); ++i)
            diag.insert(i, i) = d(i);
        return SparseMatrix(fom.stiffness + diag);
    }
    else
    {
        DenseMatrix J = fom.stiffness;
        J.diagonal() += d;
        return J;
    }
}

/// A_l + Psi^T diag(f'(Psi a)) Psi, or the DEIM analogue P diag(f'(S^T Psi a)) S^T Psi
inline DenseMatrix steady_jacobian(const ReducedModel& rom, const Vector& a)
{
    if (!rom.f.has_derivative())
        throw InvalidInputError("steady_jacobian: nonlinearity has no analytic derivative");

    if (rom.mode == NonlinearMode::deim)
    {
        const Vector samples = rom.sampled_basis * a;
        Vector       d(samples.size());
        for (Index i = 0; i < d.size(); ++i)
            d(i) = rom.f.pointwise_derivative(0.0, rom.deim->indices[static_cast< std::size_t >(i)],
                                              samples(i));
        return rom.stiffness + rom.deim_projection * d.asDiagonal() * rom.sampled_basis;
    }

    const Vector lifted = rom.basis * a;
    Vector       d(lifted.size());
    for (Index i = 0; i < d.size(); ++i)
        d(i) = rom.f.pointwise_derivative(0.0, i, lifted(i));
    return rom.stiffness + rom.basis.transpose() * d.asDiagonal() * rom.basis;
}

struct NewtonOptions
{
    double tol      = 1e-10;  // on the residual infinity norm
    int    max_iter = 50;
};

struct NewtonResult
{
    Vector solution;
    int    iterations    = 0;
    double residual_norm = 0.0;
};

template < typename System >
NewtonResult solve_steady_newton(const System& sys, Vector x, const NewtonOptions& opts = {})
{
    using Op = std::decay_t< decltype(sys.stiffness) >;

    Vector r     = steady_residual(sys, x);
    double rnorm = r.template lpNorm< Eigen::Infinity >();
    int    it    = 0;

    while (!(rnorm <= opts.tol))
    {
        if (!std::isfinite(rnorm))
            throw ConvergenceError("solve_steady_newton: residual became non-finite", rnorm, it);
        if (it >= opts.max_iter)
            throw ConvergenceError("solve_steady_newton: no convergence after " +
                                       std::to_string(it) + " iterations (residual " +
                                       std::to_string(rnorm) + ")",
                                   rnorm, it);

        const Op                 J = steady_jacobian(sys, x);
        const solver_for_t< Op > solver(J);
        x -= solver.solve(r);
        ++it;

        r     = steady_residual(sys, x);
        rnorm = r.template lpNorm< Eigen::Infinity >();
    }
    return NewtonResult{ std::move(x), it, rnorm };
}

/// Newton from the zero initial guess.
template < typename System >
NewtonResult solve_steady_newton(const System& sys, const NewtonOptions& opts = {})
{
    return solve_steady_newton(sys, Vector::Zero(sys.stiffness.rows()), opts);
}

} // namespace rmor
