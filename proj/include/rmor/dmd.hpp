#pragma once
//
// Exact and compressive dynamic mode decomposition.
//
// Given snapshot pairs Y' = A Y, the rank-r DMD fits
//
//   A_tilde = U^T Y' V Sigma^{-1}      (Y = U Sigma V^T truncated to r)
//   A_tilde W = W Lambda
//   modes = Y' V Sigma^{-1} W
//
// The compressive variant runs the same fit on X = C Y, X' = C Y' for a
// p x n measurement matrix C. Its modes are reconstructed from the full Y'
// by default, since a Galerkin basis has to live in R^n; the compressed
// X' V Sigma^{-1} W modes are available through ModeSpace::compressed.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"
#include "rmor/random.hpp"

namespace rmor {

enum class DmdSource { exact, compressive };

enum class ModeSpace { full, compressed };

struct DmdModel
{
    ComplexVector eigenvalues;  // sorted by |lambda| descending, conjugate pairs adjacent
    ComplexMatrix modes;        // one column per eigenvalue
    ComplexVector amplitudes;   // least-squares fit of the modes to the first snapshot
    Index         rank   = 0;
    DmdSource     source = DmdSource::exact;
};

enum class MeasurementEnsemble { gaussian, sparse_bernoulli, row_subsample };

struct MeasurementMatrix
{
    DenseMatrix         C;  // p x n
    MeasurementEnsemble ensemble = MeasurementEnsemble::gaussian;
    std::uint64_t       seed     = 0;
    std::vector< Index > rows;  // selected rows, row_subsample only
};

namespace detail {

inline std::vector< Index > dmd_order(const ComplexVector& lambda)
{
    std::vector< Index > order(static_cast< std::size_t >(lambda.size()));
    std::iota(order.begin(), order.end(), Index{ 0 });
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double ma = std::abs(lambda(a));
        const double mb = std::abs(lambda(b));
        if (ma != mb)
            return ma > mb;
        if (lambda(a).real() != lambda(b).real())
            return lambda(a).real() > lambda(b).real();
        return lambda(a).imag() > lambda(b).imag();
    });
    return order;
}

inline DmdModel dmd_fit(const DenseMatrix& X, const DenseMatrix& Xp, const DenseMatrix& mode_source,
                        const Vector& first_snapshot, Index r, DmdSource source)
{
    if (X.rows() != Xp.rows() || X.cols() != Xp.cols())
        throw ShapeError("dmd: Y and Y' must have the same shape");
    if (r < 1 || r > std::min(X.rows(), X.cols()))
        throw RankError("dmd: rank " + std::to_string(r) + " outside [1, min(rows, cols)]");

    const SvdResult svd = svd_thin(X);
    if (!(svd.sigma(0) > 0.0) || !(svd.sigma(r - 1) > 0.0))
        throw SingularityError("dmd: zero singular value inside the truncation",
                               std::numeric_limits< double >::infinity());
    if (r > numerical_rank(svd.sigma))
        throw RankError("dmd: rank " + std::to_string(r) + " exceeds numerical rank " +
                        std::to_string(numerical_rank(svd.sigma)));

    const DenseMatrix Ur   = svd.U.leftCols(r);
    const DenseMatrix VrSi = svd.V.leftCols(r) * svd.sigma.head(r).cwiseInverse().asDiagonal();

    const DenseMatrix a_tilde = Ur.transpose() * (Xp * VrSi);
    const EigResult   eig     = eig_dense(a_tilde);

    const ComplexMatrix raw_modes = (mode_source * VrSi).cast< std::complex< double > >() * eig.vectors;

    const auto order = dmd_order(eig.values);
    DmdModel   model;
    model.rank   = r;
    model.source = source;
    model.eigenvalues.resize(r);
    model.modes.resize(raw_modes.rows(), r);
    for (Index i = 0; i < r; ++i)
    {
        model.eigenvalues(i) = eig.values(order[static_cast< std::size_t >(i)]);
        model.modes.col(i)   = raw_modes.col(order[static_cast< std::size_t >(i)]);
    }

    const ComplexVector y0 = first_snapshot.cast< std::complex< double > >();
    model.amplitudes       = model.modes.completeOrthogonalDecomposition().solve(y0);
    return model;
}

} // namespace detail

inline DmdModel exact_dmd(const DenseMatrix& Y, const DenseMatrix& Yp, Index r)
{
    if (Y.cols() < 1)
        throw ShapeError("exact_dmd: no snapshots");
    return detail::dmd_fit(Y, Yp, Yp, Y.col(0), r, DmdSource::exact);
}

inline MeasurementMatrix measurement_matrix(Index p, Index n, MeasurementEnsemble ensemble,
                                            std::uint64_t seed)
{
    if (p < 1 || n < 1)
        throw ShapeError("measurement_matrix: dimensions must be >= 1");
    if (p > n)
        throw ShapeError("measurement_matrix: p = " + std::to_string(p) + " exceeds n = " +
                         std::to_string(n));

    MeasurementMatrix out;
    out.ensemble = ensemble;
    out.seed     = seed;
    out.C        = DenseMatrix::Zero(p, n);

    Rng rng(seed);
    switch (ensemble)
    {
        case MeasurementEnsemble::gaussian: {
            const double scale = 1.0 / std::sqrt(static_cast< double >(p));
            for (Index j = 0; j < n; ++j)
                for (Index i = 0; i < p; ++i)
                    out.C(i, j) = scale * rng.normal();
            break;
        }
        case MeasurementEnsemble::sparse_bernoulli: {
            // entries sqrt(3/p) * {+1 w.p. 1/6, 0 w.p. 2/3, -1 w.p. 1/6}
            const double scale = std::sqrt(3.0 / static_cast< double >(p));
            for (Index j = 0; j < n; ++j)
                for (Index i = 0; i < p; ++i)
                {
                    const auto d = rng.below(6);
                    out.C(i, j)  = d == 0 ? scale : (d == 1 ? -scale : 0.0);
                }
            break;
        }
        case MeasurementEnsemble::row_subsample: {
            // partial Fisher-Yates
            std::vector< Index > perm(static_cast< std::size_t >(n));
            std::iota(perm.begin(), perm.end(), Index{ 0 });
            for (Index i = 0; i < p; ++i)
            {
                const auto j = i + static_cast< Index >(rng.below(static_cast< std::uint64_t >(n - i)));
                std::swap(perm[static_cast< std::size_t >(i)], perm[static_cast< std::size_t >(j)]);
            }
            out.rows.assign(perm.begin(), perm.begin() + p);
            for (Index i = 0; i < p; ++i)
                out.C(i, out.rows[static_cast< std::size_t >(i)]) = 1.0;
            break;
        }
    }
    return out;
}

inline DmdModel cdmd(const DenseMatrix& Y, const DenseMatrix& Yp, const MeasurementMatrix& C, Index r,
                     ModeSpace space = ModeSpace::full)
{
    if (C.C.cols() != Y.rows())
        throw ShapeError("cdmd: measurement matrix has " + std::to_string(C.C.cols()) +
                         " columns, snapshots have " + std::to_string(Y.rows()) + " rows");
    if (Y.cols() < 1)
        throw ShapeError("cdmd: no snapshots");
    if (Yp.rows() != Y.rows() || Yp.cols() != Y.cols())
        throw ShapeError("cdmd: Y and Y' must have the same shape");

    const DenseMatrix X  = C.C * Y;
    const DenseMatrix Xp = C.C * Yp;

    if (space == ModeSpace::full)
        return detail::dmd_fit(X, Xp, Yp, Y.col(0), r, DmdSource::compressive);
    return detail::dmd_fit(X, Xp, Xp, X.col(0), r, DmdSource::compressive);
}

enum class RealifyStatus {
    ok,
    reduced_rank  // fewer independent real directions than requested
};

struct RealBasis
{
    DenseMatrix   modes;  // n x count, orthonormal
    Index         count          = 0;
    Index         requested_rank = 0;
    RealifyStatus status         = RealifyStatus::ok;
};

//
// Real orthonormal Galerkin basis from complex DMD modes.
//
// Conjugate pairs are collapsed to one representative, the survivors are
// ranked by |amplitude * lambda|, and real and imaginary parts are stacked
// (imaginary part only for genuinely complex modes). Columns that add no new
// direction are dropped, the first `rank` survivors are orthonormalized.
//
inline RealBasis realify_modes(const DmdModel& model, Index rank)
{
    if (rank < 1)
        throw RankError("realify_modes: rank must be >= 1");
    if (model.modes.cols() < (rank + 1) / 2)
        throw RankError("realify_modes: model has " + std::to_string(model.modes.cols()) +
                        " modes, need at least " + std::to_string((rank + 1) / 2));

    const Index r      = model.modes.cols();
    const double scale = model.eigenvalues.cwiseAbs().maxCoeff();
    const double imag_tol = 1e-10 * std::max(scale, 1.0);

    // conjugate-pair deduplication: keep the Im >= 0 member
    std::vector< Index > reps;
    std::vector< bool >  used(static_cast< std::size_t >(r), false);
    for (Index i = 0; i < r; ++i)
    {
        if (used[static_cast< std::size_t >(i)])
            continue;
        used[static_cast< std::size_t >(i)] = true;
        const auto lam = model.eigenvalues(i);
        if (std::abs(lam.imag()) > imag_tol)
        {
            for (Index j = i + 1; j < r; ++j)
                if (!used[static_cast< std::size_t >(j)] &&
                    std::abs(model.eigenvalues(j) - std::conj(lam)) <= imag_tol)
                {
                    used[static_cast< std::size_t >(j)] = true;
                    break;
                }
        }
        reps.push_back(i);
    }

    auto weight = [&](Index i) {
        const auto b = model.amplitudes.size() == r ? model.amplitudes(i) : std::complex< double >(1.0);
        return std::abs(b * model.eigenvalues(i));
    };
    std::stable_sort(reps.begin(), reps.end(), [&](Index a, Index b) { return weight(a) > weight(b); });

    std::vector< Vector > columns;
    for (Index i : reps)
    {
        const bool complex_mode = std::abs(model.eigenvalues(i).imag()) > imag_tol;
        columns.push_back(model.modes.col(i).real());
        if (complex_mode)
            columns.push_back(model.modes.col(i).imag());
    }

    double max_norm = 0.0;
    for (const auto& c : columns)
        max_norm = std::max(max_norm, c.norm());

    // keep columns that add a new direction (twice-reorthogonalized Gram-Schmidt test)
    DenseMatrix kept(model.modes.rows(), 0);
    DenseMatrix probe(model.modes.rows(), 0);
    for (const auto& c : columns)
    {
        if (kept.cols() == rank)
            break;
        if (!(c.norm() > 1e-12 * max_norm))
            continue;
        Vector v = c;
        for (int pass = 0; pass < 2; ++pass)
            v -= probe * (probe.transpose() * v);
        if (v.norm() > 1e-10 * c.norm())
        {
            probe.conservativeResize(Eigen::NoChange, probe.cols() + 1);
            probe.col(probe.cols() - 1) = v.normalized();
            kept.conservativeResize(Eigen::NoChange, kept.cols() + 1);
            kept.col(kept.cols() - 1) = c;
        }
    }

    RealBasis out;
    out.requested_rank = rank;
    if (kept.cols() == 0)
    {
        out.modes  = DenseMatrix(model.modes.rows(), 0);
        out.status = RealifyStatus::reduced_rank;
        return out;
    }

    const DenseMatrix Q = qr_thin(kept).Q;

    out.modes  = Q;
    out.count  = Q.cols();
    out.status = out.count < rank ? RealifyStatus::reduced_rank : RealifyStatus::ok;
    return out;
}

} // namespace rmor
