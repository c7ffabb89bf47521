#pragma once
//
// Randomized range finding and randomized SVD.
//
// The column space of Y (n x m) is sampled as Y * Omega with a Gaussian test
// matrix Omega of shape m x (rank + oversampling). Optional power iterations
// replace the sketch by (Y Y^T)^q Y Omega, re-orthonormalizing after every
// product.
//

#include <cmath>
#include <cstdint>
#include <string>

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"
#include "rmor/random.hpp"

namespace rmor {

struct SketchConfig
{
    Index         target_rank      = 10;
    Index         oversampling     = 10;
    Index         power_iterations = 1;
    std::uint64_t seed             = 0;

    Index sketch_width() const { return target_rank + oversampling; }

    /// throws ShapeError/DomainError when the config cannot be applied to a rows x cols matrix
    void validate(Index rows, Index cols) const
    {
        if (target_rank < 1)
            throw DomainError("SketchConfig: target rank must be >= 1");
        if (oversampling < 0 || power_iterations < 0)
            throw DomainError("SketchConfig: oversampling and power iterations must be >= 0");
        if (sketch_width() > std::min(rows, cols))
            throw ShapeError("SketchConfig: rank + oversampling = " + std::to_string(sketch_width()) +
                             " exceeds min(rows, cols) = " + std::to_string(std::min(rows, cols)));
    }
};

struct QbFactorization
{
    DenseMatrix Q;  // n x (rank + oversampling), orthonormal columns
    DenseMatrix B;  // (rank + oversampling) x m, B = Q^T Y
};

/// i.i.d. standard normal entries, filled column by column from Rng(seed)
inline DenseMatrix gaussian_test_matrix(Index rows, Index cols, std::uint64_t seed)
{
    if (rows < 1 || cols < 1)
        throw ShapeError("gaussian_test_matrix: dimensions must be >= 1");

    Rng         rng(seed);
    DenseMatrix omega(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            omega(i, j) = rng.normal();
    return omega;
}

inline QbFactorization qb_decompose(const DenseMatrix& Y, const SketchConfig& cfg)
{
    cfg.validate(Y.rows(), Y.cols());
    require_finite(Y, "qb_decompose");

    const DenseMatrix omega = gaussian_test_matrix(Y.cols(), cfg.sketch_width(), cfg.seed);

    DenseMatrix Q = orthonormalize(Y * omega);
    for (Index it = 0; it < cfg.power_iterations; ++it)
    {
        const DenseMatrix Z = orthonormalize(Y.transpose() * Q);
        Q                   = orthonormalize(Y * Z);
    }

    DenseMatrix B = Q.transpose() * Y;
    return QbFactorization{ std::move(Q), std::move(B) };
}

/// Randomized SVD truncated to cfg.target_rank triplets.
inline SvdResult rsvd(const DenseMatrix& Y, const SketchConfig& cfg)
{
    const QbFactorization qb    = qb_decompose(Y, cfg);
    const SvdResult       small = svd_thin(qb.B);

    const Index k = cfg.target_rank;
    return SvdResult{ qb.Q * small.U.leftCols(k), small.sigma.head(k), small.V.leftCols(k) };
}

//
// Expected squared projection error of a rank-`rank` randomized basis built
// with `oversampling` extra samples:
//
//   (1 + sqrt(rank / (p - 1))) sigma_{rank+1}^2 + sqrt(rank + p) / p * sum_{j > rank} sigma_j^2
//
// sigma holds the full singular spectrum, non-increasing, 0-based.
//
inline double expected_error_bound(const Vector& sigma, Index rank, Index oversampling)
{
    if (oversampling <= 1)
        throw DomainError("expected_error_bound: oversampling must be >= 2");
    if (rank < 1 || rank + oversampling > sigma.size())
        throw DomainError("expected_error_bound: rank + oversampling exceeds spectrum length");

    const double l = static_cast< double >(rank);
    const double p = static_cast< double >(oversampling);

    const double lead = sigma(rank) * sigma(rank);
    const double tail = sigma.tail(sigma.size() - rank).squaredNorm();

    return (1.0 + std::sqrt(l / (p - 1.0))) * lead + std::sqrt(l + p) / p * tail;
}

} // namespace rmor
