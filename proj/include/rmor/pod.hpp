#pragma once
//
// Proper orthogonal decomposition: the rank-l orthonormal basis minimizing
//
//   sum_j alpha_j || y_j - sum_i <y_j, psi_i> psi_i ||^2
//
// is given by the leading left singular vectors of Y diag(sqrt(alpha)).
// The minimum equals the sum of the squared neglected singular values.
//
// Snapshots are indexed from 0; every stored column contributes, whatever
// the first-index convention of the time grid.
//

#include <cmath>
#include <string>

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"
#include "rmor/sketch.hpp"

namespace rmor {

class SnapshotMatrix
{
public:
    SnapshotMatrix() = default;

    /// unit weights, stamps = column index
    explicit SnapshotMatrix(DenseMatrix data)
        : data_(std::move(data)),
          stamps_(DenseMatrix(1, data_.cols())),
          weights_(Vector::Ones(data_.cols()))
    {
        for (Index j = 0; j < data_.cols(); ++j)
            stamps_(0, j) = static_cast< double >(j);
    }

    /// stamps: one column per snapshot (1 row for times, 2 for parameter pairs, ...)
    SnapshotMatrix(DenseMatrix data, DenseMatrix stamps, Vector weights)
        : data_(std::move(data)), stamps_(std::move(stamps)), weights_(std::move(weights))
    {
        if (stamps_.cols() != data_.cols() || weights_.size() != data_.cols())
            throw ShapeError("SnapshotMatrix: " + std::to_string(data_.cols()) + " columns but " +
                             std::to_string(stamps_.cols()) + " stamps and " +
                             std::to_string(weights_.size()) + " weights");
        if ((weights_.array() < 0.0).any() || !weights_.allFinite())
            throw InvalidInputError("SnapshotMatrix: weights must be finite and non-negative");
    }

    const DenseMatrix& data() const { return data_; }
    const DenseMatrix& stamps() const { return stamps_; }
    const Vector&      weights() const { return weights_; }

    Index rows() const { return data_.rows(); }
    Index cols() const { return data_.cols(); }

    /// data with column j scaled by sqrt(alpha_j)
    DenseMatrix weighted() const { return data_ * weights_.cwiseSqrt().asDiagonal(); }

    friend bool operator==(const SnapshotMatrix& a, const SnapshotMatrix& b)
    {
        return a.data_ == b.data_ && a.stamps_ == b.stamps_ && a.weights_ == b.weights_;
    }

private:
    DenseMatrix data_;
    DenseMatrix stamps_;
    Vector      weights_;
};

enum class PodMethod { full, randomized };

enum class PodStatus {
    ok,
    rank_truncated  // requested rank exceeded the numerical rank
};

struct PodBasis
{
    DenseMatrix modes;           // n x rank
    Vector      sigma;           // retained singular values
    double      total_sigma_sq;  // sum of all squared singular values seen by the method
    PodMethod   method = PodMethod::full;
    Index       rank   = 0;
    Index       requested_rank = 0;
    PodStatus   status = PodStatus::ok;
};

/// Flip each column so its largest-magnitude entry is positive (first one on ties).
inline void normalize_mode_signs(DenseMatrix& modes)
{
    for (Index j = 0; j < modes.cols(); ++j)
    {
        Index  arg  = 0;
        double best = -1.0;
        for (Index i = 0; i < modes.rows(); ++i)
        {
            const double a = std::abs(modes(i, j));
            if (a > best)
            {
                best = a;
                arg  = i;
            }
        }
        if (modes(arg, j) < 0.0)
            modes.col(j) *= -1.0;
    }
}

inline PodBasis pod_basis(const SnapshotMatrix& snap, Index rank)
{
    if (rank < 1 || rank > std::min(snap.rows(), snap.cols()))
        throw ShapeError("pod_basis: rank " + std::to_string(rank) + " outside [1, min(n, m)]");

    const SvdResult svd = svd_thin(snap.weighted());
    const Index     r   = numerical_rank(svd.sigma);
    const Index     k   = std::min(rank, std::max< Index >(r, 1));

    PodBasis basis;
    basis.modes          = svd.U.leftCols(k);
    basis.sigma          = svd.sigma.head(k);
    basis.total_sigma_sq = svd.sigma.squaredNorm();
    basis.method         = PodMethod::full;
    basis.rank           = k;
    basis.requested_rank = rank;
    basis.status         = k < rank ? PodStatus::rank_truncated : PodStatus::ok;
    normalize_mode_signs(basis.modes);
    return basis;
}

/// Compressed POD: leading columns of a randomized SVD of the weighted snapshots.
inline PodBasis cpod_basis(const SnapshotMatrix& snap, Index rank, SketchConfig cfg)
{
    if (rank < 1)
        throw ShapeError("cpod_basis: rank must be >= 1");
    if (cfg.target_rank < rank)
        throw DomainError("cpod_basis: sketch target rank " + std::to_string(cfg.target_rank) +
                          " is below the requested basis rank " + std::to_string(rank));

    const DenseMatrix Yw  = snap.weighted();
    const SvdResult   svd = rsvd(Yw, cfg);
    const Index       r   = numerical_rank(svd.sigma);
    const Index       k   = std::min(rank, std::max< Index >(r, 1));

    PodBasis basis;
    basis.modes          = svd.U.leftCols(k);
    basis.sigma          = svd.sigma.head(k);
    basis.total_sigma_sq = Yw.squaredNorm();
    basis.method         = PodMethod::randomized;
    basis.rank           = k;
    basis.requested_rank = rank;
    basis.status         = k < rank ? PodStatus::rank_truncated : PodStatus::ok;
    normalize_mode_signs(basis.modes);
    return basis;
}

namespace detail {

// left-to-right sum of squares; partial and full sums share rounding so a
// ratio with zero tail is exactly 1
inline double sum_squares(const Vector& sigma, Index count)
{
    double s = 0.0;
    for (Index i = 0; i < count; ++i)
        s += sigma(i) * sigma(i);
    return s;
}

} // namespace detail

/// Captured energy of the first `rank` singular values.
inline double energy_ratio(const Vector& sigma, Index rank)
{
    if (rank < 0 || rank > sigma.size())
        throw DomainError("energy_ratio: rank outside [0, len(sigma)]");
    const double total = detail::sum_squares(sigma, sigma.size());
    if (!(total > 0.0))
        throw DomainError("energy_ratio: all singular values are zero");
    return detail::sum_squares(sigma, rank) / total;
}

/// Smallest rank whose energy ratio reaches `threshold` in (0, 1].
inline Index rank_for_energy(const Vector& sigma, double threshold)
{
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw DomainError("rank_for_energy: threshold must lie in (0, 1]");
    if (sigma.size() == 0 || !(sigma(0) > 0.0))
        throw DomainError("rank_for_energy: leading singular value must be positive");

    const double total   = detail::sum_squares(sigma, sigma.size());
    double       partial = 0.0;
    for (Index l = 1; l <= sigma.size(); ++l)
    {
        partial += sigma(l - 1) * sigma(l - 1);
        if (partial / total >= threshold)
            return l;
    }
    return sigma.size();
}

/// sum_j alpha_j || y_j - Psi Psi^T y_j ||^2
inline double weighted_projection_error(const SnapshotMatrix& snap, const DenseMatrix& modes)
{
    if (modes.rows() != snap.rows())
        throw ShapeError("weighted_projection_error: basis has wrong row count");
    const DenseMatrix residual = snap.data() - modes * (modes.transpose() * snap.data());
    double            err      = 0.0;
    for (Index j = 0; j < snap.cols(); ++j)
        err += snap.weights()(j) * residual.col(j).squaredNorm();
    return err;
}

} // namespace rmor
