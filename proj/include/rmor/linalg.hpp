#pragma once
//
// Dense factorizations consumed by the sketching, POD, DEIM and DMD layers.
// Storage is Eigen's column-major dynamic matrix; all routines are pure and
// return new values.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "rmor/errors.hpp"

namespace rmor {

using DenseMatrix   = Eigen::MatrixXd;
using Vector        = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index         = Eigen::Index;

/// singular values below this fraction of sigma_1 count as zero
inline constexpr double rank_cutoff = 1e-12;

struct SvdResult
{
    DenseMatrix U;      // left singular vectors, rows x k
    Vector      sigma;  // non-increasing, k = min(rows, cols)
    DenseMatrix V;      // right singular vectors, cols x k
};

struct QrResult
{
    DenseMatrix Q;  // rows x cols, orthonormal columns
    DenseMatrix R;  // cols x cols, upper triangular with non-negative diagonal
};

struct EigResult
{
    ComplexVector values;
    ComplexMatrix vectors;  // column i pairs with values(i)
};

template < typename Derived >
bool all_finite(const Eigen::DenseBase< Derived >& A)
{
    return A.allFinite();
}

template < typename Derived >
void require_finite(const Eigen::DenseBase< Derived >& A, const std::string& what)
{
    if (!A.allFinite())
        throw InvalidInputError(what + ": non-finite entries");
}

/// number of singular values above rank_cutoff * sigma_1
inline Index numerical_rank(const Vector& sigma, double rel_cutoff = rank_cutoff)
{
    if (sigma.size() == 0 || !(sigma(0) > 0.0))
        return 0;
    const double threshold = rel_cutoff * sigma(0);
    Index r = 0;
    while (r < sigma.size() && sigma(r) >= threshold)
        ++r;
    return r;
}

inline double spectral_norm(const DenseMatrix& A)
{
    if (A.size() == 0)
        return 0.0;
    Eigen::JacobiSVD< DenseMatrix > svd(A);
    return svd.singularValues()(0);
}

/// || Q^T Q - I ||_2
inline double orthonormality_defect(const DenseMatrix& Q)
{
    const DenseMatrix G = Q.transpose() * Q - DenseMatrix::Identity(Q.cols(), Q.cols());
    return spectral_norm(G);
}

inline SvdResult svd_thin(const DenseMatrix& A)
{
    if (A.rows() == 0 || A.cols() == 0)
        throw ShapeError("svd_thin: empty matrix");
    require_finite(A, "svd_thin");

    Eigen::BDCSVD< DenseMatrix > svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw DecompositionError("svd_thin: SVD did not converge");

    return SvdResult{ svd.matrixU(), svd.singularValues(), svd.matrixV() };
}

/// Singular values only; cheaper than svd_thin when vectors are not needed.
inline Vector singular_values(const DenseMatrix& A)
{
    if (A.rows() == 0 || A.cols() == 0)
        throw ShapeError("singular_values: empty matrix");
    require_finite(A, "singular_values");

    Eigen::BDCSVD< DenseMatrix > svd(A);
    if (svd.info() != Eigen::Success)
        throw DecompositionError("singular_values: SVD did not converge");
    return svd.singularValues();
}

inline QrResult qr_thin(const DenseMatrix& A)
{
    if (A.rows() < A.cols())
        throw ShapeError("qr_thin: needs rows >= cols, got " + std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()));
    require_finite(A, "qr_thin");

    const Index m = A.rows();
    const Index k = A.cols();

    Eigen::HouseholderQR< DenseMatrix > qr(A);
    QrResult out;
    out.Q = qr.householderQ() * DenseMatrix::Identity(m, k);
    out.R = qr.matrixQR().topRows(k).triangularView< Eigen::Upper >();

    // fix the sign ambiguity: diag(R) >= 0
    for (Index j = 0; j < k; ++j)
    {
        if (out.R(j, j) < 0.0)
        {
            out.R.row(j) *= -1.0;
            out.Q.col(j) *= -1.0;
        }
    }
    return out;
}

/// Orthonormal basis for the range of A (Q factor only).
inline DenseMatrix orthonormalize(const DenseMatrix& A)
{
    return qr_thin(A).Q;
}

inline EigResult eig_dense(const DenseMatrix& A)
{
    if (A.rows() != A.cols())
        throw ShapeError("eig_dense: matrix is not square");
    require_finite(A, "eig_dense");

    if (A.rows() == 0)
        return {};

    Eigen::EigenSolver< DenseMatrix > es(A, true);
    if (es.info() != Eigen::Success)
        throw DecompositionError("eig_dense: QR iteration did not converge");
    return EigResult{ es.eigenvalues(), es.eigenvectors() };
}

//
// LU factorization with partial pivoting, kept around for repeated solves.
// Construction throws SingularityError when the matrix is numerically singular.
//
class DenseLu
{
public:
    /// reciprocal condition numbers below this are treated as singular
    static constexpr double min_rcond = 1e-14;

    explicit DenseLu(const DenseMatrix& A)
    {
        if (A.rows() != A.cols())
            throw ShapeError("DenseLu: matrix is not square");
        require_finite(A, "DenseLu");

        lu_.compute(A);

        const auto diag = lu_.matrixLU().diagonal();
        for (Index i = 0; i < diag.size(); ++i)
            if (diag(i) == 0.0)
                throw SingularityError("DenseLu: exactly singular matrix (zero pivot at " +
                                           std::to_string(i) + ")",
                                       std::numeric_limits< double >::infinity());

        const double rc = lu_.rcond();
        if (!(rc >= min_rcond))
            throw SingularityError("DenseLu: matrix is numerically singular (condition estimate " +
                                       std::to_string(1.0 / rc) + ")",
                                   rc > 0.0 ? 1.0 / rc : std::numeric_limits< double >::infinity());
    }

    template < typename Rhs >
    auto solve(const Eigen::MatrixBase< Rhs >& b) const
    {
        return lu_.solve(b);
    }

    Index size() const { return lu_.rows(); }

    /// 1-norm condition estimate
    double condition_estimate() const { return 1.0 / lu_.rcond(); }

private:
    Eigen::PartialPivLU< DenseMatrix > lu_;
};

inline DenseMatrix solve_linear(const DenseMatrix& A, const DenseMatrix& B)
{
    if (A.rows() != B.rows())
        throw ShapeError("solve_linear: right-hand side has " + std::to_string(B.rows()) +
                         " rows, matrix has " + std::to_string(A.rows()));
    require_finite(B, "solve_linear");
    return DenseLu(A).solve(B);
}

} // namespace rmor
