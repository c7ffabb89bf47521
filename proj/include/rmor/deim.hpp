#pragma once
//
// Discrete empirical interpolation of a nonlinear term f in R^n from its
// values at k selected rows:
//
//   f_deim = U (S^T U)^{-1} f|_S,   ||f - f_deim||_2 <= c ||(I - U U^T) f||_2,
//   c = ||(S^T U)^{-1}||_2.
//

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"

namespace rmor {

using IndexList = std::vector< Index >;

enum class DeimSelection { greedy, pivoted_qr };

struct DeimOperator
{
    DenseMatrix U;           // n x k nonlinear-term basis
    IndexList   indices;     // k distinct rows
    DenseMatrix interp_map;  // n x k, U (S^T U)^{-1}
    double      error_constant = 0.0;

    Index size() const { return static_cast< Index >(indices.size()); }
};

namespace detail {

inline DenseMatrix sample_rows(const DenseMatrix& U, const IndexList& rows)
{
    DenseMatrix out(static_cast< Index >(rows.size()), U.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast< Index >(i)) = U.row(rows[i]);
    return out;
}

// first index of the largest |v_i|
inline Index argmax_abs(const Vector& v)
{
    Index  arg  = 0;
    double best = -1.0;
    for (Index i = 0; i < v.size(); ++i)
    {
        const double a = std::abs(v(i));
        if (a > best)
        {
            best = a;
            arg  = i;
        }
    }
    return arg;
}

inline void check_basis_shape(const DenseMatrix& U, const char* who)
{
    if (U.cols() < 1 || U.cols() > U.rows())
        throw ShapeError(std::string(who) + ": basis must have 1 <= k <= n columns");
    require_finite(U, who);
}

} // namespace detail

/// Classic greedy DEIM point selection.
inline IndexList deim_points_greedy(const DenseMatrix& U)
{
    detail::check_basis_shape(U, "deim_points_greedy");

    const Index k     = U.cols();
    const double scale = U.cwiseAbs().maxCoeff();

    IndexList indices;
    indices.reserve(static_cast< std::size_t >(k));

    for (Index j = 0; j < k; ++j)
    {
        Vector residual = U.col(j);
        if (j > 0)
        {
            const DenseMatrix Uprev = U.leftCols(j);
            const DenseMatrix P     = detail::sample_rows(Uprev, indices);
            Vector            rhs(j);
            for (Index i = 0; i < j; ++i)
                rhs(i) = U(indices[static_cast< std::size_t >(i)], j);
            Vector c;
            try
            {
                c = DenseLu(P).solve(rhs);
            }
            catch (const SingularityError& e)
            {
                throw SingularityError("deim_points_greedy: interpolation matrix singular at step " +
                                           std::to_string(j),
                                       e.condition);
            }
            residual -= Uprev * c;
        }

        const Index arg = detail::argmax_abs(residual);
        if (!(std::abs(residual(arg)) > 1e-12 * scale))
            throw SingularityError("deim_points_greedy: basis is rank deficient at step " +
                                       std::to_string(j),
                                   std::numeric_limits< double >::infinity());
        indices.push_back(arg);
    }
    return indices;
}

/// Rows given by the first k column pivots of a pivoted QR of U^T.
inline IndexList deim_points_qr(const DenseMatrix& U)
{
    detail::check_basis_shape(U, "deim_points_qr");

    const Index k = U.cols();
    Eigen::ColPivHouseholderQR< DenseMatrix > qr(U.transpose());
    if (qr.rank() < k)
        throw SingularityError("deim_points_qr: basis is rank deficient at step " +
                                   std::to_string(qr.rank()),
                               std::numeric_limits< double >::infinity());

    const auto& perm = qr.colsPermutation().indices();
    IndexList   indices;
    indices.reserve(static_cast< std::size_t >(k));
    for (Index j = 0; j < k; ++j)
        indices.push_back(perm(j));
    return indices;
}

inline IndexList deim_points(const DenseMatrix& U, DeimSelection how)
{
    return how == DeimSelection::greedy ? deim_points_greedy(U) : deim_points_qr(U);
}

inline DeimOperator build_deim(const DenseMatrix& U, const IndexList& indices)
{
    detail::check_basis_shape(U, "build_deim");
    if (static_cast< Index >(indices.size()) != U.cols())
        throw ShapeError("build_deim: need exactly one index per basis column");

    std::vector< bool > seen(static_cast< std::size_t >(U.rows()), false);
    for (Index i : indices)
    {
        if (i < 0 || i >= U.rows())
            throw ShapeError("build_deim: index " + std::to_string(i) + " out of range");
        if (seen[static_cast< std::size_t >(i)])
            throw InvalidInputError("build_deim: duplicate index " + std::to_string(i));
        seen[static_cast< std::size_t >(i)] = true;
    }

    const DenseMatrix StU = detail::sample_rows(U, indices);
    const DenseLu     lu(StU);  // throws SingularityError with condition estimate

    DeimOperator op;
    op.U       = U;
    op.indices = indices;
    op.interp_map = U * lu.solve(DenseMatrix::Identity(StU.rows(), StU.cols()));

    const Vector sv = singular_values(StU);
    op.error_constant = 1.0 / sv(sv.size() - 1);
    return op;
}

inline DeimOperator build_deim(const DenseMatrix& U, DeimSelection how = DeimSelection::greedy)
{
    return build_deim(U, deim_points(U, how));
}

/// Rows of f at the interpolation indices.
inline Vector sample(const DeimOperator& op, const Vector& f)
{
    Vector out(op.size());
    for (Index i = 0; i < op.size(); ++i)
        out(i) = f(op.indices[static_cast< std::size_t >(i)]);
    return out;
}

inline Vector apply_deim(const DeimOperator& op, const Vector& f_at_points)
{
    if (f_at_points.size() != op.size())
        throw ShapeError("apply_deim: expected " + std::to_string(op.size()) + " samples, got " +
                         std::to_string(f_at_points.size()));
    return op.interp_map * f_at_points;
}

} // namespace rmor
