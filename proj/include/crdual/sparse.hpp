#pragma once

#include <crdual/types.hpp>

#include <Eigen/CholmodSupport>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace crdual {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;
using Vector = Eigen::VectorXd;

inline constexpr double kSolverTolerance = 1e-10;

enum class Factorization { Cholesky, LU };

inline const char* to_string(Factorization kind)
{
    return kind == Factorization::Cholesky ? "cholmod-llt" : "umfpack-lu";
}

struct LinearSolveReport {
    double residual_norm = 0.0;
    Factorization factorization_kind = Factorization::LU;
    int refinement_steps = 0;
};

struct SolveResult {
    Vector x;
    LinearSolveReport report;
};

/// Factorizes once and solves many right-hand sides with a residual check and
/// a few steps of iterative refinement.
class SparseSolver {
public:
    SparseSolver(const SparseMatrix& matrix, Factorization kind, double tolerance = kSolverTolerance)
        : matrix_(matrix), kind_(kind), tolerance_(tolerance)
    {
        if (matrix_.rows() != matrix_.cols()) {
            throw SolverError("solve_sparse: matrix is not square");
        }
        matrix_.makeCompressed();
        if (matrix_.rows() == 0) {
            return;
        }
        if (kind_ == Factorization::Cholesky) {
            llt_ = std::make_unique<Eigen::CholmodSupernodalLLT<SparseMatrix>>();
            llt_->compute(matrix_);
            if (llt_->info() != Eigen::Success) {
                throw SolverError("solve_sparse: Cholesky factorization failed (matrix singular or indefinite)");
            }
        }
        else {
            lu_ = std::make_unique<Eigen::UmfPackLU<SparseMatrix>>();
            lu_->compute(matrix_);
            if (lu_->info() != Eigen::Success) {
                throw SolverError("solve_sparse: LU factorization failed (matrix singular)");
            }
        }
    }

    SolveResult solve(const Vector& rhs) const
    {
        if (rhs.size() != matrix_.rows()) {
            throw SolverError("solve_sparse: right-hand side has the wrong length");
        }
        SolveResult out;
        out.report.factorization_kind = kind_;
        if (matrix_.rows() == 0) {
            out.x = Vector();
            return out;
        }
        const double scale = rhs.norm();
        if (scale == 0.0) {
            out.x = Vector::Zero(rhs.size());
            return out;
        }
        out.x = apply(rhs);
        Vector r = rhs - matrix_ * out.x;
        double rel = r.norm() / scale;
        for (int step = 0; step < 3 && rel > 1e-3 * tolerance_; ++step) {
            out.x += apply(r);
            r = rhs - matrix_ * out.x;
            const double next = r.norm() / scale;
            ++out.report.refinement_steps;
            if (!(next < rel)) {
                rel = std::min(rel, next);
                break;
            }
            rel = next;
        }
        out.report.residual_norm = rel;
        if (!std::isfinite(rel) || rel > tolerance_) {
            throw SolverError("solve_sparse: relative residual " + std::to_string(rel) +
                              " exceeds tolerance");
        }
        return out;
    }

    const SparseMatrix& matrix() const { return matrix_; }

private:
    Vector apply(const Vector& b) const
    {
        Vector x = kind_ == Factorization::Cholesky ? Vector(llt_->solve(b)) : Vector(lu_->solve(b));
        if (!x.allFinite()) {
            throw SolverError("solve_sparse: non-finite solution (matrix singular)");
        }
        return x;
    }

    SparseMatrix matrix_;
    Factorization kind_;
    double tolerance_;
    std::unique_ptr<Eigen::CholmodSupernodalLLT<SparseMatrix>> llt_;
    std::unique_ptr<Eigen::UmfPackLU<SparseMatrix>> lu_;
};

/// One-shot solve.
inline SolveResult solve_sparse(const SparseMatrix& matrix, const Vector& rhs,
                                Factorization kind = Factorization::LU)
{
    return SparseSolver(matrix, kind).solve(rhs);
}

/// Coordinate text dump ("row col value", zero-based) for debugging.
template <class Stream>
void write_matrix_coordinates(Stream& out, const SparseMatrix& m)
{
    out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
}

} // namespace crdual
