#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

namespace smm {

/// Relative singular-value cutoff used by every rank decision in the library.
inline constexpr double kRankTolerance = 1e-10;

/// Numerical rank: number of singular values above rel_tol * sigma_max.
/// An all-zero (or empty) matrix has rank 0.
inline Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double rel_tol = kRankTolerance) {
    if (a.size() == 0) return 0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    const double cutoff = rel_tol * s(0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cutoff) ++r;
    return r;
}

/// Cholesky factor of a symmetric positive definite matrix, falling back to
/// a robust LDLT when plain LLT reports a numerical issue. Throws
/// std::runtime_error mentioning `what` if the matrix is not usable.
class SpdSolver {
  public:
    SpdSolver(const Eigen::MatrixXd& a, const std::string& what) {
        llt_.compute(a);
        if (llt_.info() == Eigen::Success) {
            use_llt_ = true;
            return;
        }
        ldlt_.compute(a);
        if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive())
            throw std::runtime_error(what + ": matrix is not positive definite");
        use_llt_ = false;
    }

    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
        return use_llt_ ? Eigen::MatrixXd(llt_.solve(b)) : Eigen::MatrixXd(ldlt_.solve(b));
    }

    /// log(det A); valid because the factorization verified positivity.
    double log_det() const {
        if (use_llt_)
            return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
        return ldlt_.vectorD().array().log().sum();
    }

  private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    bool use_llt_ = false;
};

}  // namespace smm
