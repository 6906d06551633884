#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include <json.hpp>

#include "smm/lti.hpp"
#include "smm/numeric.hpp"
#include "smm/signal_matrix.hpp"

namespace smm {

/// How a trajectory-combination vector g was produced.
enum class Provenance { Pinv, SmmConverged, SmmOneStep, SmmMaxIters };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Pinv: return "pinv";
        case Provenance::SmmConverged: return "smm-converged";
        case Provenance::SmmOneStep: return "smm-one-step";
        case Provenance::SmmMaxIters: return "smm-max-iters";
    }
    return "?";
}

/// Trajectory-combination vector with solve metadata. lambda is the ridge
/// weight at the accepted iterate (0 for the plain pseudoinverse).
struct ParameterVector {
    Eigen::VectorXd g;
    Provenance provenance = Provenance::Pinv;
    int iters = 0;
    double lambda = 0.0;
};

/// Covariance of the predicted output window. When diag_only is set the
/// matrix carries only the diagonal law (off-diagonal entries are zero by
/// construction, either exactly — disjoint-window data — or as the diagonal
/// approximation used for compressed sets).
struct OutputCovariance {
    Eigen::MatrixXd sigma_y;
    bool diag_only = false;
};

/// One data-driven simulation query: conditioning data, planned input,
/// noise levels, and SQP convergence controls.
struct SmmProblem {
    SignalMatrixSet set;
    Eigen::VectorXd u_ini;  // L0*n_u
    Eigen::VectorXd y_ini;  // L0*n_y
    Eigen::VectorXd u;      // Lp*n_u
    NoiseModel noise;
    double eps = 1e-6;
    int max_iters = 50;
};

struct SmmResult {
    ParameterVector params;
    Eigen::VectorXd y;  // predicted future output window, length Lp*n_y
    OutputCovariance cov;
    bool converged = false;
    std::vector<double> g_norm_history;  // ||g|| at start and after each step
};

/// Next SQP iterate together with the affine predictor operators:
/// g_next = P*y_ini + Q*col(u_ini, u).
struct SqpStep {
    Eigen::VectorXd g_next;
    Eigen::MatrixXd P;  // M x (L0*n_y)
    Eigen::MatrixXd Q;  // M x (L*n_u)
};

inline void validate_conditioning(const SignalMatrixSet& set, const Eigen::VectorXd& u_ini,
                                  const Eigen::VectorXd& y_ini, const Eigen::VectorXd& u) {
    validate_set(set);
    if (u_ini.size() != set.L0 * set.n_u)
        throw std::invalid_argument("conditioning data: u_ini length must be L0*n_u");
    if (y_ini.size() != set.L0 * set.n_y)
        throw std::invalid_argument("conditioning data: y_ini length must be L0*n_y");
    if (u.size() != set.Lp * set.n_u)
        throw std::invalid_argument("conditioning data: u length must be Lp*n_u");
}

/// Minimum-norm least-squares solution of
///   col(Up, Yp, Uf) * g  ≈  col(u_ini, y_ini, u),
/// the subspace-predictor parameter vector. Always defined.
inline ParameterVector pinv_solution(const SignalMatrixSet& set, const Eigen::VectorXd& u_ini,
                                     const Eigen::VectorXd& y_ini, const Eigen::VectorXd& u) {
    validate_conditioning(set, u_ini, y_ini, u);
    const Eigen::MatrixXd A = set.constraint_stack();
    Eigen::VectorXd b(A.rows());
    b << u_ini, y_ini, u;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankTolerance);
    ParameterVector pv;
    pv.g = svd.solve(b);
    pv.provenance = Provenance::Pinv;
    pv.iters = 0;
    pv.lambda = 0.0;
    return pv;
}

/// Covariance of the predicted length-(L0+Lp) output window induced by
/// i.i.d. data noise mixed by g, plus online measurement noise on the past
/// block. For overlapping-window (Hankel) data the noise shared between
/// columns makes the matrix banded Toeplitz with entries
///   sigma2 * sum_k g_k g_{k+|i-j|};
/// disjoint-window (Page) and compressed data carry the diagonal law
///   sigma2 * ||g||^2
/// (exact for Page data, diagonal approximation for compressed sets).
/// Single-channel only.
inline OutputCovariance sigma_y(const Eigen::VectorXd& g, const NoiseModel& noise, Eigen::Index L0,
                                Eigen::Index Lp, MatrixKind kind = MatrixKind::Hankel) {
    if (L0 < 1 || Lp < 1) throw std::invalid_argument("sigma_y: need L0 >= 1 and Lp >= 1");
    if (g.size() < 1) throw std::invalid_argument("sigma_y: empty parameter vector");
    if (noise.sigma2 < 0.0 || noise.sigma_p2 < 0.0)
        throw std::invalid_argument("sigma_y: negative noise variance");

    const Eigen::Index L = L0 + Lp;
    const Eigen::Index M = g.size();
    OutputCovariance cov;
    cov.sigma_y = Eigen::MatrixXd::Zero(L, L);
    if (kind == MatrixKind::Hankel) {
        cov.diag_only = false;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(L);  // autocorrelation of g, lag 0..L-1
        const Eigen::Index dmax = std::min(L - 1, M - 1);
        for (Eigen::Index d = 0; d <= dmax; ++d) r(d) = g.head(M - d).dot(g.tail(M - d));
        for (Eigen::Index i = 0; i < L; ++i)
            for (Eigen::Index j = 0; j < L; ++j) cov.sigma_y(i, j) = noise.sigma2 * r(std::abs(i - j));
    } else {
        cov.diag_only = true;
        cov.sigma_y.diagonal().setConstant(noise.sigma2 * g.squaredNorm());
    }
    for (Eigen::Index i = 0; i < L0; ++i) cov.sigma_y(i, i) += noise.sigma_p2;
    return cov;
}

/// Adaptive ridge weight of the iterative estimator:
///   lambda(g) = Lp * sigma_p2 / ||g||^2 + (L0+Lp) * sigma2.
/// Degenerate g = 0 with online noise present has no finite weight.
inline double lambda_weight(const Eigen::VectorXd& g, const NoiseModel& noise, Eigen::Index L0,
                            Eigen::Index Lp) {
    if (L0 < 1 || Lp < 1) throw std::invalid_argument("lambda_weight: need L0 >= 1 and Lp >= 1");
    if (noise.sigma2 < 0.0 || noise.sigma_p2 < 0.0)
        throw std::invalid_argument("lambda_weight: negative noise variance");
    double value = static_cast<double>(L0 + Lp) * noise.sigma2;
    if (noise.sigma_p2 > 0.0) {
        const double norm2 = g.squaredNorm();
        if (norm2 == 0.0)
            throw std::runtime_error("lambda_weight: zero parameter vector with online noise (degenerate)");
        value += static_cast<double>(Lp) * noise.sigma_p2 / norm2;
    }
    return value;
}

/// Affine operators (P, Q) of the ridge-regularized, equality-constrained
/// least-squares step
///   minimize  lambda*||g||^2 + ||Yp g - y_ini||^2   s.t.  U g = col(u_ini, u),
/// whose unique solution is g = P y_ini + Q col(u_ini, u):
///   F = lambda*I + Yp'Yp,
///   P = (F^-1 - F^-1 U' (U F^-1 U')^-1 U F^-1) Yp',
///   Q = F^-1 U' (U F^-1 U')^-1.
/// Both inner systems are solved by Cholesky factorizations. YtY must be
/// Yp'Yp (passed in so callers solving many steps can reuse it).
struct PredictorOperators {
    Eigen::MatrixXd P;  // M x (L0*n_y)
    Eigen::MatrixXd Q;  // M x (L*n_u)
};

inline PredictorOperators predictor_operators(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Yp,
                                              const Eigen::MatrixXd& YtY, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("predictor operators: ridge weight must be positive "
                                    "(noise-free problems use the pseudoinverse path)");
    const Eigen::Index M = U.cols();
    if (Yp.cols() != M || YtY.rows() != M || YtY.cols() != M)
        throw std::invalid_argument("predictor operators: inconsistent column counts");

    Eigen::MatrixXd F = YtY;
    F.diagonal().array() += lambda;
    const SpdSolver f_solver(F, "regularized step");

    const Eigen::MatrixXd Z = f_solver.solve(U.transpose());  // F^-1 U'
    const Eigen::MatrixXd G = U * Z;                          // U F^-1 U'
    Eigen::LLT<Eigen::MatrixXd> g_llt(G);
    if (g_llt.info() != Eigen::Success) {
        const Eigen::Index r = numerical_rank(U);
        throw std::runtime_error("regularized step: input data matrix has numerical rank " +
                                 std::to_string(r) + " but full row rank " + std::to_string(U.rows()) +
                                 " is required (input not exciting enough)");
    }

    const Eigen::MatrixXd X = f_solver.solve(Yp.transpose());  // F^-1 Yp'
    PredictorOperators ops;
    ops.P = X - Z * g_llt.solve(U * X);
    ops.Q = g_llt.solve(Z.transpose()).transpose();
    return ops;
}

/// One step of the iterative maximum-likelihood estimator: freeze the ridge
/// weight at lambda(g_prev) and solve the resulting equality-constrained
/// least-squares problem in closed form. Single-channel only.
inline SqpStep sqp_step(const Eigen::VectorXd& g_prev, const SignalMatrixSet& set,
                        const Eigen::VectorXd& y_ini, const Eigen::VectorXd& u_ini,
                        const Eigen::VectorXd& u, const NoiseModel& noise) {
    validate_conditioning(set, u_ini, y_ini, u);
    if (set.n_u != 1 || set.n_y != 1)
        throw std::invalid_argument("sqp_step: single-input single-output data required");
    if (g_prev.size() != set.M()) throw std::invalid_argument("sqp_step: g_prev length must be M");

    const double lambda = lambda_weight(g_prev, noise, set.L0, set.Lp);
    const Eigen::MatrixXd U = set.input_stack();
    const PredictorOperators ops = predictor_operators(U, set.Yp, set.Yp.transpose() * set.Yp, lambda);

    Eigen::VectorXd u_tilde(U.rows());
    u_tilde << u_ini, u;
    SqpStep step;
    step.g_next = ops.P * y_ini + ops.Q * u_tilde;
    step.P = ops.P;
    step.Q = ops.Q;
    return step;
}

/// Negative log-likelihood (up to constants) of the conditioning outputs
/// under the diagonal covariance law, with the equality constraints on g
/// understood to hold:
///   Lp*log(||g||^2) + L0*log(sigma2*||g||^2 + sigma_p2)
///     + ||Yp g - y_ini||^2 / (sigma2*||g||^2 + sigma_p2).
inline double mle_objective(const Eigen::VectorXd& g, const SignalMatrixSet& set,
                            const Eigen::VectorXd& y_ini, const NoiseModel& noise) {
    validate_set(set);
    if (set.n_u != 1 || set.n_y != 1)
        throw std::invalid_argument("mle_objective: single-input single-output data required");
    if (g.size() != set.M()) throw std::invalid_argument("mle_objective: g length must be M");
    if (y_ini.size() != set.L0) throw std::invalid_argument("mle_objective: y_ini length must be L0");
    const double norm2 = g.squaredNorm();
    if (norm2 <= 0.0) throw std::invalid_argument("mle_objective: zero parameter vector");
    const double denom = noise.sigma2 * norm2 + noise.sigma_p2;
    if (denom <= 0.0)
        throw std::invalid_argument("mle_objective: both noise variances are zero (objective undefined)");
    const double residual = (set.Yp * g - y_ini).squaredNorm();
    return static_cast<double>(set.Lp) * std::log(norm2) +
           static_cast<double>(set.L0) * std::log(denom) + residual / denom;
}

/// Maximum-likelihood data-driven simulation. Starts from the pseudoinverse
/// solution and iterates sqp_step until the relative change of g drops
/// below eps or max_iters is hit (then the result is returned flagged, not
/// thrown). Special cases:
///  - sigma2 = sigma_p2 = 0: the pseudoinverse solution interpolates the
///    data exactly and is already the estimate; returned with 0 iterations.
///  - sigma_p2 = 0: the ridge weight does not depend on g, so the first
///    step lands on the fixed point; exactly one iteration runs.
inline SmmResult smm_simulate(const SmmProblem& problem) {
    validate_conditioning(problem.set, problem.u_ini, problem.y_ini, problem.u);
    if (problem.set.n_u != 1 || problem.set.n_y != 1)
        throw std::invalid_argument("smm_simulate: single-input single-output data required");
    if (!(problem.eps > 0.0)) throw std::invalid_argument("smm_simulate: eps must be positive");
    if (problem.max_iters < 1) throw std::invalid_argument("smm_simulate: max_iters must be >= 1");
    if (problem.noise.sigma2 < 0.0 || problem.noise.sigma_p2 < 0.0)
        throw std::invalid_argument("smm_simulate: negative noise variance");

    const SignalMatrixSet& set = problem.set;
    SmmResult res;
    ParameterVector pv = pinv_solution(set, problem.u_ini, problem.y_ini, problem.u);
    res.g_norm_history.push_back(pv.g.norm());

    if (problem.noise.sigma2 == 0.0 && problem.noise.sigma_p2 == 0.0) {
        res.params = pv;
        res.converged = true;
    } else {
        if (problem.noise.sigma_p2 > 0.0 && pv.g.norm() == 0.0)
            throw std::runtime_error("smm_simulate: zero pseudoinverse solution (degenerate conditioning data)");
        Eigen::VectorXd g_prev = pv.g;
        int iters = 0;
        bool converged = false;
        while (iters < problem.max_iters) {
            const SqpStep step =
                sqp_step(g_prev, set, problem.y_ini, problem.u_ini, problem.u, problem.noise);
            ++iters;
            if (!step.g_next.allFinite())
                throw std::runtime_error("smm_simulate: non-finite iterate (ill-conditioned data)");
            res.g_norm_history.push_back(step.g_next.norm());
            if (problem.noise.sigma_p2 == 0.0) {
                // Constant ridge weight: the step is already the fixed point.
                g_prev = step.g_next;
                converged = true;
                break;
            }
            if (step.g_next.norm() == 0.0)
                throw std::runtime_error("smm_simulate: iterate collapsed to zero (degenerate data)");
            const bool small_change = (step.g_next - g_prev).norm() < problem.eps * g_prev.norm();
            g_prev = step.g_next;
            if (small_change) {
                converged = true;
                break;
            }
        }
        res.params.g = g_prev;
        res.params.provenance = converged ? Provenance::SmmConverged : Provenance::SmmMaxIters;
        res.params.iters = iters;
        res.params.lambda = lambda_weight(g_prev, problem.noise, set.L0, set.Lp);
        res.converged = converged;
    }

    res.y = set.Yf * res.params.g;
    res.cov = sigma_y(res.params.g, problem.noise, set.L0, set.Lp, set.kind);
    return res;
}

/// Flat JSON record of a simulation result: {g, y, sigma_y_diag, iters,
/// lambda, status}.
inline nlohmann::json to_json_record(const SmmResult& res) {
    nlohmann::json j;
    j["g"] = std::vector<double>(res.params.g.begin(), res.params.g.end());
    j["y"] = std::vector<double>(res.y.begin(), res.y.end());
    const Eigen::VectorXd d = res.cov.sigma_y.diagonal();
    j["sigma_y_diag"] = std::vector<double>(d.begin(), d.end());
    j["iters"] = res.params.iters;
    j["lambda"] = res.params.lambda;
    j["status"] = res.converged ? "converged" : "max-iterations";
    return j;
}

}  // namespace smm
