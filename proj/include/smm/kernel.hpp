#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "smm/estimator.hpp"
#include "smm/numeric.hpp"
#include "smm/signal_matrix.hpp"

namespace smm {

/// Exponential-decay ("tuned/correlated") kernel hyperparameters for an
/// FIR prior of length n.
struct KernelSpec {
    double alpha = 1.0;  // scale, > 0
    double beta = 0.9;   // decay, in (0, 1)
    Eigen::Index n = 1;
};

enum class FirMethod { LS, LSTC, SMM, SMMTC };

inline const char* to_string(FirMethod m) {
    switch (m) {
        case FirMethod::LS: return "ls";
        case FirMethod::LSTC: return "ls-tc";
        case FirMethod::SMM: return "smm";
        case FirMethod::SMMTC: return "smm-tc";
    }
    return "?";
}

/// Impulse-response estimate with its covariance and the method that
/// produced it.
struct FirEstimate {
    Eigen::VectorXd h;
    Eigen::MatrixXd cov;
    FirMethod method = FirMethod::LS;
};

/// Least-squares FIR fit of order n from scalar input/output data.
/// With past_u (the n-1 inputs before time 0) every sample contributes a
/// regression row; without it the first n-1 rows are dropped because their
/// regressors reach into unknown territory.
inline FirEstimate ls_fir(const Eigen::VectorXd& u, const Eigen::VectorXd& y, Eigen::Index n,
                          double sigma2,
                          const std::optional<Eigen::VectorXd>& past_u = std::nullopt) {
    const Eigen::Index N = u.size();
    if (y.size() != N) throw std::invalid_argument("ls_fir: u and y lengths differ");
    if (n < 1) throw std::invalid_argument("ls_fir: need n >= 1");
    if (sigma2 < 0.0) throw std::invalid_argument("ls_fir: negative noise variance");
    if (past_u && past_u->size() != n - 1)
        throw std::invalid_argument("ls_fir: past_u must have length n-1");

    const Eigen::Index t0 = past_u ? 0 : n - 1;
    const Eigen::Index rows = N - t0;
    if (rows < n) throw std::invalid_argument("ls_fir: not enough samples for the regressor");

    auto input_at = [&](Eigen::Index t) -> double {
        if (t >= 0) return u(t);
        return (*past_u)(n - 1 + t);  // t in [-(n-1), -1]
    };
    Eigen::MatrixXd Phi(rows, n);
    for (Eigen::Index row = 0; row < rows; ++row)
        for (Eigen::Index i = 0; i < n; ++i) Phi(row, i) = input_at(t0 + row - i);

    if (numerical_rank(Phi) < n) throw std::runtime_error("ls_fir: rank-deficient regressor");
    const Eigen::MatrixXd gram = Phi.transpose() * Phi;
    const SpdSolver solver(gram, "ls_fir normal equations");
    const Eigen::MatrixXd gram_inv = solver.solve(Eigen::MatrixXd::Identity(n, n));

    FirEstimate est;
    est.h = gram_inv * (Phi.transpose() * y.segment(t0, rows));
    est.cov = sigma2 * gram_inv;
    est.method = FirMethod::LS;
    return est;
}

/// Kernel matrix with entries alpha * min(beta^i, beta^j), exponents
/// 1-based: entry (0,0) is alpha*beta.
inline Eigen::MatrixXd tc_kernel(const KernelSpec& spec) {
    if (!(spec.alpha > 0.0)) throw std::invalid_argument("tc_kernel: alpha must be positive");
    if (!(spec.beta > 0.0 && spec.beta < 1.0))
        throw std::invalid_argument("tc_kernel: beta must lie in (0, 1)");
    if (spec.n < 1) throw std::invalid_argument("tc_kernel: need n >= 1");
    Eigen::MatrixXd K(spec.n, spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i)
        for (Eigen::Index j = 0; j < spec.n; ++j)
            K(i, j) = spec.alpha * std::pow(spec.beta, static_cast<double>(std::max(i, j) + 1));
    return K;
}

/// Bayesian update of a data-based estimate with a kernel prior N(0, K):
/// posterior mean K (K + cov)^-1 h and covariance K - K (K + cov)^-1 K.
/// The gain form avoids inverting K, which is near-singular for small beta.
inline FirEstimate kernel_combine(const FirEstimate& est, const Eigen::MatrixXd& kernel) {
    const Eigen::Index n = est.h.size();
    if (kernel.rows() != n || kernel.cols() != n)
        throw std::invalid_argument("kernel_combine: kernel size must match the estimate");
    if (est.cov.rows() != n || est.cov.cols() != n)
        throw std::invalid_argument("kernel_combine: estimate covariance has wrong size");

    Eigen::LLT<Eigen::MatrixXd> llt(kernel + est.cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("kernel_combine: singular combined covariance");

    FirEstimate out;
    out.h = kernel * llt.solve(est.h);
    Eigen::MatrixXd post = kernel - kernel * llt.solve(kernel);
    out.cov = 0.5 * (post + post.transpose());
    switch (est.method) {
        case FirMethod::LS: out.method = FirMethod::LSTC; break;
        case FirMethod::SMM: out.method = FirMethod::SMMTC; break;
        default: throw std::invalid_argument("kernel_combine: estimate is already kernel-combined");
    }
    return out;
}

/// One evaluated hyperparameter grid point. Points whose candidate
/// covariance is not positive definite are kept in the surface but marked
/// unusable.
struct EbGridPoint {
    double alpha = 0.0;
    double beta = 0.0;
    double objective = std::numeric_limits<double>::quiet_NaN();
    bool usable = false;
};

struct EmpiricalBayesResult {
    KernelSpec spec;
    std::vector<EbGridPoint> surface;  // alpha-major grid order
};

/// Default hyperparameter grids: 20 log-spaced scales in [1e-2, 1e2] and
/// 20 linearly spaced decays in [0.5, 0.99].
inline std::vector<double> default_alpha_grid() {
    std::vector<double> g(20);
    for (int k = 0; k < 20; ++k) g[k] = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
    return g;
}

inline std::vector<double> default_beta_grid() {
    std::vector<double> g(20);
    for (int k = 0; k < 20; ++k) g[k] = 0.5 + (0.99 - 0.5) * k / 19.0;
    return g;
}

/// Marginal-likelihood grid search: minimize
///   logdet(K(a, b) + data_cov) + hhat' (K(a, b) + data_cov)^-1 hhat
/// over the hyperparameter grid. Ties break toward the smaller (alpha,
/// beta). Errors only when every grid point is numerically singular.
inline EmpiricalBayesResult empirical_bayes(const Eigen::VectorXd& hhat,
                                            const Eigen::MatrixXd& data_cov,
                                            const std::vector<double>& alpha_grid,
                                            const std::vector<double>& beta_grid) {
    const Eigen::Index n = hhat.size();
    if (n < 1) throw std::invalid_argument("empirical_bayes: empty estimate");
    if (data_cov.rows() != n || data_cov.cols() != n)
        throw std::invalid_argument("empirical_bayes: data covariance has wrong size");
    if (alpha_grid.empty() || beta_grid.empty())
        throw std::invalid_argument("empirical_bayes: empty hyperparameter grid");

    EmpiricalBayesResult result;
    result.surface.reserve(alpha_grid.size() * beta_grid.size());
    bool have_best = false;
    double best_obj = 0.0;

    for (double alpha : alpha_grid) {
        for (double beta : beta_grid) {
            EbGridPoint point;
            point.alpha = alpha;
            point.beta = beta;
            const Eigen::MatrixXd S = tc_kernel({alpha, beta, n}) + data_cov;
            Eigen::LLT<Eigen::MatrixXd> llt(S);
            if (llt.info() == Eigen::Success) {
                const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
                point.objective = log_det + hhat.dot(llt.solve(hhat));
                point.usable = true;
                const bool better =
                    !have_best || point.objective < best_obj ||
                    (point.objective == best_obj &&
                     (alpha < result.spec.alpha ||
                      (alpha == result.spec.alpha && beta < result.spec.beta)));
                if (better) {
                    have_best = true;
                    best_obj = point.objective;
                    result.spec = {alpha, beta, n};
                }
            }
            result.surface.push_back(point);
        }
    }
    if (!have_best) throw std::runtime_error("empirical_bayes: all grid points singular");
    return result;
}

/// Impulse-response estimate from a signal matrix set via the
/// maximum-likelihood simulator conditioned on rest (zero past, unit
/// impulse input, no online noise). The set's future depth is the FIR
/// length; the covariance is the future block of the output covariance.
struct SmmFirResult {
    FirEstimate estimate;
    SmmResult detail;
};

inline SmmFirResult smm_fir_full(const SignalMatrixSet& set, Eigen::Index n, double sigma2) {
    validate_set(set);
    if (set.Lp != n)
        throw std::invalid_argument("smm_fir: set future depth Lp must equal the FIR length n");
    SmmProblem problem;
    problem.set = set;
    problem.u_ini = Eigen::VectorXd::Zero(set.L0 * set.n_u);
    problem.y_ini = Eigen::VectorXd::Zero(set.L0 * set.n_y);
    problem.u = Eigen::VectorXd::Zero(n);
    problem.u(0) = 1.0;
    problem.noise = NoiseModel{sigma2, 0.0};

    SmmFirResult out;
    out.detail = smm_simulate(problem);
    out.estimate.h = out.detail.y;
    out.estimate.cov = out.detail.cov.sigma_y.bottomRightCorner(n, n);
    out.estimate.method = FirMethod::SMM;
    return out;
}

inline FirEstimate smm_fir(const SignalMatrixSet& set, Eigen::Index n, double sigma2) {
    return smm_fir_full(set, n, sigma2).estimate;
}

/// Kernel-regularized estimate: data-based estimate, empirical-Bayes
/// hyperparameter selection, Bayesian combination.
struct KernelFirResult {
    FirEstimate estimate;
    KernelSpec spec;
    std::vector<EbGridPoint> surface;
};

inline KernelFirResult kernel_regularize(const FirEstimate& base,
                                         const std::vector<double>& alpha_grid,
                                         const std::vector<double>& beta_grid) {
    const EmpiricalBayesResult eb = empirical_bayes(base.h, base.cov, alpha_grid, beta_grid);
    KernelFirResult out;
    out.spec = eb.spec;
    out.surface = eb.surface;
    out.estimate = kernel_combine(base, tc_kernel(eb.spec));
    return out;
}

inline FirEstimate smm_tc_fir(const SignalMatrixSet& set, Eigen::Index n, double sigma2,
                              const std::vector<double>& alpha_grid = default_alpha_grid(),
                              const std::vector<double>& beta_grid = default_beta_grid()) {
    return kernel_regularize(smm_fir(set, n, sigma2), alpha_grid, beta_grid).estimate;
}

inline FirEstimate ls_tc_fir(const Eigen::VectorXd& u, const Eigen::VectorXd& y, Eigen::Index n,
                             double sigma2,
                             const std::optional<Eigen::VectorXd>& past_u = std::nullopt,
                             const std::vector<double>& alpha_grid = default_alpha_grid(),
                             const std::vector<double>& beta_grid = default_beta_grid()) {
    return kernel_regularize(ls_fir(u, y, n, sigma2, past_u), alpha_grid, beta_grid).estimate;
}

/// Normalized fit score: 100 for a perfect estimate, 0 for the constant
/// mean of the truth, negative when worse than that.
inline double fit_metric(const Eigen::VectorXd& h_true, const Eigen::VectorXd& h_est) {
    if (h_true.size() != h_est.size()) throw std::invalid_argument("fit_metric: length mismatch");
    if (h_true.size() < 1) throw std::invalid_argument("fit_metric: empty vectors");
    const double mean = h_true.mean();
    const double denom = (h_true.array() - mean).matrix().squaredNorm();
    if (denom == 0.0) throw std::invalid_argument("fit_metric: constant true impulse response");
    const double num = (h_true - h_est).squaredNorm();
    return 100.0 * (1.0 - std::sqrt(num / denom));
}

}  // namespace smm
