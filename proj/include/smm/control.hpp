#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "smm/estimator.hpp"
#include "smm/lti.hpp"
#include "smm/numeric.hpp"
#include "smm/signal_matrix.hpp"

namespace smm {

enum class ControllerKind { SubPC, DeePC, SmmPC, IdealMPC };

inline const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::SubPC: return "subpc";
        case ControllerKind::DeePC: return "deepc";
        case ControllerKind::SmmPC: return "smmpc";
        case ControllerKind::IdealMPC: return "mpc";
    }
    return "?";
}

/// Receding-horizon controller settings. q and r are stage-weight
/// diagonals over the output/input horizon; size-1 vectors broadcast to
/// the whole horizon. Box bounds are reserved interface only: every solver
/// here is closed-form and rejects them.
struct ControllerConfig {
    ControllerKind kind = ControllerKind::SubPC;
    Eigen::Index L0 = 1;
    Eigen::Index Lp = 1;
    Eigen::VectorXd q = Eigen::VectorXd::Ones(1);
    Eigen::VectorXd r = Eigen::VectorXd::Ones(1);
    double lambda_g = 100.0;   // DeePC parameter-norm weight
    double lambda_y = 1000.0;  // DeePC past-output slack weight
    NoiseModel noise;          // SmmPC noise levels
    double eps = 1e-6;
    std::optional<double> u_min, u_max;  // not implemented; rejected when set
};

inline Eigen::VectorXd broadcast_weights(const Eigen::VectorXd& w, Eigen::Index len,
                                         const char* what) {
    if (w.size() == len) return w;
    if (w.size() == 1) return Eigen::VectorXd::Constant(len, w(0));
    throw std::invalid_argument(std::string(what) + ": weight vector must have size 1 or " +
                                std::to_string(len));
}

/// Horizon tracking cost sum_k q_k (y_k - r_k)^2 + r_k u_k^2.
inline double control_cost(const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& r, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& r_weight) {
    if (y.size() != r.size()) throw std::invalid_argument("control_cost: y and r lengths differ");
    const Eigen::VectorXd qb = broadcast_weights(q, y.size(), "control_cost");
    const Eigen::VectorXd rb = broadcast_weights(r_weight, u.size(), "control_cost");
    return (qb.array() * (y - r).array().square()).sum() + (rb.array() * u.array().square()).sum();
}

namespace detail {

/// Moore-Penrose pseudoinverse with the library-wide rank cutoff.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > kRankTolerance * s(0)) ++rank;
    return svd.matrixV().leftCols(rank) * s.head(rank).cwiseInverse().asDiagonal() *
           svd.matrixU().leftCols(rank).transpose();
}

inline void reject_bounds(const ControllerConfig& config) {
    if (config.u_min || config.u_max)
        throw std::runtime_error("input/output box constraints are not implemented");
}

}  // namespace detail

/// Predictive controller using the minimum-norm data predictor: the
/// future output is the affine map of (u_ini, y_ini, u) induced by the
/// pseudoinverse of col(Up, Yp, Uf), and the tracking cost is minimized
/// over u unconstrained.
class SubPcController {
  public:
    struct Step {
        Eigen::VectorXd u;
        Eigen::VectorXd y_pred;
    };

    SubPcController(const SignalMatrixSet& set, const Eigen::VectorXd& q, const Eigen::VectorXd& r)
        : L0_(set.L0), Lp_(set.Lp), n_u_(set.n_u), n_y_(set.n_y) {
        validate_set(set);
        const Eigen::MatrixXd Apinv = detail::pseudo_inverse(set.constraint_stack());
        const Eigen::Index pu = set.L0 * set.n_u;
        const Eigen::Index py = set.L0 * set.n_y;
        const Eigen::Index fu = set.Lp * set.n_u;
        C_ui_ = set.Yf * Apinv.leftCols(pu);
        C_yi_ = set.Yf * Apinv.middleCols(pu, py);
        H_ = set.Yf * Apinv.rightCols(fu);
        q_ = broadcast_weights(q, set.Lp * set.n_y, "subpc output weights");
        r_ = broadcast_weights(r, fu, "subpc input weights");
        Eigen::MatrixXd hess = H_.transpose() * q_.asDiagonal() * H_;
        hess += Eigen::MatrixXd(r_.asDiagonal());
        hess_ = std::make_shared<SpdSolver>(hess, "subpc reduced Hessian");
        m_ = set.M();
    }

    Step step(const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini,
              const Eigen::VectorXd& r) const {
        check_dims(u_ini, y_ini, r);
        Step out;
        const Eigen::VectorXd c = C_ui_ * u_ini + C_yi_ * y_ini;
        out.u = hess_->solve(H_.transpose() * (q_.asDiagonal() * (r - c)));
        out.y_pred = c + H_ * out.u;
        return out;
    }

    Eigen::Index decision_dim() const { return Lp_ * n_u_; }

  private:
    void check_dims(const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini,
                    const Eigen::VectorXd& r) const {
        if (u_ini.size() != L0_ * n_u_ || y_ini.size() != L0_ * n_y_ || r.size() != Lp_ * n_y_)
            throw std::invalid_argument("subpc step: conditioning/reference dimension mismatch");
    }

    Eigen::Index L0_, Lp_, n_u_, n_y_, m_ = 0;
    Eigen::MatrixXd C_ui_, C_yi_, H_;
    Eigen::VectorXd q_, r_;
    std::shared_ptr<SpdSolver> hess_;
};

/// Regularized data-enabled predictive controller (2-norm penalties). The
/// joint problem over (u, y, g, yhat_ini) reduces, after eliminating the
/// data-defined variables u = Uf g, y = Yf g, yhat_ini = Yp g, to an
/// equality-constrained QP in g:
///   minimize  (Yf g - r)' Qh (Yf g - r) + (Uf g)' Rh (Uf g)
///             + lambda_g ||g||^2 + lambda_y ||Yp g - y_ini||^2
///   s.t.      Up g = u_ini.
/// The weights may legitimately span many orders of magnitude (lambda_y
/// large with lambda_g small approaches the unregularized problem), so the
/// quadratic form's eigenvalue spread can exceed what any factorization of
/// it survives in double precision. The solve therefore stays in
/// square-root form: the objective is written as one stacked residual
///   || [sqrt(Qh) Yf; sqrt(Rh) Uf; sqrt(lambda_y) Yp; sqrt(lambda_g) I] g
///      - (stacked targets) ||^2,
/// the input constraint is eliminated through an orthonormal basis of
/// null(Up), and the reduced least-squares problem is QR-factorized once
/// per data set -- its condition number is the square root of the normal
/// equations'. Only genuinely degenerate input data (rank-deficient Up) is
/// rejected.
class DeePcController {
  public:
    struct Step {
        Eigen::VectorXd u;
        Eigen::VectorXd y_pred;
        Eigen::VectorXd g;
        Eigen::VectorXd yhat_ini;
    };

    DeePcController(const SignalMatrixSet& set, const Eigen::VectorXd& q, const Eigen::VectorXd& r,
                    double lambda_g, double lambda_y)
        : set_(set), L0_(set.L0), Lp_(set.Lp), n_u_(set.n_u), n_y_(set.n_y) {
        validate_set(set);
        if (!(lambda_g > 0.0) || !(lambda_y > 0.0))
            throw std::invalid_argument("deepc: lambda_g and lambda_y must be positive");
        q_ = broadcast_weights(q, set.Lp * set.n_y, "deepc output weights");
        r_ = broadcast_weights(r, set.Lp * set.n_u, "deepc input weights");

        const Eigen::Index M = set.M();
        const Eigen::Index pu = set.L0 * set.n_u;

        // Null-space elimination of Up g = u_ini: with Up' P = Q [R1; 0],
        // write g = Q1 t1 + Z t2 where t1 = R1^-T P' u_ini is pinned by the
        // constraints and Z = Q2 spans null(Up).
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> up_qr(set.Up.transpose());
        if (up_qr.rank() < pu) throw std::runtime_error("deepc: singular KKT system");
        const Eigen::MatrixXd q_full =
            up_qr.householderQ() * Eigen::MatrixXd::Identity(M, M);
        q1_ = q_full.leftCols(pu);
        z_ = q_full.rightCols(M - pu);
        r1_ = up_qr.matrixQR().topRows(pu).triangularView<Eigen::Upper>();
        up_perm_ = up_qr.colsPermutation();

        // Square-root stack of the objective.
        sqrt_ly_ = std::sqrt(lambda_y);
        sqrt_lg_ = std::sqrt(lambda_g);
        const Eigen::Index a_rows = set.Lp * set.n_y + set.Lp * set.n_u + set.L0 * set.n_y;
        a_ = Eigen::MatrixXd(a_rows, M);
        a_ << q_.cwiseSqrt().asDiagonal() * set.Yf, r_.cwiseSqrt().asDiagonal() * set.Uf,
            sqrt_ly_ * set.Yp;
        Eigen::MatrixXd stacked(a_rows + M, M - pu);
        stacked.topRows(a_rows) = a_ * z_;
        stacked.bottomRows(M) = sqrt_lg_ * z_;
        reduced_qr_.compute(stacked);  // full column rank: sqrt_lg_ > 0
    }

    Step step(const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini,
              const Eigen::VectorXd& r) const {
        if (u_ini.size() != L0_ * n_u_ || y_ini.size() != L0_ * n_y_ || r.size() != Lp_ * n_y_)
            throw std::invalid_argument("deepc step: conditioning/reference dimension mismatch");
        const Eigen::VectorXd t1 = r1_.transpose().triangularView<Eigen::Lower>().solve(
            up_perm_.transpose() * u_ini);
        const Eigen::VectorXd g_part = q1_ * t1;

        Eigen::VectorXd target(a_.rows() + set_.M());
        target.segment(0, Lp_ * n_y_) = q_.cwiseSqrt().cwiseProduct(r);
        target.segment(Lp_ * n_y_, Lp_ * n_u_).setZero();
        target.segment(Lp_ * (n_y_ + n_u_), L0_ * n_y_) = sqrt_ly_ * y_ini;
        target.head(a_.rows()) -= a_ * g_part;
        target.tail(set_.M()) = -sqrt_lg_ * g_part;

        Step out;
        out.g = g_part + z_ * reduced_qr_.solve(target);
        out.u = set_.Uf * out.g;
        out.y_pred = set_.Yf * out.g;
        out.yhat_ini = set_.Yp * out.g;
        return out;
    }

    Eigen::Index decision_dim() const { return set_.M(); }

  private:
    SignalMatrixSet set_;
    Eigen::Index L0_, Lp_, n_u_, n_y_;
    double sqrt_ly_ = 0.0, sqrt_lg_ = 0.0;
    Eigen::VectorXd q_, r_;
    Eigen::MatrixXd q1_, z_, r1_, a_;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> up_perm_;
    Eigen::HouseholderQR<Eigen::MatrixXd> reduced_qr_;
};

/// Predictive controller with the maximum-likelihood one-step predictor,
/// warm-started from the previous sample's parameter vector: the ridge
/// weight is frozen at lambda(g_prev) and the resulting predictor
///   g = P y_ini + Q col(u_ini, u)
/// is affine in the planned input, so the tracking cost is again an
/// unconstrained quadratic in u.
class SmmPcController {
  public:
    struct Step {
        Eigen::VectorXd u;
        Eigen::VectorXd y_pred;
        Eigen::VectorXd g;
    };

    SmmPcController(const SignalMatrixSet& set, const Eigen::VectorXd& q, const Eigen::VectorXd& r,
                    const NoiseModel& noise)
        : set_(set), noise_(noise) {
        validate_set(set);
        if (set.n_u != 1 || set.n_y != 1)
            throw std::invalid_argument("smmpc: single-input single-output data required");
        U_ = set.input_stack();
        yty_ = set.Yp.transpose() * set.Yp;
        q_ = broadcast_weights(q, set.Lp, "smmpc output weights");
        r_ = broadcast_weights(r, set.Lp, "smmpc input weights");
    }

    Step step(const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini, const Eigen::VectorXd& r,
              const Eigen::VectorXd& g_prev) const {
        if (u_ini.size() != set_.L0 || y_ini.size() != set_.L0 || r.size() != set_.Lp)
            throw std::invalid_argument("smmpc step: conditioning/reference dimension mismatch");
        if (g_prev.size() != set_.M())
            throw std::invalid_argument("smmpc step: warm-start vector length must be M");

        const double lambda = lambda_weight(g_prev, noise_, set_.L0, set_.Lp);
        const PredictorOperators ops = predictor_operators(U_, set_.Yp, yty_, lambda);
        const Eigen::VectorXd base = ops.P * y_ini + ops.Q.leftCols(set_.L0) * u_ini;
        const Eigen::MatrixXd G_u = ops.Q.rightCols(set_.Lp);

        const Eigen::VectorXd c = set_.Yf * base;
        const Eigen::MatrixXd H = set_.Yf * G_u;
        Eigen::MatrixXd hess = H.transpose() * q_.asDiagonal() * H;
        hess += Eigen::MatrixXd(r_.asDiagonal());
        const SpdSolver solver(hess, "smmpc input Hessian");

        Step out;
        out.u = solver.solve(H.transpose() * (q_.asDiagonal() * (r - c)));
        out.y_pred = c + H * out.u;
        out.g = base + G_u * out.u;
        return out;
    }

    Eigen::Index decision_dim() const { return set_.M(); }

    /// Warm start for the first controlled step: the minimum-norm
    /// parameter vector conditioned on the current windows and a zero
    /// input plan.
    Eigen::VectorXd initial_g(const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini) const {
        return pinv_solution(set_, u_ini, y_ini, Eigen::VectorXd::Zero(set_.Lp)).g;
    }

  private:
    SignalMatrixSet set_;
    NoiseModel noise_;
    Eigen::MatrixXd U_, yty_;
    Eigen::VectorXd q_, r_;
};

/// Benchmark controller with full model knowledge and exact state
/// measurements: condensed prediction over the horizon from (A, B, C, D),
/// unconstrained quadratic in the input plan.
class IdealMpcController {
  public:
    IdealMpcController(const LtiSystem& system, Eigen::Index Lp, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& r)
        : sys_(system), Lp_(Lp) {
        validate_system(system);
        if (Lp < 1) throw std::invalid_argument("mpc: need horizon >= 1");
        const Eigen::Index nx = system.n_x(), nu = system.n_u(), ny = system.n_y();
        O_ = Eigen::MatrixXd::Zero(Lp * ny, nx);
        T_ = Eigen::MatrixXd::Zero(Lp * ny, Lp * nu);
        Eigen::MatrixXd cak = system.C;  // C A^k
        std::vector<Eigen::MatrixXd> markov = impulse_response(system, Lp);
        for (Eigen::Index k = 0; k < Lp; ++k) {
            O_.middleRows(k * ny, ny) = cak;
            cak = cak * system.A;
            for (Eigen::Index j = 0; j <= k; ++j)
                T_.block(k * ny, j * nu, ny, nu) = markov[static_cast<std::size_t>(k - j)];
        }
        q_ = broadcast_weights(q, Lp * ny, "mpc output weights");
        r_ = broadcast_weights(r, Lp * nu, "mpc input weights");
        Eigen::MatrixXd hess = T_.transpose() * q_.asDiagonal() * T_;
        hess += Eigen::MatrixXd(r_.asDiagonal());
        hess_ = std::make_shared<SpdSolver>(hess, "mpc input Hessian");
    }

    /// Full-horizon optimal input plan from the exact current state.
    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& r) const {
        if (x.size() != sys_.n_x() || r.size() != Lp_ * sys_.n_y())
            throw std::invalid_argument("mpc step: state/reference dimension mismatch");
        return hess_->solve(T_.transpose() * (q_.asDiagonal() * (r - O_ * x)));
    }

    /// Exact condensed prediction for a given plan (exposed for tests).
    Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
        return O_ * x + T_ * u;
    }

    Eigen::Index decision_dim() const { return Lp_ * sys_.n_u(); }

  private:
    LtiSystem sys_;
    Eigen::Index Lp_;
    Eigen::MatrixXd O_, T_;
    Eigen::VectorXd q_, r_;
    std::shared_ptr<SpdSolver> hess_;
};

inline SubPcController::Step subpc_step(const SignalMatrixSet& set, const Eigen::VectorXd& u_ini,
                                        const Eigen::VectorXd& y_ini, const Eigen::VectorXd& r,
                                        const Eigen::VectorXd& q, const Eigen::VectorXd& r_weight) {
    return SubPcController(set, q, r_weight).step(u_ini, y_ini, r);
}

inline DeePcController::Step deepc_step(const SignalMatrixSet& set, const Eigen::VectorXd& u_ini,
                                        const Eigen::VectorXd& y_ini, const Eigen::VectorXd& r,
                                        const Eigen::VectorXd& q, const Eigen::VectorXd& r_weight,
                                        double lambda_g, double lambda_y) {
    return DeePcController(set, q, r_weight, lambda_g, lambda_y).step(u_ini, y_ini, r);
}

inline SmmPcController::Step smmpc_step(const SignalMatrixSet& set, const Eigen::VectorXd& u_ini,
                                        const Eigen::VectorXd& y_ini, const Eigen::VectorXd& r,
                                        const Eigen::VectorXd& q, const Eigen::VectorXd& r_weight,
                                        const NoiseModel& noise, const Eigen::VectorXd& g_prev) {
    return SmmPcController(set, q, r_weight, noise).step(u_ini, y_ini, r, g_prev);
}

inline Eigen::VectorXd ideal_mpc_step(const LtiSystem& system, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& r, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& r_weight) {
    return IdealMpcController(system, r.size() / system.n_y(), q, r_weight).step(x, r);
}

/// Closed-loop record. J is the true stage cost
///   sum_k q0 (y0_k - r_k)^2 + r0 u_k^2
/// over all steps (warm-up included), with q0/r0 the first entries of the
/// broadcast stage weights; it is recomputable from the stored sequences.
struct ClosedLoopResult {
    Eigen::VectorXd u, y, y0, r;
    std::vector<bool> step_ok;
    std::vector<std::string> step_error;  // empty string when the step succeeded
    Eigen::VectorXd solve_seconds;        // 0 for warm-up steps
    double J = 0.0;
    Eigen::Index decision_dim = 0;
};

/// Run a single-input single-output plant in closed loop for N_c steps.
/// The first L0 steps apply zero input while the conditioning windows fill
/// with real measurements; afterwards the configured controller plans at
/// every step and the first planned input is applied. Online measurement
/// noise (config.noise.sigma_p2) corrupts what the controller sees; the
/// noise-free output is recorded separately. A failing controller step is
/// recorded and falls back to zero input.
inline ClosedLoopResult receding_horizon_run(const LtiSystem& plant, const ControllerConfig& config,
                                             const SignalMatrixSet& set,
                                             const std::function<double(Eigen::Index)>& r_gen,
                                             Eigen::Index N_c, std::uint64_t seed) {
    validate_system(plant);
    if (plant.n_u() != 1 || plant.n_y() != 1)
        throw std::invalid_argument("receding_horizon_run: single-input single-output plant required");
    if (N_c < 1) throw std::invalid_argument("receding_horizon_run: need N_c >= 1");
    detail::reject_bounds(config);
    const Eigen::Index L0 = config.L0;
    const Eigen::Index Lp = config.Lp;
    if (L0 < 1 || Lp < 1) throw std::invalid_argument("receding_horizon_run: need L0, Lp >= 1");
    if (config.kind != ControllerKind::IdealMPC && (set.L0 != L0 || set.Lp != Lp))
        throw std::invalid_argument("receding_horizon_run: set dimensions disagree with config");

    std::optional<SubPcController> subpc;
    std::optional<DeePcController> deepc;
    std::optional<SmmPcController> smmpc;
    std::optional<IdealMpcController> mpc;
    Eigen::Index decision_dim = 0;
    switch (config.kind) {
        case ControllerKind::SubPC:
            subpc.emplace(set, config.q, config.r);
            decision_dim = subpc->decision_dim();
            break;
        case ControllerKind::DeePC:
            deepc.emplace(set, config.q, config.r, config.lambda_g, config.lambda_y);
            decision_dim = deepc->decision_dim();
            break;
        case ControllerKind::SmmPC:
            smmpc.emplace(set, config.q, config.r, config.noise);
            decision_dim = smmpc->decision_dim();
            break;
        case ControllerKind::IdealMPC:
            mpc.emplace(plant, Lp, config.q, config.r);
            decision_dim = mpc->decision_dim();
            break;
    }

    const double q_stage = broadcast_weights(config.q, Lp, "closed-loop output weight")(0);
    const double r_stage = broadcast_weights(config.r, Lp, "closed-loop input weight")(0);
    const double sigma_p = std::sqrt(config.noise.sigma_p2);
    Rng noise_rng(stream_seed(seed, "online-noise"));

    ClosedLoopResult res;
    res.u.resize(N_c);
    res.y.resize(N_c);
    res.y0.resize(N_c);
    res.r.resize(N_c);
    res.solve_seconds = Eigen::VectorXd::Zero(N_c);
    res.step_ok.assign(static_cast<std::size_t>(N_c), true);
    res.step_error.assign(static_cast<std::size_t>(N_c), std::string());
    res.decision_dim = decision_dim;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.n_x());
    Eigen::VectorXd u_win = Eigen::VectorXd::Zero(L0);
    Eigen::VectorXd y_win = Eigen::VectorXd::Zero(L0);
    Eigen::VectorXd g_prev;

    for (Eigen::Index k = 0; k < N_c; ++k) {
        const double r_k = r_gen(k);
        double u_k = 0.0;
        if (k >= L0) {
            Eigen::VectorXd r_hor(Lp);
            for (Eigen::Index j = 0; j < Lp; ++j) r_hor(j) = r_gen(k + j);
            const auto t_start = std::chrono::steady_clock::now();
            try {
                switch (config.kind) {
                    case ControllerKind::SubPC:
                        u_k = subpc->step(u_win, y_win, r_hor).u(0);
                        break;
                    case ControllerKind::DeePC:
                        u_k = deepc->step(u_win, y_win, r_hor).u(0);
                        break;
                    case ControllerKind::SmmPC: {
                        if (g_prev.size() == 0) g_prev = smmpc->initial_g(u_win, y_win);
                        const SmmPcController::Step s = smmpc->step(u_win, y_win, r_hor, g_prev);
                        g_prev = s.g;
                        u_k = s.u(0);
                        break;
                    }
                    case ControllerKind::IdealMPC:
                        u_k = mpc->step(x, r_hor)(0);
                        break;
                }
            } catch (const std::exception& e) {
                u_k = 0.0;
                res.step_ok[static_cast<std::size_t>(k)] = false;
                res.step_error[static_cast<std::size_t>(k)] = e.what();
            }
            const auto t_end = std::chrono::steady_clock::now();
            res.solve_seconds(k) = std::chrono::duration<double>(t_end - t_start).count();
        }

        const double y0_k = (plant.C * x + plant.D.col(0) * u_k).value();
        const double y_k = sigma_p > 0.0 ? y0_k + sigma_p * noise_rng.gaussian() : y0_k;
        x = plant.A * x + plant.B.col(0) * u_k;

        res.u(k) = u_k;
        res.y(k) = y_k;
        res.y0(k) = y0_k;
        res.r(k) = r_k;
        res.J += q_stage * (y0_k - r_k) * (y0_k - r_k) + r_stage * u_k * u_k;

        // Slide the conditioning windows: oldest sample drops off.
        if (L0 > 1) {
            u_win.head(L0 - 1) = u_win.tail(L0 - 1).eval();
            y_win.head(L0 - 1) = y_win.tail(L0 - 1).eval();
        }
        u_win(L0 - 1) = u_k;
        y_win(L0 - 1) = y_k;
    }
    return res;
}

}  // namespace smm
