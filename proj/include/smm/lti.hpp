#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smm/csv.hpp"
#include "smm/numeric.hpp"
#include "smm/rng.hpp"

namespace smm {

/// Discrete-time LTI system x+ = A x + B u, y = C x + D u.
struct LtiSystem {
    Eigen::MatrixXd A, B, C, D;

    Eigen::Index n_x() const { return A.rows(); }
    Eigen::Index n_u() const { return B.cols(); }
    Eigen::Index n_y() const { return C.rows(); }
};

/// Finite input/output/state record; one column per sample time.
struct Trajectory {
    Eigen::MatrixXd u;  // n_u x N
    Eigen::MatrixXd y;  // n_y x N
    Eigen::MatrixXd x;  // n_x x N (state before the update at each time)

    Eigen::Index length() const { return u.cols(); }
};

/// Output-measurement noise levels: sigma2 on recorded data, sigmap2 on the
/// online past window.
struct NoiseModel {
    double sigma2 = 0.0;
    double sigma_p2 = 0.0;
};

inline void validate_system(const LtiSystem& sys) {
    const Eigen::Index nx = sys.A.rows();
    if (sys.A.cols() != nx) throw std::invalid_argument("lti: A must be square");
    if (sys.B.rows() != nx) throw std::invalid_argument("lti: B row count must match A");
    if (sys.C.cols() != nx) throw std::invalid_argument("lti: C column count must match A");
    if (sys.D.rows() != sys.C.rows() || sys.D.cols() != sys.B.cols())
        throw std::invalid_argument("lti: D must be n_y x n_u");
}

/// Controllable canonical realization of a SISO transfer function given by
/// numerator/denominator coefficients in descending powers of z. The
/// denominator is normalized to be monic; a numerator longer than the
/// denominator (an improper system) is rejected. A constant ratio yields a
/// zero-state (pure gain) system.
inline LtiSystem tf_to_ss(const Eigen::VectorXd& num, const Eigen::VectorXd& den) {
    if (den.size() == 0) throw std::invalid_argument("tf_to_ss: empty denominator");
    if (num.size() == 0) throw std::invalid_argument("tf_to_ss: empty numerator");
    if (den(0) == 0.0) throw std::invalid_argument("tf_to_ss: leading denominator coefficient is zero");
    if (num.size() > den.size()) throw std::invalid_argument("tf_to_ss: improper transfer function");

    const Eigen::Index n = den.size() - 1;
    Eigen::VectorXd a = den / den(0);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b.tail(num.size()) = num / den(0);

    LtiSystem sys;
    sys.A = Eigen::MatrixXd::Zero(n, n);
    sys.B = Eigen::MatrixXd::Zero(n, 1);
    sys.C = Eigen::MatrixXd::Zero(1, n);
    sys.D = Eigen::MatrixXd::Constant(1, 1, b(0));
    if (n == 0) return sys;

    sys.A.row(0) = -a.tail(n).transpose();
    sys.A.block(1, 0, n - 1, n - 1).setIdentity();
    sys.B(0, 0) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) sys.C(0, i) = b(i + 1) - a(i + 1) * b(0);
    return sys;
}

/// Forward simulation from x0 (default zero). Input is n_u x N.
inline Trajectory simulate(const LtiSystem& sys, const Eigen::MatrixXd& input,
                           const Eigen::VectorXd& x0 = Eigen::VectorXd()) {
    validate_system(sys);
    if (input.rows() != sys.n_u()) throw std::invalid_argument("simulate: input row count != n_u");
    Eigen::VectorXd x = x0.size() ? x0 : Eigen::VectorXd::Zero(sys.n_x());
    if (x.size() != sys.n_x()) throw std::invalid_argument("simulate: x0 size != n_x");

    const Eigen::Index N = input.cols();
    Trajectory traj;
    traj.u = input;
    traj.y.resize(sys.n_y(), N);
    traj.x.resize(sys.n_x(), N);
    for (Eigen::Index t = 0; t < N; ++t) {
        traj.x.col(t) = x;
        traj.y.col(t) = sys.C * x + sys.D * input.col(t);
        x = sys.A * x + sys.B * input.col(t);
    }
    return traj;
}

/// First n Markov parameters h_0 = D, h_k = C A^{k-1} B.
inline std::vector<Eigen::MatrixXd> impulse_response(const LtiSystem& sys, Eigen::Index n) {
    validate_system(sys);
    if (n < 1) throw std::invalid_argument("impulse_response: need n >= 1");
    std::vector<Eigen::MatrixXd> h;
    h.reserve(static_cast<std::size_t>(n));
    h.push_back(sys.D);
    Eigen::MatrixXd x = sys.B;  // A^{k-1} B
    for (Eigen::Index k = 1; k < n; ++k) {
        h.push_back(sys.C * x);
        x = sys.A * x;
    }
    return h;
}

inline Eigen::VectorXd impulse_response_siso(const LtiSystem& sys, Eigen::Index n) {
    if (sys.n_u() != 1 || sys.n_y() != 1)
        throw std::invalid_argument("impulse_response_siso: system is not single-input single-output");
    const auto h = impulse_response(sys, n);
    Eigen::VectorXd out(n);
    for (Eigen::Index k = 0; k < n; ++k) out(k) = h[static_cast<std::size_t>(k)](0, 0);
    return out;
}

/// Copy of `traj` with i.i.d. N(0, sigma2) added to every output sample.
/// Draws are consumed one sample time at a time (channels in order within a
/// time step), so sequences are reproducible. sigma2 == 0 returns the input
/// bit for bit without touching the generator.
inline Trajectory add_noise(const Trajectory& traj, double sigma2, std::uint64_t seed) {
    if (sigma2 < 0.0) throw std::invalid_argument("add_noise: negative variance");
    Trajectory noisy = traj;
    if (sigma2 == 0.0) return noisy;
    Rng rng(seed);
    const double sigma = std::sqrt(sigma2);
    for (Eigen::Index t = 0; t < noisy.y.cols(); ++t)
        for (Eigen::Index ch = 0; ch < noisy.y.rows(); ++ch) noisy.y(ch, t) += sigma * rng.gaussian();
    return noisy;
}

struct MinimalityReport {
    bool controllable = false;
    bool observable = false;
    Eigen::Index controllability_rank = 0;
    Eigen::Index observability_rank = 0;

    bool minimal() const { return controllable && observable; }
};

/// Rank tests on the controllability/observability matrices (relative
/// singular-value cutoff kRankTolerance). A zero-state system is minimal.
inline MinimalityReport check_minimality(const LtiSystem& sys) {
    validate_system(sys);
    const Eigen::Index nx = sys.n_x();
    MinimalityReport rep;
    if (nx == 0) {
        rep.controllable = rep.observable = true;
        return rep;
    }
    Eigen::MatrixXd ctrb(nx, nx * sys.n_u());
    Eigen::MatrixXd obsv(nx * sys.n_y(), nx);
    Eigen::MatrixXd ab = sys.B;
    Eigen::MatrixXd ca = sys.C;
    for (Eigen::Index k = 0; k < nx; ++k) {
        ctrb.middleCols(k * sys.n_u(), sys.n_u()) = ab;
        obsv.middleRows(k * sys.n_y(), sys.n_y()) = ca;
        ab = sys.A * ab;
        ca = ca * sys.A;
    }
    rep.controllability_rank = numerical_rank(ctrb);
    rep.observability_rank = numerical_rank(obsv);
    rep.controllable = rep.controllability_rank == nx;
    rep.observable = rep.observability_rank == nx;
    return rep;
}

/// Fourth-order benchmark plant with two lightly damped resonances.
inline LtiSystem make_g1() {
    Eigen::VectorXd num(4), den(5);
    num << 0.1159, 0.0, 0.1159 * 0.5, 0.0;
    den << 1.0, -2.2, 2.42, -1.87, 0.7225;
    return tf_to_ss(num, den);
}

/// Second-order benchmark plant with one sample of delay.
inline LtiSystem make_g2() {
    Eigen::VectorXd num(2), den(3);
    num << 0.9183, 0.0;
    den << 1.0, 0.24, 0.36;
    return tf_to_ss(num, den);
}

/// Trajectory CSV: header "t,u_1..u_nu,y_1..y_ny", one row per sample,
/// full double precision. States are not serialized.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    std::vector<std::string> header{"t"};
    for (Eigen::Index i = 0; i < traj.u.rows(); ++i) header.push_back("u_" + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < traj.y.rows(); ++i) header.push_back("y_" + std::to_string(i + 1));
    write_csv_row(os, header);
    for (Eigen::Index t = 0; t < traj.length(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (Eigen::Index i = 0; i < traj.u.rows(); ++i) row.push_back(format_double(traj.u(i, t)));
        for (Eigen::Index i = 0; i < traj.y.rows(); ++i) row.push_back(format_double(traj.y(i, t)));
        write_csv_row(os, row);
    }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto os = open_output(path);
    write_trajectory_csv(os, traj);
}

inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory csv: empty file");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t")
        throw std::runtime_error("trajectory csv: header must start with 't'");
    Eigen::Index nu = 0, ny = 0;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i].rfind("u_", 0) == 0) {
            if (ny > 0) throw std::runtime_error("trajectory csv: input columns after output columns");
            ++nu;
        } else if (header[i].rfind("y_", 0) == 0) {
            ++ny;
        } else {
            throw std::runtime_error("trajectory csv: unexpected column '" + header[i] + "'");
        }
    }
    if (nu == 0 || ny == 0) throw std::runtime_error("trajectory csv: need at least one u_ and one y_ column");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
        if (static_cast<Eigen::Index>(rows.back().size()) != 1 + nu + ny)
            throw std::runtime_error("trajectory csv: row with wrong cell count");
    }
    Trajectory traj;
    const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
    traj.u.resize(nu, N);
    traj.y.resize(ny, N);
    traj.x.resize(0, N);
    for (Eigen::Index t = 0; t < N; ++t) {
        const auto& row = rows[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < nu; ++i) traj.u(i, t) = std::stod(row[static_cast<std::size_t>(1 + i)]);
        for (Eigen::Index i = 0; i < ny; ++i)
            traj.y(i, t) = std::stod(row[static_cast<std::size_t>(1 + nu + i)]);
    }
    return traj;
}

inline Trajectory read_trajectory_csv(const std::string& path) {
    auto is = open_input(path);
    return read_trajectory_csv(is);
}

}  // namespace smm
