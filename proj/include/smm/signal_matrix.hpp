#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "smm/numeric.hpp"

namespace smm {

/// Column layout of a data matrix: Hankel (overlapping windows), Page
/// (disjoint windows), or Compressed (orthogonally reduced from either).
enum class MatrixKind { Hankel, Page, Compressed };

inline const char* to_string(MatrixKind kind) {
    switch (kind) {
        case MatrixKind::Hankel: return "hankel";
        case MatrixKind::Page: return "page";
        case MatrixKind::Compressed: return "compressed";
    }
    return "?";
}

/// Block Hankel matrix of window length L: column j stacks samples
/// j, ..., j+L-1 of the n-channel signal (n x N), giving (L n) x (N-L+1).
inline Eigen::MatrixXd build_hankel(const Eigen::MatrixXd& signal, Eigen::Index L) {
    const Eigen::Index n = signal.rows();
    const Eigen::Index N = signal.cols();
    if (L < 1) throw std::invalid_argument("build_hankel: need L >= 1");
    if (n < 1) throw std::invalid_argument("build_hankel: empty signal");
    if (N < L) throw std::invalid_argument("build_hankel: signal shorter than window length");
    const Eigen::Index M = N - L + 1;
    Eigen::MatrixXd H(L * n, M);
    for (Eigen::Index j = 0; j < M; ++j)
        H.col(j) = signal.middleCols(j, L).reshaped();
    return H;
}

/// Block Page matrix: like build_hankel but columns use disjoint windows
/// 0..L-1, L..2L-1, ...; trailing samples that do not fill a window are
/// dropped. Shape (L n) x floor(N/L).
inline Eigen::MatrixXd build_page(const Eigen::MatrixXd& signal, Eigen::Index L) {
    const Eigen::Index n = signal.rows();
    const Eigen::Index N = signal.cols();
    if (L < 1) throw std::invalid_argument("build_page: need L >= 1");
    if (n < 1) throw std::invalid_argument("build_page: empty signal");
    if (N < L) throw std::invalid_argument("build_page: signal shorter than window length");
    const Eigen::Index M = N / L;
    Eigen::MatrixXd P(L * n, M);
    for (Eigen::Index j = 0; j < M; ++j)
        P.col(j) = signal.middleCols(j * L, L).reshaped();
    return P;
}

/// Persistency of excitation of order L: the depth-L block Hankel matrix of
/// the signal has full row rank. False whenever the signal is too short to
/// form the matrix.
inline bool is_persistently_exciting(const Eigen::MatrixXd& signal, Eigen::Index L,
                                     double rel_tol = kRankTolerance) {
    if (L < 1) throw std::invalid_argument("is_persistently_exciting: need L >= 1");
    if (signal.cols() < L) return false;
    const Eigen::MatrixXd H = build_hankel(signal, L);
    return numerical_rank(H, rel_tol) == H.rows();
}

/// Input/output data matrices split into past (depth L0) and future
/// (depth Lp) block rows. All four blocks share the same columns.
struct SignalMatrixSet {
    Eigen::MatrixXd Up, Uf, Yp, Yf;
    Eigen::Index L0 = 0, Lp = 0;
    Eigen::Index n_u = 0, n_y = 0;
    MatrixKind kind = MatrixKind::Hankel;

    Eigen::Index L() const { return L0 + Lp; }
    Eigen::Index M() const { return Up.cols(); }

    /// col(Up, Uf): the full input data matrix.
    Eigen::MatrixXd input_stack() const {
        Eigen::MatrixXd s(Up.rows() + Uf.rows(), M());
        s << Up, Uf;
        return s;
    }

    /// col(Yp, Yf): the full output data matrix.
    Eigen::MatrixXd output_stack() const {
        Eigen::MatrixXd s(Yp.rows() + Yf.rows(), M());
        s << Yp, Yf;
        return s;
    }

    /// col(Up, Uf, Yp, Yf): all data, inputs on top.
    Eigen::MatrixXd data_stack() const {
        Eigen::MatrixXd s(Up.rows() + Uf.rows() + Yp.rows() + Yf.rows(), M());
        s << Up, Uf, Yp, Yf;
        return s;
    }

    /// col(Up, Yp, Uf): left-hand side of the linear predictor constraints
    /// (initial condition rows first, then the planned-input rows).
    Eigen::MatrixXd constraint_stack() const {
        Eigen::MatrixXd s(Up.rows() + Yp.rows() + Uf.rows(), M());
        s << Up, Yp, Uf;
        return s;
    }
};

inline void validate_set(const SignalMatrixSet& set) {
    if (set.L0 < 1 || set.Lp < 1)
        throw std::invalid_argument("signal matrix set: need L0 >= 1 and Lp >= 1");
    if (set.n_u < 1 || set.n_y < 1)
        throw std::invalid_argument("signal matrix set: need at least one input and output channel");
    const Eigen::Index M = set.Up.cols();
    if (set.Uf.cols() != M || set.Yp.cols() != M || set.Yf.cols() != M)
        throw std::invalid_argument("signal matrix set: blocks disagree on column count");
    if (set.Up.rows() != set.L0 * set.n_u || set.Uf.rows() != set.Lp * set.n_u ||
        set.Yp.rows() != set.L0 * set.n_y || set.Yf.rows() != set.Lp * set.n_y)
        throw std::invalid_argument("signal matrix set: block row counts disagree with (L0, Lp, n_u, n_y)");
    if (M < 1) throw std::invalid_argument("signal matrix set: no columns");
}

/// Build the four-block set from raw input/output data (n_u x N, n_y x N).
inline SignalMatrixSet partition(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y,
                                 Eigen::Index L0, Eigen::Index Lp,
                                 MatrixKind kind = MatrixKind::Hankel) {
    if (u.cols() != y.cols()) throw std::invalid_argument("partition: u and y lengths differ");
    if (L0 < 1 || Lp < 1) throw std::invalid_argument("partition: need L0 >= 1 and Lp >= 1");
    if (kind == MatrixKind::Compressed)
        throw std::invalid_argument("partition: compressed sets come from compress()");
    const Eigen::Index L = L0 + Lp;
    const Eigen::MatrixXd U = kind == MatrixKind::Hankel ? build_hankel(u, L) : build_page(u, L);
    const Eigen::MatrixXd Y = kind == MatrixKind::Hankel ? build_hankel(y, L) : build_page(y, L);

    SignalMatrixSet set;
    set.L0 = L0;
    set.Lp = Lp;
    set.n_u = u.rows();
    set.n_y = y.rows();
    set.kind = kind;
    set.Up = U.topRows(L0 * u.rows());
    set.Uf = U.bottomRows(Lp * u.rows());
    set.Yp = Y.topRows(L0 * y.rows());
    set.Yf = Y.bottomRows(Lp * y.rows());
    validate_set(set);
    return set;
}

/// Rank diagnostics for a data set against a claimed state dimension nx:
/// the input stack should have full row rank (order-L excitation) and the
/// full data stack should have rank L n_u + nx exactly when the data was
/// generated noise-free by a minimal order-nx system.
struct RankReport {
    Eigen::Index input_rank = 0;
    Eigen::Index data_rank = 0;
    Eigen::Index expected_input_rank = 0;
    Eigen::Index expected_data_rank = 0;
    bool input_full_row_rank = false;
    bool data_rank_consistent = false;
};

inline RankReport check_data_ranks(const SignalMatrixSet& set, Eigen::Index nx,
                                   double rel_tol = kRankTolerance) {
    validate_set(set);
    if (nx < 0) throw std::invalid_argument("check_data_ranks: negative state dimension");
    RankReport rep;
    rep.expected_input_rank = set.L() * set.n_u;
    rep.expected_data_rank = set.L() * set.n_u + nx;
    rep.input_rank = numerical_rank(set.input_stack(), rel_tol);
    rep.data_rank = numerical_rank(set.data_stack(), rel_tol);
    rep.input_full_row_rank = rep.input_rank == rep.expected_input_rank;
    rep.data_rank_consistent = rep.data_rank == rep.expected_data_rank;
    return rep;
}

/// Orthogonal compression of a single-input single-output set: with
/// col(Up, Uf, Yp, Yf) = W S V^T, the compressed set is the square factor
/// W S (2L x 2L). Every predictor formed from the set depends on the data
/// only through inner products of its rows, which W S preserves, so
/// downstream results are unchanged while the column count drops from M
/// to 2L. Requires M >= 2L.
inline SignalMatrixSet compress(const SignalMatrixSet& set) {
    validate_set(set);
    if (set.kind == MatrixKind::Compressed)
        throw std::invalid_argument("compress: set is already compressed");
    if (set.n_u != 1 || set.n_y != 1)
        throw std::invalid_argument("compress: single-input single-output data required");
    const Eigen::Index L = set.L();
    if (set.M() < 2 * L)
        throw std::invalid_argument("compress: need at least 2L data columns");

    const Eigen::MatrixXd D = set.data_stack();  // 2L x M
    Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU);
    const Eigen::MatrixXd WS = svd.matrixU() * svd.singularValues().asDiagonal();  // 2L x 2L

    SignalMatrixSet out;
    out.L0 = set.L0;
    out.Lp = set.Lp;
    out.n_u = 1;
    out.n_y = 1;
    out.kind = MatrixKind::Compressed;
    out.Up = WS.topRows(set.L0);
    out.Uf = WS.middleRows(set.L0, set.Lp);
    out.Yp = WS.middleRows(L, set.L0);
    out.Yf = WS.bottomRows(set.Lp);
    validate_set(out);
    return out;
}

}  // namespace smm
