// Build the two benchmark systems, print their leading impulse-response
// samples and check minimality of the realizations.

#include <cstdio>

#include <smm/smm.hpp>

int main() {
    for (const char* name : {"g1", "g2"}) {
        const smm::LtiSystem sys = smm::make_system(name);
        const Eigen::VectorXd h = smm::impulse_response_siso(sys, 8);
        std::printf("%s: n_x=%d impulse:", name, static_cast<int>(sys.n_x()));
        for (Eigen::Index k = 0; k < h.size(); ++k) std::printf(" % .4f", h(k));
        const smm::MinimalityReport rep = smm::check_minimality(sys);
        std::printf("  (controllable=%d observable=%d)\n", rep.controllable ? 1 : 0,
                    rep.observable ? 1 : 0);
    }

    // A short noise-free trajectory and its depth-3 window matrix.
    smm::Rng rng(1);
    Eigen::MatrixXd u(1, 12);
    u.row(0) = rng.gaussian_vector(12).transpose();
    const smm::Trajectory traj = smm::simulate(smm::make_g2(), u);
    const smm::SignalMatrixSet set = smm::partition(traj.u, traj.y, 1, 2);
    const smm::RankReport ranks = smm::check_data_ranks(set, smm::make_g2().n_x());
    std::printf("depth-3 data matrix: %d columns, input rank %d/%d, data rank %d (expect %d)\n",
                static_cast<int>(set.M()), static_cast<int>(ranks.input_rank),
                static_cast<int>(ranks.expected_input_rank), static_cast<int>(ranks.data_rank),
                static_cast<int>(ranks.expected_data_rank));
    return 0;
}
