// Track a sine reference on the 4-state benchmark plant with each
// controller and print the realized closed-loop costs.

#include <cstdio>

#include <smm/smm.hpp>

int main() {
    const smm::LtiSystem plant = smm::make_g1();
    const Eigen::Index N = 200, L0 = 4, Lp = 11, steps = 60;
    const double sigma2 = 1.0, sigma_p2 = 1.0;
    const std::uint64_t seed = 42;

    const smm::SignalMatrixSet set =
        smm::make_control_set(plant, N, L0, Lp, sigma2, seed, /*compressed=*/false);

    for (smm::ControllerKind kind : {smm::ControllerKind::IdealMPC, smm::ControllerKind::SmmPC,
                                     smm::ControllerKind::SubPC, smm::ControllerKind::DeePC}) {
        smm::ControllerConfig cc;
        cc.kind = kind;
        cc.L0 = L0;
        cc.Lp = Lp;
        cc.lambda_g = 100.0;
        cc.lambda_y = 1000.0;
        cc.noise = smm::NoiseModel{sigma2, sigma_p2};
        const smm::ClosedLoopResult res =
            smm::receding_horizon_run(plant, cc, set, smm::bench_reference, steps, seed);
        std::printf("%-6s J = %8.3f  (decision dim %d)\n", smm::to_string(kind), res.J,
                    static_cast<int>(res.decision_dim));
    }
    return 0;
}
