// Estimate the impulse response of the 4-state benchmark system from one
// noisy data record with all four estimators and print the fit metrics.

#include <cstdio>

#include <smm/smm.hpp>

int main() {
    const smm::LtiSystem sys = smm::make_g1();
    const Eigen::Index N = 50, n = 11, L0 = 4;
    const double sigma2 = 0.01;

    const smm::IdentDataset ds = smm::make_ident_dataset(sys, N, n, sigma2, /*seed=*/42);
    const Eigen::VectorXd h_true = smm::impulse_response_siso(sys, n);
    const std::vector<double> alpha = smm::default_alpha_grid();
    const std::vector<double> beta = smm::default_beta_grid();

    for (smm::FirMethod m :
         {smm::FirMethod::LS, smm::FirMethod::LSTC, smm::FirMethod::SMM, smm::FirMethod::SMMTC}) {
        const smm::FirEstimate est =
            smm::run_ident_method(ds, m, L0, n, /*known_past=*/true, alpha, beta);
        std::printf("%-6s W = %6.2f   max|h - h_true| = %.4f\n", smm::to_string(m),
                    smm::fit_metric(h_true, est.h), (est.h - h_true).cwiseAbs().maxCoeff());
    }
    return 0;
}
