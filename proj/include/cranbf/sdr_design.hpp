#pragma once

#include <vector>

#include "cranbf/conic.hpp"
#include "cranbf/metrics.hpp"
#include "cranbf/netmodel.hpp"
#include "cranbf/outcome.hpp"

namespace cranbf::sdr {

using metrics::BeamformerSet;
using netmodel::ChannelKnowledge;

/// Maps the NL^2 free entries w0 of a block-diagonal W into vec(W).
/// Entry (i, j) of block n is w0[n L^2 + j L + i], i.e. the blocks' own vecs stacked.
class SelectionMatrix {
public:
    SelectionMatrix(int N, int L);

    int N() const { return N_; }
    int L() const { return L_; }
    int rows() const { return N_ * N_ * L_ * L_; }  ///< length of vec(W)
    int cols() const { return N_ * L_ * L_; }       ///< length of w0

    /// Position in vec(W) hit by column c.
    int vec_index(int c) const { return static_cast<int>(row_[c]) + N_ * L_ * static_cast<int>(col_[c]); }
    int w_row(int c) const { return row_[c]; }
    int w_col(int c) const { return col_[c]; }

    /// The explicit 0/1 matrix U.
    RMat dense() const;

    /// U^H (A^T ⊗ B) U without forming the Kronecker product.
    CMat project_kron(const CMat& a, const CMat& b) const;

    CVec to_w0(const CMat& dense_w) const;
    CMat to_dense(const CVec& w0) const;
    BeamformerSet to_beams(const CMat& v, const CVec& w0) const;

private:
    int N_, L_;
    std::vector<int> row_, col_;
};

/// A^T ⊗ B (dense; meant for identity checks on small instances).
CMat kron_t(const CMat& a, const CMat& b);

/// The unprojected P1 building blocks for user k.
struct P1Terms {
    CMat T;                ///< (G^H v_k v_k^H G)^T ⊗ h_k h_k^H
    std::vector<CMat> F;   ///< F_l = C_l^T ⊗ D_k, l = 0..K-1
    CMat E;                ///< I ⊗ D_k
    CMat J;                ///< C_k^T ⊗ I
};
P1Terms p1_terms(const ChannelKnowledge& kn, const CMat& v, int k);

/// Access-link SDR over the lifted w0 w0^H (single NL^2 x NL^2 block).
conic::ComplexSdp assemble_p1(const ChannelKnowledge& kn, const CMat& v, const std::vector<double>& thresholds);

struct P2Terms {
    std::vector<CMat> A;  ///< G W^H h_k h_k^H W G^H
    std::vector<CMat> B;  ///< G W^H D_k W G^H + tr(W^H D_k W Sigma_1) I
    RVec b;               ///< sigma_rrh^2 tr(D_k W W^H) + sigma_ms^2
    double a = 0.0;       ///< sigma_rrh^2 tr(W^H W)
    CMat tau0;
};
P2Terms p2_terms(const ChannelKnowledge& kn, const CMat& dense_w);

/// Fronthaul SDR over K blocks V_k of size M x M.
conic::ComplexSdp assemble_p2(const ChannelKnowledge& kn, const CMat& dense_w, const std::vector<double>& thresholds);

struct SdrOptions {
    conic::SolverOptions solver{};
    int n_candidates = 100;
    double p_cp0 = 1.0;       ///< initial CP power (W) of the power ramp used by initialization and TSM
    double mu = 1.05;         ///< CP power growth factor
    int t_max_init = 100;
    int t_max_ao = 100;
    double eta = 1e-3;        ///< AO relative stopping threshold
    int t_max_tsm = 100;
    /// Skip the solver when some feasibility margin is non-positive.
    bool margin_precheck = true;
};

/// One solved subproblem: the full beamformer set with the optimized half replaced.
struct StepResult {
    DesignStatus status = DesignStatus::Infeasible;
    BeamformerSet beams;
    double power = 0.0;            ///< total power of `beams`
    double relaxed_power = 0.0;    ///< SDR optimum (lower bound on `power` for this step)
    double eig_ratio = 0.0;        ///< worst lambda_2/lambda_1 over the PSD blocks
    bool randomized = false;
    int solver_iterations = 0;
    std::string detail;
    bool ok() const { return status == DesignStatus::Feasible; }
};

/// Solves P1 for W with v fixed, recovers a rank-1 w0 and rescales it along its ray so
/// the tightest SINR constraint is met exactly.
StepResult solve_access(const ChannelKnowledge& kn, const CMat& v, const std::vector<double>& thresholds, Rng& rng,
                        const SdrOptions& opt = {});

/// Solves P2 for the CP beamformers with W fixed; same recovery and rescaling.
StepResult solve_fronthaul(const ChannelKnowledge& kn, const BeamformerSet& current,
                           const std::vector<double>& thresholds, Rng& rng, const SdrOptions& opt = {});

/// K dominant eigenvectors of G_hat G_hat^H / sigma_rrh^2, each with power p_cp / K.
CMat snr_eigen_init(const ChannelKnowledge& kn, double p_cp);

struct InitResult {
    DesignStatus status = DesignStatus::Infeasible;
    StepResult step;         ///< the first feasible access solve
    int attempts = 0;
    double p_cp = 0.0;
    std::vector<double> rank1_ratios;
};

/// Grows the CP power from p_cp0 until the access SDR becomes feasible.
InitResult algorithm0(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                      const SdrOptions& opt = {});

DesignOutcome alternating_optimization(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                                       const SdrOptions& opt = {});

DesignOutcome total_snr_max(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                            const SdrOptions& opt = {});

}  // namespace cranbf::sdr
