#pragma once

#include <vector>

#include "cranbf/linalg.hpp"
#include "cranbf/netmodel.hpp"

namespace cranbf::metrics {

using netmodel::ChannelKnowledge;

/// CP beamformers (columns of v) and the N diagonal blocks of the RRH matrix.
struct BeamformerSet {
    CMat v;                     ///< M x K, column k is v_k
    std::vector<CMat> W_blocks; ///< N blocks, each L x L

    int K() const { return static_cast<int>(v.cols()); }
    /// The NL x NL block-diagonal W (exact zeros off the blocks).
    CMat dense_w() const;
};

/// Build a BeamformerSet from a dense W by copying its diagonal blocks.
BeamformerSet make_beams(const CMat& v, const CMat& dense_w, int N, int L);

struct SecondOrderTerms {
    std::vector<CMat> D;      ///< D_k = h_k h_k^H + Sigma_2k
    std::vector<CMat> C;      ///< C_k = G^H v_k v_k^H G + |v_k|^2 Sigma_1
    RVec sigma1;              ///< diagonal of Sigma_1
    std::vector<RVec> sigma2; ///< diagonals of Sigma_2k
    CMat tau0;                ///< I_M + G W^H W G^H + tr(W^H W Sigma_1) I_M (needs W)
};

/// D_k and C_k depend only on the CP beamformers; tau0 only on W. Either may be
/// omitted (nullptr) and the corresponding fields are left empty.
SecondOrderTerms second_order_terms(const ChannelKnowledge& kn, const CMat* v, const CMat* dense_w);

struct PerUserPowers {
    RVec p_cp;
    RVec p_rrh;
    RVec p_amp_noise;
};

/// Mean-statistics SINR of user k.
double sinr(const ChannelKnowledge& kn, const BeamformerSet& beams, int k);
std::vector<double> all_sinrs(const ChannelKnowledge& kn, const BeamformerSet& beams);

/// Monte Carlo estimate of the same ratio, sampling channel errors, noises and symbols.
double mc_sinr_oracle(const ChannelKnowledge& kn, const BeamformerSet& beams, int k, long n_samples, Rng& rng);

/// Sampled components, exposed so tests can check the individual expectations.
struct SinrComponents {
    double p_desired = 0.0;
    double p_interference1 = 0.0;
    double p_interference2 = 0.0;
    double p_noise = 0.0;
    double ratio() const { return p_desired / (p_interference1 + p_interference2 + p_noise); }
};
SinrComponents mc_sinr_components(const ChannelKnowledge& kn, const BeamformerSet& beams, int k, long n_samples,
                                  Rng& rng, bool draw_noise = true);

/// Mean total transmit power P = P_CP + E[P_RRH].
double total_power(const ChannelKnowledge& kn, const BeamformerSet& beams);

double achievable_rate(double sinr);

PerUserPowers power_breakdown(const ChannelKnowledge& kn, const BeamformerSet& beams);

}  // namespace cranbf::metrics
