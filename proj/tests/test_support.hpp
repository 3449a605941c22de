#pragma once

// Small random instances shared by the unit tests.

#include "cranbf/linalg.hpp"
#include "cranbf/metrics.hpp"
#include "cranbf/netmodel.hpp"

namespace testsupport {

using namespace cranbf;

/// Unit-scale knowledge with error variances of relative size `err`.
inline netmodel::ChannelKnowledge random_knowledge(Rng& rng, int K, int N, int L, int M, double err = 0.05,
                                                   double noise_rrh = 0.1, double noise_ms = 0.1)
{
    netmodel::ChannelKnowledge kn;
    kn.N = N;
    kn.L = L;
    kn.G_hat = complex_normal_matrix(rng, M, N * L, 1.0);
    kn.h_hat = complex_normal_matrix(rng, N * L, K, 1.0);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    kn.sigma1_sq.resize(N);
    kn.sigma2_sq.resize(K, N);
    for (int n = 0; n < N; ++n) {
        kn.sigma1_sq(n) = err * u(rng);
        for (int k = 0; k < K; ++k)
            kn.sigma2_sq(k, n) = err * u(rng);
    }
    kn.sigma_rrh_sq = noise_rrh;
    kn.sigma_ms_sq = noise_ms;
    return kn;
}

inline metrics::BeamformerSet random_beams(Rng& rng, int K, int N, int L, int M)
{
    metrics::BeamformerSet b;
    b.v = complex_normal_matrix(rng, M, K, 1.0);
    for (int n = 0; n < N; ++n)
        b.W_blocks.push_back(complex_normal_matrix(rng, L, L, 1.0));
    return b;
}

/// Scalar instance: every dimension 1, channels and beams set to the given values.
inline netmodel::ChannelKnowledge scalar_knowledge(cplx h, cplx g, double s1, double s2, double s_rrh, double s_ms)
{
    netmodel::ChannelKnowledge kn;
    kn.N = 1;
    kn.L = 1;
    kn.G_hat = CMat::Constant(1, 1, g);
    kn.h_hat = CMat::Constant(1, 1, h);
    kn.sigma1_sq = RVec::Constant(1, s1);
    kn.sigma2_sq = RMat::Constant(1, 1, s2);
    kn.sigma_rrh_sq = s_rrh;
    kn.sigma_ms_sq = s_ms;
    return kn;
}

inline metrics::BeamformerSet scalar_beams(cplx v, cplx w)
{
    metrics::BeamformerSet b;
    b.v = CMat::Constant(1, 1, v);
    b.W_blocks = {CMat::Constant(1, 1, w)};
    return b;
}

}  // namespace testsupport
