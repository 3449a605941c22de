#include "cranbf/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace cranbf::metrics {

namespace {

void check_dims(const ChannelKnowledge& kn, const BeamformerSet& beams)
{
    if (beams.v.rows() != kn.M() || beams.v.cols() != kn.K())
        throw std::invalid_argument("beamformers: v must be M x K");
    if (static_cast<int>(beams.W_blocks.size()) != kn.N)
        throw std::invalid_argument("beamformers: expected N RRH blocks");
    for (const auto& b : beams.W_blocks)
        if (b.rows() != kn.L || b.cols() != kn.L)
            throw std::invalid_argument("beamformers: RRH blocks must be L x L");
}

}  // namespace

CMat BeamformerSet::dense_w() const
{
    Eigen::Index n = 0;
    for (const auto& b : W_blocks)
        n += b.rows();
    CMat w = CMat::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : W_blocks) {
        w.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    return w;
}

BeamformerSet make_beams(const CMat& v, const CMat& dense_w, int N, int L)
{
    if (dense_w.rows() != N * L || dense_w.cols() != N * L)
        throw std::invalid_argument("make_beams: W must be NL x NL");
    BeamformerSet b;
    b.v = v;
    b.W_blocks.reserve(N);
    for (int n = 0; n < N; ++n)
        b.W_blocks.push_back(dense_w.block(n * L, n * L, L, L));
    return b;
}

SecondOrderTerms second_order_terms(const ChannelKnowledge& kn, const CMat* v, const CMat* dense_w)
{
    SecondOrderTerms t;
    const int K = kn.K();
    t.sigma1 = kn.sigma1_diag();
    for (int k = 0; k < K; ++k) {
        t.sigma2.push_back(kn.sigma2_diag(k));
        CMat d = kn.h_hat.col(k) * kn.h_hat.col(k).adjoint();
        d.diagonal() += t.sigma2.back().cast<cplx>();
        t.D.push_back(hermitian_part(d));
    }
    if (v != nullptr) {
        for (int k = 0; k < K; ++k) {
            const CVec g = kn.G_hat.adjoint() * v->col(k);
            CMat c = g * g.adjoint();
            c.diagonal() += (v->col(k).squaredNorm() * t.sigma1).cast<cplx>();
            t.C.push_back(hermitian_part(c));
        }
    }
    if (dense_w != nullptr) {
        const CMat whw = dense_w->adjoint() * *dense_w;
        const double tr_sig = (whw.diagonal().real().array() * t.sigma1.array()).sum();
        CMat tau = kn.G_hat * whw * kn.G_hat.adjoint();
        tau.diagonal().array() += 1.0 + tr_sig;
        t.tau0 = hermitian_part(tau);
    }
    return t;
}

double sinr(const ChannelKnowledge& kn, const BeamformerSet& beams, int k)
{
    check_dims(kn, beams);
    if (k < 0 || k >= kn.K())
        throw std::invalid_argument("sinr: user index out of range");
    const CMat W = beams.dense_w();
    const SecondOrderTerms t = second_order_terms(kn, &beams.v, nullptr);

    const cplx eff = kn.h_hat.col(k).dot(W * (kn.G_hat.adjoint() * beams.v.col(k)));
    const double desired = std::norm(eff);
    double interference = 0.0;
    for (int l = 0; l < kn.K(); ++l)
        interference += (t.D[k] * W * t.C[l] * W.adjoint()).trace().real();
    const double noise = kn.sigma_rrh_sq * (t.D[k] * W * W.adjoint()).trace().real() + kn.sigma_ms_sq;
    const double denom = interference - desired + noise;
    if (desired == 0.0)
        return 0.0;
    return desired / denom;
}

std::vector<double> all_sinrs(const ChannelKnowledge& kn, const BeamformerSet& beams)
{
    std::vector<double> out;
    for (int k = 0; k < kn.K(); ++k)
        out.push_back(sinr(kn, beams, k));
    return out;
}

SinrComponents mc_sinr_components(const ChannelKnowledge& kn, const BeamformerSet& beams, int k, long n_samples,
                                  Rng& rng, bool draw_noise)
{
    check_dims(kn, beams);
    if (n_samples < 1)
        throw std::invalid_argument("mc_sinr_oracle: n_samples must be >= 1");
    const int K = kn.K(), M = kn.M(), NL = kn.NL(), L = kn.L;
    const CMat W = beams.dense_w();
    const CMat WH = W.adjoint();
    const cplx a0 = kn.h_hat.col(k).dot(W * (kn.G_hat.adjoint() * beams.v.col(k)));

    RVec sd_g(NL), sd_h(NL);
    for (int n = 0; n < kn.N; ++n) {
        sd_g.segment(n * L, L).setConstant(std::sqrt(kn.sigma1_sq(n) / 2));
        sd_h.segment(n * L, L).setConstant(std::sqrt(kn.sigma2_sq(k, n) / 2));
    }
    const double sd_rrh = std::sqrt(kn.sigma_rrh_sq / 2), sd_ms = std::sqrt(kn.sigma_ms_sq / 2);
    const double sd_s = std::sqrt(0.5);

    std::normal_distribution<double> nd(0.0, 1.0);
    auto cn = [&](double sd) { return cplx(sd * nd(rng), sd * nd(rng)); };

    CMat G(M, NL);
    CVec h(NL), z(NL), s(K), u(NL), p(M);
    double acc_d = 0, acc_1 = 0, acc_2 = 0, acc_n = 0;
    for (long it = 0; it < n_samples; ++it) {
        for (int j = 0; j < NL; ++j)
            for (int i = 0; i < M; ++i)
                G(i, j) = kn.G_hat(i, j) + cn(sd_g(j));
        for (int j = 0; j < NL; ++j)
            h(j) = kn.h_hat(j, k) + cn(sd_h(j));
        for (int l = 0; l < K; ++l)
            s(l) = cn(sd_s);
        // h^H W G^H v = (G W^H h)^H v
        u.noalias() = WH * h;
        p.noalias() = G * u;
        const cplx own = p.dot(beams.v.col(k));
        acc_d += std::norm(a0 * s(k));
        acc_1 += std::norm((own - a0) * s(k));
        cplx other = 0.0;
        for (int l = 0; l < K; ++l)
            if (l != k)
                other += p.dot(beams.v.col(l)) * s(l);
        acc_2 += std::norm(other);
        if (draw_noise) {
            for (int j = 0; j < NL; ++j)
                z(j) = cn(sd_rrh);
            const cplx noise = u.dot(z) + cn(sd_ms);
            acc_n += std::norm(noise);
        }
    }
    const double inv = 1.0 / static_cast<double>(n_samples);
    return {acc_d * inv, acc_1 * inv, acc_2 * inv, acc_n * inv};
}

double mc_sinr_oracle(const ChannelKnowledge& kn, const BeamformerSet& beams, int k, long n_samples, Rng& rng)
{
    return mc_sinr_components(kn, beams, k, n_samples, rng).ratio();
}

double total_power(const ChannelKnowledge& kn, const BeamformerSet& beams)
{
    check_dims(kn, beams);
    const CMat W = beams.dense_w();
    const SecondOrderTerms t = second_order_terms(kn, nullptr, &W);
    double p = 0.0;
    for (int k = 0; k < kn.K(); ++k)
        p += beams.v.col(k).dot(t.tau0 * beams.v.col(k)).real();
    return p + kn.sigma_rrh_sq * W.squaredNorm();
}

double achievable_rate(double sinr)
{
    if (!(sinr >= 0.0))
        throw std::invalid_argument("achievable_rate: SINR must be >= 0");
    return std::log2(1.0 + sinr);
}

PerUserPowers power_breakdown(const ChannelKnowledge& kn, const BeamformerSet& beams)
{
    check_dims(kn, beams);
    const int K = kn.K();
    const CMat W = beams.dense_w();
    const double tr_sig = ((W.adjoint() * W).diagonal().real().array() * kn.sigma1_diag().array()).sum();
    const double amp_noise = kn.sigma_rrh_sq * W.squaredNorm() / K;
    PerUserPowers out{RVec(K), RVec(K), RVec::Constant(K, amp_noise)};
    for (int k = 0; k < K; ++k) {
        const double cp = beams.v.col(k).squaredNorm();
        out.p_cp(k) = cp;
        out.p_rrh(k) = (W * (kn.G_hat.adjoint() * beams.v.col(k))).squaredNorm() + tr_sig * cp;
    }
    return out;
}

}  // namespace cranbf::metrics
