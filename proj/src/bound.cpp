#include "cranbf/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cranbf::bound {

namespace {

struct Ingredients {
    double h_norm_sq;  // |h_k|^2
    double g_norm_sq;  // spectral |G|^2
    double sigma1_min;
    double sigma2_min;
};

Ingredients ingredients(const ChannelKnowledge& kn, int k, double g_norm_sq)
{
    if (k < 0 || k >= kn.K())
        throw std::invalid_argument("bound: user index out of range");
    return {kn.h_hat.col(k).squaredNorm(), g_norm_sq, kn.sigma1_sq.minCoeff(), kn.sigma2_sq.row(k).minCoeff()};
}

double margin_from(const Ingredients& in, double gamma)
{
    const double h_t = in.h_norm_sq + in.sigma2_min;
    const double g_t = in.g_norm_sq + in.sigma1_min;
    return (1.0 + 1.0 / gamma) * in.h_norm_sq * in.g_norm_sq - h_t * g_t;
}

}  // namespace

BoundReport lower_bound(const ChannelKnowledge& kn, const std::vector<double>& thresholds)
{
    kn.validate();
    const int K = kn.K();
    if (static_cast<int>(thresholds.size()) != K)
        throw std::invalid_argument("lower_bound: need one threshold per user");
    for (double g : thresholds)
        if (!(g > 0.0))
            throw std::invalid_argument("lower_bound: thresholds must be positive");

    const double g_norm_sq = spectral_norm_sq(kn.G_hat);
    const double s_rrh = std::sqrt(kn.sigma_rrh_sq), s_ms = std::sqrt(kn.sigma_ms_sq);

    BoundReport r;
    r.g_tilde = g_norm_sq + kn.sigma1_sq.minCoeff();
    r.feasible = true;
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        const Ingredients in = ingredients(kn, k, g_norm_sq);
        const double h_t = in.h_norm_sq + in.sigma2_min;
        const double delta = margin_from(in, thresholds[k]);
        r.h_tilde.push_back(h_t);
        r.delta.push_back(delta);
        if (!(delta > 0.0)) {
            r.feasible = false;
            r.per_user_bound.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double num = h_t * kn.sigma_rrh_sq + r.g_tilde * kn.sigma_ms_sq +
                           2.0 * s_rrh * s_ms * std::sqrt(h_t * r.g_tilde + delta / K);
        r.per_user_bound.push_back(num / delta);
        total += num / delta;
    }
    if (r.feasible)
        r.total_bound = total;
    return r;
}

double feasibility_margin(const ChannelKnowledge& kn, int k, double gamma)
{
    if (!(gamma > 0.0))
        throw std::invalid_argument("feasibility_margin: gamma must be positive");
    return margin_from(ingredients(kn, k, spectral_norm_sq(kn.G_hat)), gamma);
}

double max_threshold(const ChannelKnowledge& kn, int k)
{
    const Ingredients in = ingredients(kn, k, spectral_norm_sq(kn.G_hat));
    const double hg = in.h_norm_sq * in.g_norm_sq;
    const double denom = (in.h_norm_sq + in.sigma2_min) * (in.g_norm_sq + in.sigma1_min) - hg;
    if (!(denom > 0.0))
        return std::numeric_limits<double>::infinity();
    return hg / denom;
}

double ChainStep::relative_margin() const
{
    const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
    return (lhs - rhs) / scale;
}

std::optional<std::string> ChainReport::first_failure(double tol) const
{
    for (const auto& s : steps)
        if (!(s.relative_margin() >= -tol))
            return s.name;
    return std::nullopt;
}

double ChainReport::worst_margin() const
{
    double w = std::numeric_limits<double>::infinity();
    for (const auto& s : steps)
        w = std::min(w, s.relative_margin());
    return w;
}

ChainReport audit_chain(const ChannelKnowledge& kn, const BeamformerSet& beams, const std::vector<double>& thresholds,
                        int k)
{
    const int K = kn.K();
    if (static_cast<int>(thresholds.size()) != K)
        throw std::invalid_argument("audit_chain: need one threshold per user");
    const double gamma = thresholds[k];
    const double s = metrics::sinr(kn, beams, k);
    if (s < gamma * (1.0 - 1e-6))
        throw std::invalid_argument("audit_chain: design does not meet the SINR threshold of user " + std::to_string(k));

    const CMat W = beams.dense_w();
    const CVec& h = kn.h_hat.col(k);
    const CVec v = beams.v.col(k);
    const CVec wgv = W * (kn.G_hat.adjoint() * v);

    const double x1 = std::norm(h.dot(wgv));
    const double x2 = wgv.squaredNorm();
    const double x3 = (W.adjoint() * h).squaredNorm();
    const double x4 = spectral_norm_sq(W);
    const double x5 = v.squaredNorm();

    const double c1 = gamma;
    const double c2 = kn.sigma2_sq.row(k).minCoeff();
    const double c3 = kn.sigma1_sq.minCoeff();
    const double c4 = kn.sigma_rrh_sq;
    const double c5 = kn.sigma_ms_sq;
    const double c6 = kn.sigma_rrh_sq / K;
    const double d1 = h.squaredNorm();
    const double d2 = spectral_norm_sq(kn.G_hat);

    const double y = x2 + x5 + c3 * x4 * x5 + c6 * x4;
    const double a = d1 * d2 / c1 - c2 * d2 - c3 * d1 - c2 * c3;
    const double b = c4 * (d1 + c2);
    const double alpha = 1.0 + c2 / d1;
    const double x = a * x5 - b;

    ChainReport rep;
    rep.user = k;
    rep.y = y;
    auto add = [&](const char* name, double lhs, double rhs) { rep.steps.push_back({name, lhs, rhs}); };

    // SINR constraint with the other users' interference dropped.
    {
        const auto t = metrics::second_order_terms(kn, &beams.v, nullptr);
        const double own = (t.D[k] * W * t.C[k] * W.adjoint()).trace().real();
        const double noise = c4 * (t.D[k] * W * W.adjoint()).trace().real() + c5;
        add("sinr_own_terms", x1, c1 * (own - x1 + noise));
    }
    add("eigen_lower_bounds", x1, c1 * (c2 * x2 + (c3 * x5 + c4) * (x3 + c2 * x4) + c5));
    add("cauchy_schwarz_signal", x2 * d1, x1);
    add("submultiplicative_w", x4 * d1, x3);
    add("submultiplicative_g", x3 * x5 * d2, x1);
    add("signal_via_x3", x1, c1 * (c2 * x2 + (c3 * x5 + c4) * alpha * x3 + c5));
    add("share_via_x3", y, x2 + x5 + (c3 * x5 + c6) * x3 / d1);
    add("x2_lower", (d1 - c1 * c2) * x2, c1 * ((c3 * x5 + c4) * alpha * x3 + c5));
    add("x3_coefficient", (x5 * d2 / c1 - (c3 * x5 + c4) * alpha) * x3, c2 * x2 + c5);
    add("denominator_positive", x, 0.0);
    add("x3_bound", x3, d1 * c5 / x);
    // x2 >= d2 c5 x5 / (a x5 - b); the x5 factor follows from substituting the x3 bound.
    add("x2_bound", x2, d2 * c5 * x5 / x);
    add("share_in_x5", y, x5 + (d2 * c5 * x5 + c5 * (c3 * x5 + c6)) / x);
    const double gt = d2 + c3;
    add("share_in_x", y, (b + c5 * gt + x + (c5 * gt * b + c5 * c6 * a) / x) / a);
    const double closed = (b + c5 * gt + 2.0 * std::sqrt(c5 * gt * b + c5 * c6 * a)) / a;
    add("closed_form", y, closed);
    return rep;
}

double per_user_share_sum(const ChannelKnowledge& kn, const BeamformerSet& beams)
{
    const CMat W = beams.dense_w();
    const double x4 = spectral_norm_sq(W);
    const double c3 = kn.sigma1_sq.minCoeff();
    const double c6 = kn.sigma_rrh_sq / kn.K();
    double sum = 0.0;
    for (int k = 0; k < kn.K(); ++k) {
        const CVec v = beams.v.col(k);
        const double x5 = v.squaredNorm();
        sum += (W * (kn.G_hat.adjoint() * v)).squaredNorm() + x5 + c3 * x4 * x5 + c6 * x4;
    }
    return sum;
}

}  // namespace cranbf::bound
