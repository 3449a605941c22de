#include "cranbf/classic_design.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cranbf/sdr_design.hpp"

namespace cranbf::classic {

namespace {

void check_dims(const ChannelKnowledge& kn)
{
    kn.validate();
    if (kn.M() < kn.K())
        throw std::invalid_argument("classic: need M >= K");
}

bool zf_dimension_ok(const ChannelKnowledge& kn) { return kn.NL() * kn.L >= kn.K() * kn.K(); }

/// max_{k,l} |h_k^H W G^H v_l - delta[k - l]|
double zf_residual(const ChannelKnowledge& kn, const CMat& W, const CMat& v)
{
    const CMat e = kn.h_hat.adjoint() * W * kn.G_hat.adjoint() * v;
    return (e - CMat::Identity(e.rows(), e.cols())).cwiseAbs().maxCoeff();
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Residual of V^H V = I in K^2 reals: diagonal, then (Re, Im) of each k < l pair.
RVec gram_residual(const CMat& V)
{
    const int K = static_cast<int>(V.cols());
    const CMat g = V.adjoint() * V;
    RVec r(K * K);
    int row = 0;
    for (int k = 0; k < K; ++k)
        r(row++) = g(k, k).real() - 1.0;
    for (int k = 0; k < K; ++k)
        for (int l = k + 1; l < K; ++l) {
            r(row++) = g(k, l).real();
            r(row++) = g(k, l).imag();
        }
    return r;
}

}  // namespace

CoreResult solve_mrczf_core(const ChannelKnowledge& kn, Rng& rng, const MrcZfOptions& opt)
{
    check_dims(kn);
    CoreResult out;
    if (!zf_dimension_ok(kn)) {
        out.status = DesignStatus::PreconditionFailure;
        out.detail = "K^2 exceeds NL^2";
        return out;
    }
    const int K = kn.K(), M = kn.M();
    const sdr::SelectionMatrix U(kn.N, kn.L);
    const int d = U.cols();

    // v_k = B_k z with z = conj(w0); column p of B_k is h_k(row_p) G(:, col_p).
    std::vector<CMat> B(K, CMat(M, d));
    double scale = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int p = 0; p < d; ++p)
            B[k].col(p) = kn.h_hat(U.w_row(p), k) * kn.G_hat.col(U.w_col(p));
        scale += B[k].squaredNorm();
    }
    scale = std::sqrt(scale);
    if (!(scale > 0.0)) {
        out.detail = "degenerate channel";
        return out;
    }
    for (auto& b : B)
        b /= scale;

    auto beams_of = [&](const CVec& z) {
        CMat V(M, K);
        for (int k = 0; k < K; ++k)
            V.col(k) = B[k] * z;
        return V;
    };

    auto jacobian = [&](const CMat& V) {
        RMat J(K * K, 2 * d);
        int row = 0;
        auto fill = [&](int k, int l, bool take_real, bool take_imag) {
            // d(v_k^H v_l) = conj(dz) . a + conj(b) . dz with a = B_k^H v_l, b = B_l^H v_k
            const CVec a = B[k].adjoint() * V.col(l);
            const CVec b = B[l].adjoint() * V.col(k);
            const CVec dre = a + b.conjugate();
            const CVec dim = cplx(0, -1) * a + cplx(0, 1) * b.conjugate();
            if (take_real) {
                J.row(row).head(d) = dre.real().transpose();
                J.row(row).tail(d) = dim.real().transpose();
                ++row;
            }
            if (take_imag) {
                J.row(row).head(d) = dre.imag().transpose();
                J.row(row).tail(d) = dim.imag().transpose();
                ++row;
            }
        };
        for (int k = 0; k < K; ++k)
            fill(k, k, true, false);
        for (int k = 0; k < K; ++k)
            for (int l = k + 1; l < K; ++l)
                fill(k, l, true, true);
        return J;
    };

    for (int attempt = 0; attempt < opt.max_restarts; ++attempt) {
        CVec z = complex_normal_matrix(rng, d, 1, 1.0);
        {
            const double pw = beams_of(z).squaredNorm();
            if (!(pw > 0.0))
                continue;
            z *= std::sqrt(K / pw);
        }
        CMat V = beams_of(z);
        RVec r = gram_residual(V);
        double cost = r.squaredNorm();
        double lambda = 1e-3;
        for (int it = 0; it < opt.max_iterations && r.cwiseAbs().maxCoeff() > opt.tol; ++it) {
            const RMat J = jacobian(V);
            const RMat JJt = J * J.transpose();
            bool improved = false;
            for (int tries = 0; tries < 30 && !improved; ++tries) {
                RMat sys = JJt;
                sys.diagonal().array() += lambda * std::max(1.0, JJt.diagonal().maxCoeff());
                const RVec step = -J.transpose() * sys.ldlt().solve(r);
                const CVec z_new = z + (step.head(d) + cplx(0, 1) * step.tail(d)).eval();
                const CMat V_new = beams_of(z_new);
                const RVec r_new = gram_residual(V_new);
                const double c_new = r_new.squaredNorm();
                if (c_new < cost) {
                    z = z_new;
                    V = V_new;
                    r = r_new;
                    cost = c_new;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    improved = true;
                } else {
                    lambda *= 10.0;
                }
            }
            if (!improved)
                break;
        }
        if (r.cwiseAbs().maxCoeff() > opt.tol)
            continue;

        CoreSolution sol;
        // Undo the normalization of B: z_true = z / scale.
        const CVec w0 = z.conjugate() / scale;
        sol.W0 = U.to_dense(w0);
        sol.v0 = kn.G_hat * sol.W0.adjoint() * kn.h_hat;
        sol.residual = zf_residual(kn, sol.W0, sol.v0);
        sol.restarts = attempt;
        out.status = DesignStatus::Feasible;
        out.core = std::move(sol);
        return out;
    }
    out.status = DesignStatus::Infeasible;
    out.detail = "quadratic ZF system did not converge within the restart budget";
    return out;
}

CMat svdzf_system(const ChannelKnowledge& kn, const CMat& v0)
{
    const int K = kn.K();
    const sdr::SelectionMatrix U(kn.N, kn.L);
    const int d = U.cols();
    const CMat g = kn.G_hat.adjoint() * v0;  // NL x K
    CMat A(K * K, d);
    // h_k^H W g_l = sum_p conj(h_k(row_p)) w0_p g_l(col_p)
    for (int l = 0; l < K; ++l)
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < d; ++p)
                A(l * K + k, p) = std::conj(kn.h_hat(U.w_row(p), k)) * g(U.w_col(p), l);
    return A;
}

CoreResult solve_svdzf_core(const ChannelKnowledge& kn, double tol)
{
    check_dims(kn);
    CoreResult out;
    if (!zf_dimension_ok(kn)) {
        out.status = DesignStatus::PreconditionFailure;
        out.detail = "K^2 exceeds NL^2";
        return out;
    }
    const int K = kn.K();
    const CMat v0 = sdr::snr_eigen_init(kn, static_cast<double>(K));  // unit-norm columns
    const CMat A = svdzf_system(kn, v0);
    CVec rhs = CVec::Zero(K * K);
    for (int k = 0; k < K; ++k)
        rhs(k * K + k) = 1.0;

    // Row scaling leaves the solution set unchanged and helps the rank decision.
    const double s = A.cwiseAbs().maxCoeff();
    if (!(s > 0.0)) {
        out.detail = "degenerate channel";
        return out;
    }
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(A / s);
    const CVec w0 = cod.solve(rhs) / s;

    const sdr::SelectionMatrix U(kn.N, kn.L);
    CoreSolution sol;
    sol.W0 = U.to_dense(w0);
    sol.v0 = v0;
    sol.residual = zf_residual(kn, sol.W0, v0);
    if (!(sol.residual <= tol)) {
        out.status = DesignStatus::Infeasible;
        out.detail = "linear ZF system is inconsistent";
        return out;
    }
    out.status = DesignStatus::Feasible;
    out.core = std::move(sol);
    return out;
}

PowerSplitCoeffs power_split_coeffs(const ChannelKnowledge& kn, const CMat& W0, const CMat& v0,
                                    const std::vector<double>& thresholds)
{
    const int K = kn.K();
    if (static_cast<int>(thresholds.size()) != K)
        throw std::invalid_argument("power_split: need one threshold per user");
    const auto t = metrics::second_order_terms(kn, &v0, &W0);
    CMat c_sum = CMat::Zero(kn.NL(), kn.NL());
    for (const auto& c : t.C)
        c_sum += c;

    PowerSplitCoeffs pc;
    pc.c.resize(K, 4);
    pc.d.resize(K, 2);
    pc.feasible = true;
    const CMat WWh = W0 * W0.adjoint();
    for (int k = 0; k < K; ++k) {
        const cplx eff = kn.h_hat.col(k).dot(W0 * (kn.G_hat.adjoint() * v0.col(k)));
        pc.c(k, 0) = std::norm(eff);
        pc.c(k, 1) = (t.D[k] * W0 * c_sum * W0.adjoint()).trace().real();
        pc.c(k, 2) = kn.sigma_rrh_sq * (t.D[k] * WWh).trace().real();
        pc.c(k, 3) = kn.sigma_ms_sq;
        const double g = thresholds[k];
        const double den = (1.0 + g) * pc.c(k, 0) - g * pc.c(k, 1);
        if (!(den > 0.0)) {
            pc.feasible = false;
            pc.d(k, 0) = pc.d(k, 1) = std::numeric_limits<double>::infinity();
            continue;
        }
        pc.d(k, 0) = g * pc.c(k, 2) / den;
        pc.d(k, 1) = g * pc.c(k, 3) / den;
    }
    // P = sum_k v_k^H tau0 v_k + sigma_rrh^2 |W|^2 splits into a, ab and b terms.
    pc.d5 = v0.squaredNorm();
    double whole = 0.0;
    for (int k = 0; k < K; ++k)
        whole += v0.col(k).dot(t.tau0 * v0.col(k)).real();
    pc.d6 = whole - pc.d5;
    pc.d7 = kn.sigma_rrh_sq * W0.squaredNorm();
    return pc;
}

PowerSplit minimize_split(const PowerSplitCoeffs& pc)
{
    PowerSplit out;
    out.coeffs = pc;
    if (!pc.feasible)
        return out;
    const int K = static_cast<int>(pc.d.rows());
    auto a_of = [&](double b) {
        double a = 0.0;
        for (int k = 0; k < K; ++k)
            a = std::max(a, pc.d(k, 0) + pc.d(k, 1) / b);
        return a;
    };
    auto power = [&](double a, double b) { return a * pc.d5 + a * b * pc.d6 + b * pc.d7; };

    // Curves d_k1 + d_k2 / b cross at most once per pair; the crossings split b > 0
    // into intervals with a single dominant constraint.
    std::vector<double> cuts;
    for (int k = 0; k < K; ++k)
        for (int j = k + 1; j < K; ++j) {
            const double num = pc.d(j, 1) - pc.d(k, 1), den = pc.d(k, 0) - pc.d(j, 0);
            if (den != 0.0 && num / den > 0.0 && std::isfinite(num / den))
                cuts.push_back(num / den);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double best = std::numeric_limits<double>::infinity(), best_b = 0.0;
    const std::size_t n_int = cuts.size() + 1;
    for (std::size_t s = 0; s < n_int; ++s) {
        const double lo = s == 0 ? 0.0 : cuts[s - 1];
        const double hi = s == cuts.size() ? std::numeric_limits<double>::infinity() : cuts[s];
        const double probe = s == 0 ? (cuts.empty() ? 1.0 : 0.5 * hi) : (std::isinf(hi) ? 2.0 * lo : std::sqrt(lo * hi));
        int dom = 0;
        double dv = -1.0;
        for (int k = 0; k < K; ++k) {
            const double v = pc.d(k, 0) + pc.d(k, 1) / probe;
            if (v > dv) {
                dv = v;
                dom = k;
            }
        }
        const double d1 = pc.d(dom, 0), d2 = pc.d(dom, 1);
        const double slope = d1 * pc.d6 + pc.d7;
        double b = slope > 0.0 ? std::sqrt(d2 * pc.d5 / slope) : hi;
        b = std::clamp(b, lo, hi);
        std::vector<double> cand{b};
        if (lo > 0.0)
            cand.push_back(lo);
        if (std::isfinite(hi))
            cand.push_back(hi);
        for (double bc : cand) {
            if (!(bc > 0.0) || !std::isfinite(bc))
                continue;
            const double p = power(a_of(bc), bc);
            if (p < best) {
                best = p;
                best_b = bc;
            }
        }
    }
    if (!std::isfinite(best))
        return out;
    out.feasible = true;
    out.b = best_b;
    out.a = a_of(best_b);
    out.power = power(out.a, out.b);
    return out;
}

PowerSplit power_split(const ChannelKnowledge& kn, const CMat& W0, const CMat& v0,
                       const std::vector<double>& thresholds)
{
    return minimize_split(power_split_coeffs(kn, W0, v0, thresholds));
}

namespace {

DesignOutcome finish(const ChannelKnowledge& kn, const CoreResult& core, const std::vector<double>& thresholds,
                     std::chrono::steady_clock::time_point t0)
{
    DesignOutcome out;
    out.iterations = core.core ? core.core->restarts + 1 : 0;
    if (!core.core) {
        out.status = core.status;
        out.detail = core.detail;
        out.wall_clock_s = seconds_since(t0);
        return out;
    }
    const PowerSplit ps = power_split(kn, core.core->W0, core.core->v0, thresholds);
    if (!ps.feasible) {
        out.status = DesignStatus::Infeasible;
        out.detail = "power split infeasible: some user's signal cannot outgrow its interference";
        out.wall_clock_s = seconds_since(t0);
        return out;
    }
    const auto beams = metrics::make_beams(std::sqrt(ps.a) * core.core->v0, std::sqrt(ps.b) * core.core->W0, kn.N, kn.L);
    finalize_outcome(kn, beams, thresholds, out);
    out.wall_clock_s = seconds_since(t0);
    return out;
}

}  // namespace

DesignOutcome mrc_zf(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng, const MrcZfOptions& opt)
{
    const auto t0 = std::chrono::steady_clock::now();
    return finish(kn, solve_mrczf_core(kn, rng, opt), thresholds, t0);
}

DesignOutcome svd_zf(const ChannelKnowledge& kn, const std::vector<double>& thresholds)
{
    const auto t0 = std::chrono::steady_clock::now();
    return finish(kn, solve_svdzf_core(kn), thresholds, t0);
}

}  // namespace cranbf::classic
