#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cranbf/bound.hpp"
#include "cranbf/sdr_design.hpp"
#include "test_support.hpp"

using namespace cranbf;
using namespace cranbf::sdr;
using namespace testsupport;

namespace {

double quad(const CMat& a, const CVec& x) { return x.dot(a * x).real(); }

double min_sinr_ratio(const ChannelKnowledge& kn, const BeamformerSet& b, const std::vector<double>& th)
{
    double r = 1e300;
    for (int k = 0; k < kn.K(); ++k)
        r = std::min(r, metrics::sinr(kn, b, k) / th[k]);
    return r;
}

}  // namespace

TEST_CASE("selection matrix layout")
{
    const SelectionMatrix one(1, 3);
    CHECK(one.dense().isApprox(RMat::Identity(9, 9)));

    const SelectionMatrix u(2, 1);
    CHECK(u.rows() == 4);
    CHECK(u.cols() == 2);
    CHECK(u.vec_index(0) == 0);
    CHECK(u.vec_index(1) == 3);

    const SelectionMatrix s(3, 2);
    const RMat d = s.dense();
    CHECK((d.transpose() * d).isApprox(RMat::Identity(s.cols(), s.cols())));
    // w0 stacks the vecs of the diagonal blocks.
    CHECK(s.w_row(2 * 4 + 1 * 2 + 0) == 2 * 2 + 0);
    CHECK(s.w_col(2 * 4 + 1 * 2 + 0) == 2 * 2 + 1);
}

TEST_CASE("selection matrix round trip")
{
    Rng rng(1);
    const int N = 3, L = 2;
    const SelectionMatrix s(N, L);
    const auto b = random_beams(rng, 2, N, L, 3);
    const CMat W = b.dense_w();
    const CVec w0 = s.to_w0(W);
    CHECK(s.to_dense(w0) == W);
    CHECK((s.dense().cast<cplx>() * w0 - vec(W)).norm() == 0.0);
    const auto back = s.to_beams(b.v, w0);
    for (int n = 0; n < N; ++n)
        CHECK(back.W_blocks[n] == b.W_blocks[n]);
    CHECK_THROWS_AS(s.to_dense(CVec::Zero(3)), std::invalid_argument);
}

TEST_CASE("projected Kronecker product matches the explicit one")
{
    Rng rng(2);
    for (int N : {1, 2, 3})
        for (int L : {1, 2}) {
            const SelectionMatrix s(N, L);
            const int nl = N * L;
            const CMat a = complex_normal_matrix(rng, nl, nl, 1.0), b = complex_normal_matrix(rng, nl, nl, 1.0);
            const CMat u = s.dense().cast<cplx>();
            const CMat ref = u.adjoint() * kron_t(a, b) * u;
            CHECK((s.project_kron(a, b) - ref).norm() < 1e-12 * ref.norm());
        }
}

TEST_CASE("Kronecker identities behind the access relaxation")
{
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        const int K = 3, N = 2, L = 2, M = 4;
        const auto kn = random_knowledge(rng, K, N, L, M);
        const auto b = random_beams(rng, K, N, L, M);
        const CMat W = b.dense_w();
        const CVec w = vec(W);
        const auto terms = metrics::second_order_terms(kn, &b.v, nullptr);
        for (int k = 0; k < K; ++k) {
            const auto p = p1_terms(kn, b.v, k);
            const CVec g = kn.G_hat.adjoint() * b.v.col(k);
            const double x1 = std::norm(kn.h_hat.col(k).dot(W * g));
            CHECK(quad(p.T, w) == doctest::Approx(x1).epsilon(1e-10));
            for (int l = 0; l < K; ++l) {
                const double ref = (terms.D[k] * W * terms.C[l] * W.adjoint()).trace().real();
                CHECK(quad(p.F[l], w) == doctest::Approx(ref).epsilon(1e-10));
            }
            CHECK(quad(p.E, w) == doctest::Approx((terms.D[k] * W * W.adjoint()).trace().real()).epsilon(1e-10));
            CHECK(quad(p.J, w) == doctest::Approx((W * terms.C[k] * W.adjoint()).trace().real()).epsilon(1e-10));
        }
    }
}

TEST_CASE("access relaxation reproduces power and SINR margins")
{
    Rng rng(4);
    for (int t = 0; t < 5; ++t) {
        const int K = 2, N = 2, L = 2, M = 3;
        const auto kn = random_knowledge(rng, K, N, L, M);
        const auto b = random_beams(rng, K, N, L, M);
        const std::vector<double> th{0.7, 1.9};
        const auto p = assemble_p1(kn, b.v, th);
        const CVec w0 = SelectionMatrix(N, L).to_w0(b.dense_w());
        CHECK(quad(p.objective[0], w0) + p.objective_offset ==
              doctest::Approx(metrics::total_power(kn, b)).epsilon(1e-10));
        CHECK(p.objective_offset == doctest::Approx(b.v.squaredNorm()).epsilon(1e-14));
        for (int k = 0; k < K; ++k) {
            // (1+g) x1 - g (everything else) - g s_ms = x1 (1 - g / SINR)
            const CVec g = kn.G_hat.adjoint() * b.v.col(k);
            const double x1 = std::norm(kn.h_hat.col(k).dot(b.dense_w() * g));
            const double ref = x1 * (1.0 - th[k] / metrics::sinr(kn, b, k));
            const double got = quad(p.constraints[k].blocks[0], w0) - p.constraints[k].rhs;
            CHECK(got == doctest::Approx(ref).epsilon(1e-9).scale(x1));
        }
    }
}

TEST_CASE("fronthaul relaxation reproduces power and SINR margins")
{
    Rng rng(5);
    for (int t = 0; t < 5; ++t) {
        const int K = 3, N = 2, L = 2, M = 4;
        const auto kn = random_knowledge(rng, K, N, L, M);
        const auto b = random_beams(rng, K, N, L, M);
        const std::vector<double> th{0.5, 1.0, 2.0};
        const auto p = assemble_p2(kn, b.dense_w(), th);
        REQUIRE(p.objective.size() == 3);
        std::vector<CVec> x;
        for (int k = 0; k < K; ++k)
            x.push_back(b.v.col(k));
        double obj = p.objective_offset;
        for (int k = 0; k < K; ++k)
            obj += quad(p.objective[k], x[k]);
        CHECK(obj == doctest::Approx(metrics::total_power(kn, b)).epsilon(1e-10));

        const auto terms = p2_terms(kn, b.dense_w());
        for (int k = 0; k < K; ++k) {
            double q = 0.0;
            for (int l = 0; l < K; ++l)
                q += quad(p.constraints[k].blocks[l], x[l]);
            const CVec g = kn.G_hat.adjoint() * b.v.col(k);
            const double x1 = std::norm(kn.h_hat.col(k).dot(b.dense_w() * g));
            CHECK(quad(terms.A[k], x[k]) == doctest::Approx(x1).epsilon(1e-10));
            CHECK(q - p.constraints[k].rhs ==
                  doctest::Approx(x1 * (1.0 - th[k] / metrics::sinr(kn, b, k))).epsilon(1e-9).scale(x1));
        }
    }
}

TEST_CASE("zero relay matrix leaves only the CP power")
{
    Rng rng(6);
    const auto kn = random_knowledge(rng, 2, 2, 2, 3);
    const auto b = random_beams(rng, 2, 2, 2, 3);
    const auto p = assemble_p1(kn, b.v, {1.0, 1.0});
    const CVec zero = CVec::Zero(8);
    CHECK(quad(p.objective[0], zero) + p.objective_offset == doctest::Approx(b.v.squaredNorm()));
}

TEST_CASE("scalar access step is tight")
{
    // h = 1, G = 2, v = 1: SINR(y) = 4 y / (c2 y + 0.101 y + 0.1) with c2 = 1.01 * 4.01 - 4.
    const auto kn = scalar_knowledge(1.0, 2.0, 0.01, 0.01, 0.1, 0.1);
    const CMat v = CMat::Constant(1, 1, 1.0);
    const double c2 = 1.01 * 4.01 - 4.0;
    Rng rng(7);
    const double gamma = 2.0;
    const auto s = solve_access(kn, v, {gamma}, rng);
    REQUIRE(s.ok());
    CHECK_FALSE(s.randomized);
    const double y = gamma * 0.1 / (4.0 - gamma * (c2 + 0.101));
    CHECK(std::norm(s.beams.W_blocks[0](0, 0)) == doctest::Approx(y).epsilon(1e-8));
    CHECK(metrics::sinr(kn, s.beams, 0) == doctest::Approx(gamma).epsilon(1e-9));
    CHECK(s.power == doctest::Approx(1.0 + y * (4.01 + 0.1)).epsilon(1e-8));
    CHECK(s.relaxed_power <= s.power * (1.0 + 1e-7));

    const double g_sup = 4.0 / (c2 + 0.101);
    CHECK(solve_access(kn, v, {g_sup * 1.01}, rng).status == DesignStatus::Infeasible);
}

TEST_CASE("single-user fronthaul relaxation is tight")
{
    Rng rng(8);
    for (int t = 0; t < 5; ++t) {
        const auto kn = random_knowledge(rng, 1, 2, 2, 3);
        const auto b = random_beams(rng, 1, 2, 2, 3);
        const auto s = solve_fronthaul(kn, b, {1.0}, rng);
        REQUIRE(s.ok());
        CHECK(s.eig_ratio < conic::kRank1Threshold);
        CHECK_FALSE(s.randomized);
        CHECK(s.power == doctest::Approx(s.relaxed_power).epsilon(1e-6));
        CHECK(metrics::sinr(kn, s.beams, 0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.beams.W_blocks[0] == b.W_blocks[0]);
    }
}

TEST_CASE("eigen initialization maximizes the received SNR")
{
    Rng rng(9);
    const int K = 3, M = 5;
    const auto kn = random_knowledge(rng, K, 2, 2, M);
    const double p = 2.0;
    const CMat v = snr_eigen_init(kn, p);
    CHECK((v.adjoint() * v - (p / K) * CMat::Identity(K, K)).norm() < 1e-12);
    const CMat gg = kn.G_hat * kn.G_hat.adjoint();
    const double got = (v.adjoint() * gg * v).trace().real() / (p / K);
    for (int t = 0; t < 1000; ++t) {
        const CMat q = Eigen::HouseholderQR<CMat>(complex_normal_matrix(rng, M, K, 1.0)).householderQ() *
                       CMat::Identity(M, K);
        CHECK((q.adjoint() * gg * q).trace().real() <= got * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(snr_eigen_init(kn, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(snr_eigen_init(random_knowledge(rng, 4, 2, 2, 3), 1.0), std::invalid_argument);
}

TEST_CASE("initialization grows the CP power geometrically")
{
    Rng rng(10);
    int grew = 0;
    for (int t = 0; t < 6; ++t) {
        auto kn = random_knowledge(rng, 2, 2, 2, 3, 0.01, 0.1, 0.1);
        // A weak fronthaul forces several power increments before the access step works.
        kn.G_hat *= 0.3;
        const std::vector<double> th{1.0, 1.0};
        const auto init = algorithm0(kn, th, rng);
        if (init.status != DesignStatus::Feasible)
            continue;
        CHECK(init.p_cp == doctest::Approx(std::pow(1.05, init.attempts - 1)).epsilon(1e-12));
        CHECK(init.step.beams.v.squaredNorm() == doctest::Approx(init.p_cp).epsilon(1e-12));
        CHECK(min_sinr_ratio(kn, init.step.beams, th) >= 1.0 - 1e-9);
        grew += init.attempts > 1;
    }
    CHECK(grew > 0);
}

TEST_CASE("non-positive margins stop the designs early")
{
    Rng rng(11);
    const auto kn = random_knowledge(rng, 2, 2, 2, 3);
    const std::vector<double> th{1e6, 1.0};
    CHECK(algorithm0(kn, th, rng).attempts == 0);
    CHECK(alternating_optimization(kn, th, rng).status == DesignStatus::Infeasible);
    CHECK(total_snr_max(kn, th, rng).status == DesignStatus::Infeasible);

    SdrOptions opt;
    opt.margin_precheck = false;
    opt.t_max_init = 3;
    const auto init = algorithm0(kn, th, rng, opt);
    CHECK(init.attempts == 3);
    CHECK(init.status == DesignStatus::Infeasible);
    CHECK_THROWS_AS(algorithm0(kn, {1.0}, rng), std::invalid_argument);
}

TEST_CASE("alternating optimization never increases the power")
{
    Rng rng(12);
    int solved = 0;
    for (int t = 0; t < 6; ++t) {
        const auto kn = random_knowledge(rng, 2, 2, 2, 3, 0.01, 0.1, 0.1);
        const std::vector<double> th{1.0, 2.0};
        const auto out = alternating_optimization(kn, th, rng);
        if (!out.feasible())
            continue;
        ++solved;
        for (std::size_t i = 1; i < out.power_trace.size(); ++i)
            CHECK(out.power_trace[i] <= out.power_trace[i - 1] * (1.0 + 1e-12));
        CHECK(out.total_power == doctest::Approx(out.power_trace.back()).epsilon(1e-12));
        CHECK(out.total_power >= *bound::lower_bound(kn, th).total_bound * (1.0 - 1e-9));
        CHECK(min_sinr_ratio(kn, out.beams, th) >= 1.0 - kSinrVerifyTol);
        CHECK(out.iterations >= 1);
        CHECK(out.iterations <= 100);
        CHECK_FALSE(out.rank1_ratios.empty());
    }
    CHECK(solved >= 3);
}

TEST_CASE("total-SNR schedule stops at the first power increase")
{
    Rng rng(13);
    int solved = 0;
    for (int t = 0; t < 6; ++t) {
        const auto kn = random_knowledge(rng, 2, 2, 2, 3, 0.01, 0.1, 0.1);
        const std::vector<double> th{1.0, 1.0};
        const auto out = total_snr_max(kn, th, rng);
        if (!out.feasible())
            continue;
        ++solved;
        const auto& tr = out.power_trace;
        CHECK(static_cast<int>(tr.size()) == out.iterations);
        const double best_seen = *std::min_element(tr.begin(), tr.end(), [](double a, double b) {
            return (a > 0.0 ? a : 1e300) < (b > 0.0 ? b : 1e300);
        });
        if (out.iterations < 100) {
            const std::size_t n = tr.size();
            REQUIRE(n >= 2);
            CHECK(tr[n - 1] > tr[n - 2]);
            CHECK(tr[n - 2] > 0.0);
            CHECK(out.total_power == doctest::Approx(tr[n - 2]).epsilon(1e-12));
        }
        else {
            CHECK(out.total_power == doctest::Approx(best_seen).epsilon(1e-12));
        }
        CHECK(out.total_power >= *bound::lower_bound(kn, th).total_bound * (1.0 - 1e-9));
        CHECK(min_sinr_ratio(kn, out.beams, th) >= 1.0 - kSinrVerifyTol);
    }
    CHECK(solved >= 3);
}

TEST_CASE("designs are reproducible from the seed")
{
    Rng r0(14);
    const auto kn = random_knowledge(r0, 2, 2, 2, 3, 0.01, 0.1, 0.1);
    Rng a(99), b(99);
    const auto o1 = alternating_optimization(kn, {1.0, 1.0}, a);
    const auto o2 = alternating_optimization(kn, {1.0, 1.0}, b);
    CHECK(o1.status == o2.status);
    CHECK(o1.total_power == o2.total_power);
    CHECK(o1.power_trace == o2.power_trace);
}
