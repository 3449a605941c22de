#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cranbf/harness.hpp"

using namespace cranbf;
using namespace cranbf::harness;

namespace {

const char* kSmall = R"(
# a small cluster that runs in well under a second per trial
K = 2
N = 2
L = 2
M = 4
gamma_db = 3
trials = 4
seed = 7
timing = off
threads = 1
)";

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TrialRow row(int trial, std::string method, bool feasible, double dbw, double r1 = std::nan(""))
{
    TrialRow r;
    r.trial = trial;
    r.method = std::move(method);
    r.feasible = feasible;
    r.power_dbw = feasible ? dbw : std::nan("");
    r.min_sinr_margin = feasible ? 0.0 : std::nan("");
    r.runtime_s = 1.0;
    r.rank1_ratio = r1;
    return r;
}

}  // namespace

TEST_CASE("config defaults")
{
    const auto cfg = parse_config("");
    CHECK(cfg.network.K == 4);
    CHECK(cfg.network.N == 4);
    CHECK(cfg.network.L == 4);
    CHECK(cfg.network.M == 8);
    CHECK(cfg.network.gamma_db == std::vector<double>(4, 5.0));
    CHECK(cfg.network.gamma_ch == 0.01);
    CHECK(cfg.network.trials == 100);
    CHECK(cfg.averaging == AveragingDomain::Linear);
    CHECK(cfg.methods.size() == 4);
    CHECK(cfg.record_timing);
}

TEST_CASE("config parsing")
{
    const auto cfg = parse_config(kSmall);
    CHECK(cfg.network.K == 2);
    CHECK(cfg.network.M == 4);
    CHECK(cfg.network.gamma_db == std::vector<double>{3.0, 3.0});
    CHECK(cfg.network.seed == 7);
    CHECK_FALSE(cfg.record_timing);

    // K may follow gamma_db in the file; a scalar threshold still covers every user.
    const auto c2 = parse_config("gamma_db: 2\nK: 3  # users\nantenna_gains_dbi = 1, 2, 3\naveraging_domain = db\n");
    CHECK(c2.network.gamma_db == std::vector<double>(3, 2.0));
    CHECK(c2.channel.antenna_gains_dbi[2] == 3.0);
    CHECK(c2.averaging == AveragingDomain::Db);

    const auto c3 = parse_config("K = 2\ngamma_db = 1, 4\nmethods = ao, svdzf\n");
    CHECK(c3.network.gamma_db == std::vector<double>{1.0, 4.0});
    CHECK(c3.methods == std::vector<Method>{Method::AO, Method::SVDZF});

    const auto c4 = parse_config("K = 2\nN = 2\nrrh_positions = 100, 0; -100, 0\nms_positions = 0, 300; 0, -300\n");
    REQUIRE(c4.fixed.rrh.size() == 2);
    CHECK(c4.fixed.ms[1].y == -300.0);
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(parse_config("bogus = 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("K 4"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("K = four"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("K = 0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("K = 3\ngamma_db = 1, 2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("averaging_domain = median"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("methods = ao, simplex"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("shadowing_std_db = 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("M = 2"), std::invalid_argument);  // fewer CP antennas than users
    CHECK_THROWS(load_config("/nonexistent/campaign.cfg"));
}

TEST_CASE("method names")
{
    for (Method m : all_methods())
        CHECK(parse_method(method_name(m)) == m);
    CHECK(std::string(method_name(Method::MRCZF)) == "mrczf");
    CHECK_THROWS_AS(parse_method("bound"), std::invalid_argument);
}

TEST_CASE("per-trial seeds and instances")
{
    const auto cfg = parse_config(kSmall);
    CHECK(trial_seed(7, 0) != trial_seed(7, 1));
    CHECK(trial_seed(7, 0) != trial_seed(8, 0));
    const auto a = trial_knowledge(cfg, 2), b = trial_knowledge(cfg, 2), c = trial_knowledge(cfg, 3);
    CHECK(a.G_hat == b.G_hat);
    CHECK(a.h_hat == b.h_hat);
    CHECK(a.G_hat != c.G_hat);
}

TEST_CASE("trial records are reproducible and respect the bound")
{
    const auto cfg = parse_config(kSmall);
    const auto r1 = run_trial(cfg, 1), r2 = run_trial(cfg, 1);
    CHECK(r1.seed == r2.seed);
    CHECK(r1.geometry_digest == r2.geometry_digest);
    REQUIRE(r1.methods.size() == 4);
    for (std::size_t i = 0; i < r1.methods.size(); ++i) {
        CHECK(r1.methods[i].outcome.status == r2.methods[i].outcome.status);
        CHECK(r1.methods[i].outcome.total_power == r2.methods[i].outcome.total_power);
        CHECK(r1.methods[i].runtime_s == 0.0);
    }
    CHECK(r1.dominance_violations.empty());
    CHECK(r1.find(Method::TSM) != nullptr);
}

TEST_CASE("CSV layout")
{
    CHECK(trials_csv({}) == "trial,method,feasible,power_dbw,min_sinr_margin,runtime_s,rank1_ratio\n");

    const auto cfg = parse_config(kSmall);
    const auto rows = trial_rows({run_trial(cfg, 0)});
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].method == "bound");
    CHECK(rows[1].method == "ao");
    const std::string csv = trials_csv(rows);
    std::istringstream in(csv);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
    }
    CHECK(n == 6);

    // Infeasible rows leave the power column empty.
    const auto bad = trials_csv({row(0, "svdzf", false, 0.0)});
    CHECK(bad.find("0,svdzf,0,,,1,") != std::string::npos);
}

TEST_CASE("CSV round trip")
{
    const auto cfg = parse_config(kSmall);
    const auto res = run_campaign(cfg);
    const std::string csv = trials_csv(trial_rows(res.records));
    const auto parsed = parse_trials_csv(csv);
    CHECK(trials_csv(parsed) == csv);
    CHECK_THROWS(parse_trials_csv("trial,method\n1,ao\n"));
}

TEST_CASE("summary aggregation by hand")
{
    // Two trials; ao feasible in both at 0 and 10 dBW, svdzf feasible once.
    std::vector<TrialRow> rows{row(0, "bound", true, -1.0),   row(0, "ao", true, 0.0, 1e-9),
                               row(0, "svdzf", false, 0.0),   row(1, "bound", true, 5.0),
                               row(1, "ao", true, 10.0, 0.1), row(1, "svdzf", true, 12.0)};
    const auto lin = summarize(rows, AveragingDomain::Linear);
    CHECK(lin.trials == 2);
    const auto* ao = lin.find("ao");
    REQUIRE(ao);
    CHECK(ao->p_success == 100.0);
    CHECK(*ao->mean_power_dbw == doctest::Approx(10.0 * std::log10((1.0 + 10.0) / 2.0)));
    CHECK(ao->sdr_trials == 2);
    CHECK(*ao->rank1_success == doctest::Approx(0.5));
    CHECK(ao->mean_runtime_s == 1.0);
    const auto* svd = lin.find("svdzf");
    CHECK(svd->p_success == 50.0);
    CHECK(*svd->mean_power_dbw == doctest::Approx(12.0));
    CHECK_FALSE(svd->rank1_success.has_value());
    CHECK(*lin.mean_bound_dbw == doctest::Approx(10.0 * std::log10((std::pow(10.0, -0.1) + std::pow(10.0, 0.5)) / 2.0)));
    CHECK(lin.bound_trials == 2);
    CHECK(lin.dominance_violations == 0);

    const auto db = summarize(rows, AveragingDomain::Db);
    CHECK(*db.find("ao")->mean_power_dbw == doctest::Approx(5.0));

    rows.push_back(row(2, "bound", false, 0.0));
    rows.push_back(row(2, "ao", true, 3.0));
    rows.push_back(row(3, "bound", true, 4.0));
    rows.push_back(row(3, "ao", true, 3.0));
    const auto bad = summarize(rows, AveragingDomain::Linear);
    CHECK(bad.dominance_violations == 2);
    CHECK(bad.bound_trials == 3);
}

TEST_CASE("thread count does not change the results")
{
    auto cfg = parse_config(kSmall);
    cfg.methods = {Method::AO, Method::MRCZF, Method::SVDZF};
    const auto a = run_campaign(cfg);
    cfg.threads = 3;
    const auto b = run_campaign(cfg);
    CHECK(trials_csv(trial_rows(a.records)) == trials_csv(trial_rows(b.records)));
    CHECK(summary_json(a.summary, cfg) == summary_json(b.summary, cfg));
    for (const auto& m : a.summary.methods) {
        CHECK(m.p_success >= 0.0);
        CHECK(m.p_success <= 100.0);
        CHECK(m.trials == 4);
    }
    CHECK(a.summary.dominance_violations == 0);
}

TEST_CASE("output files reproduce the summary")
{
    const auto cfg = parse_config(kSmall);
    const auto res = run_campaign(cfg);
    const auto dir = std::filesystem::temp_directory_path() / "cranbf_harness_test";
    std::filesystem::remove_all(dir);
    emit_outputs(res, cfg, dir);
    const std::string csv = slurp(dir / "trials.csv");
    const std::string js = slurp(dir / "summary.json");
    const auto again = summarize(parse_trials_csv(csv), cfg.averaging);
    CHECK(summary_json(again, cfg) == js);
    const auto parsed = parse_summary_json(js);
    CHECK(summary_json(parsed, cfg) == js);
    CHECK(parsed.trials == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep emits one row per value and method")
{
    auto cfg = parse_config(kSmall);
    cfg.network.trials = 2;
    cfg.methods = {Method::SVDZF, Method::MRCZF};
    const auto rows = sweep(cfg, "gamma_db", {"0", "10"});
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].param_value == "0");
    CHECK(rows[0].method == "bound");
    CHECK(rows[3].param_value == "10");
    const std::string csv = sweep_csv(rows, "gamma_db");
    CHECK(csv.rfind("param,param_value,method,mean_power_dbw,p_success,mean_runtime_s\n", 0) == 0);
    CHECK(csv.find("gamma_db,10,svdzf,") != std::string::npos);
    CHECK_THROWS_AS(sweep(cfg, "gamma_db", {}), std::invalid_argument);
    CHECK_THROWS_AS(sweep(cfg, "colour", {"1"}), std::invalid_argument);
}

TEST_CASE("format_number")
{
    CHECK(format_number(std::nan("")).empty());
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-12.3456789012) == "-12.3456789");
}
