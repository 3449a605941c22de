#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cranbf/bound.hpp"
#include "cranbf/harness.hpp"

namespace {

using namespace cranbf;

std::vector<std::string> split_values(const std::string& s)
{
    // Values are comma-separated, except that a per-user gamma_db list may be written
    // with '/' between users, e.g. "0/5/5/10,5".
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c == '/' ? ',' : c;
        }
    }
    out.push_back(cur);
    return out;
}

void print_summary(const harness::CampaignSummary& s)
{
    std::printf("%-8s %7s %10s %12s %10s\n", "method", "succ%", "P [dBW]", "runtime [s]", "rank-1");
    for (const auto& m : s.methods) {
        const std::string p = m.mean_power_dbw ? harness::format_number(*m.mean_power_dbw) : "-";
        const std::string r1 = m.rank1_success ? harness::format_number(*m.rank1_success) : "-";
        std::printf("%-8s %7.1f %10s %12.4f %10s\n", m.method.c_str(), m.p_success, p.c_str(), m.mean_runtime_s, r1.c_str());
    }
    if (s.dominance_violations)
        std::printf("WARNING: %d feasible designs fell below the lower bound\n", s.dominance_violations);
}

harness::ProgressFn progress_printer(bool quiet)
{
    if (quiet)
        return {};
    return [](int done, int total) {
        std::fprintf(stderr, "\r%d/%d trials", done, total);
        if (done == total)
            std::fprintf(stderr, "\n");
    };
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint fronthaul/access beamforming for C-RAN clusters: Monte Carlo campaigns and lower bounds"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run a Monte Carlo campaign and write summary.json / trials.csv");
    run->add_option("--config", config_path, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--trials", trials, "Override the trial count");
    run->add_option("--seed", seed, "Override the campaign seed");
    run->add_flag("--quiet", quiet, "Suppress progress output");

    std::string param, values;
    auto* sw = app.add_subcommand("sweep", "One campaign per parameter value; writes sweep.csv");
    sw->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    sw->add_option("--param", param, "Config key to vary (gamma_db, K, N, L, M, gamma_ch, ...)")->required();
    sw->add_option("--values", values, "Comma-separated values")->required();
    sw->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sw->add_option("--trials", trials, "Override the trial count");
    sw->add_option("--seed", seed, "Override the campaign seed");
    sw->add_flag("--quiet", quiet, "Suppress progress output");

    int bound_trial = -1;
    auto* bd = app.add_subcommand("bound", "Evaluate the closed-form lower bound only (no solvers)");
    bd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    bd->add_option("--trial", bound_trial, "Print per-user details for this trial index");
    bd->add_option("--trials", trials, "Override the trial count");
    bd->add_option("--seed", seed, "Override the campaign seed");

    CLI11_PARSE(app, argc, argv);

    try {
        harness::CampaignConfig cfg = harness::load_config(config_path);
        if (trials)
            cfg.network.trials = *trials;
        if (seed)
            cfg.network.seed = *seed;
        cfg.validate();

        if (*run) {
            const auto res = harness::run_campaign(cfg, progress_printer(quiet));
            harness::emit_outputs(res, cfg, out_dir);
            print_summary(res.summary);
            std::printf("wrote %s/summary.json and %s/trials.csv\n", out_dir.c_str(), out_dir.c_str());
        } else if (*sw) {
            const auto rows = harness::sweep(cfg, param, split_values(values), progress_printer(quiet));
            harness::emit_sweep(rows, param, out_dir);
            std::cout << harness::sweep_csv(rows, param);
        } else if (*bd) {
            const auto th = cfg.network.thresholds_linear();
            double acc = 0.0;
            int feasible = 0;
            const int first = bound_trial >= 0 ? bound_trial : 0;
            const int last = bound_trial >= 0 ? bound_trial + 1 : cfg.network.trials;
            std::printf("trial,feasible,bound_dbw,min_delta\n");
            for (int i = first; i < last; ++i) {
                const auto kn = harness::trial_knowledge(cfg, i);
                const auto br = bound::lower_bound(kn, th);
                double dmin = br.delta[0];
                for (double d : br.delta)
                    dmin = std::min(dmin, d);
                std::printf("%d,%d,%s,%s\n", i, br.feasible ? 1 : 0,
                            br.total_bound ? harness::format_number(to_db(*br.total_bound)).c_str() : "",
                            harness::format_number(dmin).c_str());
                if (bound_trial >= 0)
                    for (int k = 0; k < kn.K(); ++k)
                        std::printf("  user %d: delta=%s bound=%s W, max threshold=%s dB\n", k,
                                    harness::format_number(br.delta[k]).c_str(),
                                    harness::format_number(br.per_user_bound[k]).c_str(),
                                    harness::format_number(to_db(bound::max_threshold(kn, k))).c_str());
                if (br.total_bound) {
                    acc += *br.total_bound;
                    ++feasible;
                }
            }
            if (feasible)
                std::printf("# mean bound over %d trials with positive margins: %s dBW\n", feasible,
                            harness::format_number(to_db(acc / feasible)).c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
