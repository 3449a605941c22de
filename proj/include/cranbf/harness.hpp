#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cranbf/bound.hpp"
#include "cranbf/netmodel.hpp"
#include "cranbf/outcome.hpp"
#include "cranbf/sdr_design.hpp"

namespace cranbf::harness {

enum class Method { AO, TSM, MRCZF, SVDZF };
const char* method_name(Method m);
Method parse_method(const std::string& name);
inline const std::vector<Method>& all_methods()
{
    static const std::vector<Method> m{Method::AO, Method::TSM, Method::MRCZF, Method::SVDZF};
    return m;
}

enum class AveragingDomain { Linear, Db };

struct CampaignConfig {
    netmodel::NetworkConfig network;
    netmodel::ChannelParams channel;
    netmodel::FixedPositions fixed;
    AveragingDomain averaging = AveragingDomain::Linear;
    std::vector<Method> methods = all_methods();
    bool record_timing = true;  ///< false writes runtime_s = 0 so outputs are byte-stable
    int threads = 0;            ///< 0 picks the hardware concurrency
    sdr::SdrOptions sdr;        ///< not configurable from files

    void validate() const;
};

/// Applies one `key = value` setting; throws std::invalid_argument on unknown keys or bad values.
void set_parameter(CampaignConfig& cfg, const std::string& key, const std::string& value);

/// Flat key-value text: one `key = value` per line, `#` starts a comment.
CampaignConfig parse_config(const std::string& text);
CampaignConfig load_config(const std::filesystem::path& path);

struct MethodResult {
    Method method = Method::AO;
    DesignOutcome outcome;
    double runtime_s = 0.0;
};

struct TrialRecord {
    int index = 0;
    std::uint64_t seed = 0;
    std::string geometry_digest;
    std::vector<double> thresholds;  ///< linear
    bound::BoundReport bound;
    std::vector<MethodResult> methods;
    /// Feasible methods whose power falls below the bound (should stay empty).
    std::vector<std::string> dominance_violations;

    const MethodResult* find(Method m) const;
};

/// Everything a trial needs besides the config: reproducible from (seed, index) alone.
std::uint64_t trial_seed(std::uint64_t campaign_seed, int index);

/// Channel knowledge of one trial (exposed so tests and tools can rebuild instances).
netmodel::ChannelKnowledge trial_knowledge(const CampaignConfig& cfg, int index, netmodel::Geometry* geometry = nullptr);

TrialRecord run_trial(const CampaignConfig& cfg, int index);

/// One line of trials.csv. Missing values are NaN and written as empty fields.
struct TrialRow {
    int trial = 0;
    std::string method;
    bool feasible = false;
    double power_dbw = 0.0;
    double min_sinr_margin = 0.0;  ///< min_k 10 log10(SINR_k / gamma_k), dB
    double runtime_s = 0.0;
    double rank1_ratio = 0.0;      ///< worst lambda_2/lambda_1 over the method's SDR solves
};

std::vector<TrialRow> trial_rows(const std::vector<TrialRecord>& records);

struct MethodSummary {
    std::string method;
    int trials = 0;
    int feasible = 0;
    double p_success = 0.0;                 ///< percent
    std::optional<double> mean_power_dbw;   ///< over the method's feasible trials
    double mean_runtime_s = 0.0;
    int sdr_trials = 0;                     ///< rows carrying a rank-1 ratio
    std::optional<double> rank1_success;    ///< fraction of those with ratio <= 1e-3
};

constexpr double kRank1Tolerance = 1e-3;

struct CampaignSummary {
    int trials = 0;
    std::string averaging = "linear";
    std::vector<MethodSummary> methods;           ///< the bound appears as method "bound"
    std::optional<double> mean_bound_dbw;
    int bound_trials = 0;                         ///< trials with every margin positive
    int dominance_violations = 0;

    const MethodSummary* find(const std::string& method) const;
};

/// Pure aggregation over CSV rows; run_campaign and the CSV round trip both use it.
CampaignSummary summarize(const std::vector<TrialRow>& rows, AveragingDomain averaging);

struct CampaignResult {
    CampaignSummary summary;
    std::vector<TrialRecord> records;
};

using ProgressFn = std::function<void(int done, int total)>;

/// Runs cfg.network.trials trials on a thread pool; results do not depend on scheduling.
CampaignResult run_campaign(const CampaignConfig& cfg, const ProgressFn& progress = {});

struct SweepRow {
    std::string param_value;
    std::string method;
    std::optional<double> mean_power_dbw;
    double p_success = 0.0;
    double mean_runtime_s = 0.0;
};

/// One campaign per value with everything else fixed. `param` is any config key
/// (gamma_db, K, N, L, M, gamma_ch, ...); changing K resizes a scalar gamma_db.
std::vector<SweepRow> sweep(const CampaignConfig& cfg, const std::string& param, const std::vector<std::string>& values,
                            const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Files

std::string config_json(const CampaignConfig& cfg);
std::string summary_json(const CampaignSummary& summary, const CampaignConfig& cfg);
std::string trials_csv(const std::vector<TrialRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& param);

std::vector<TrialRow> parse_trials_csv(const std::string& text);
CampaignSummary parse_summary_json(const std::string& text);

/// Writes summary.json and trials.csv into out_dir (created if needed).
void emit_outputs(const CampaignResult& result, const CampaignConfig& cfg, const std::filesystem::path& out_dir);
void emit_sweep(const std::vector<SweepRow>& rows, const std::string& param, const std::filesystem::path& out_dir);

/// 9 significant digits; NaN becomes an empty string.
std::string format_number(double x);

}  // namespace cranbf::harness
