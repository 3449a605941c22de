#include "cranbf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <array>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cranbf/classic_design.hpp"

namespace cranbf::harness {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    for (const auto& item : split(v, ','))
        out.push_back(parse_double(key, item));
    return out;
}

std::vector<netmodel::Point> parse_points(const std::string& key, const std::string& v)
{
    std::vector<netmodel::Point> out;
    if (v.empty())
        return out;
    for (const auto& item : split(v, ';')) {
        const auto xy = parse_list(key, item);
        if (xy.size() != 2)
            throw std::invalid_argument("config: '" + key + "' expects 'x,y; x,y; ...'");
        out.push_back({xy[0], xy[1]});
    }
    return out;
}

template <std::size_t N>
std::array<double, N> parse_array(const std::string& key, const std::string& v)
{
    const auto xs = parse_list(key, v);
    if (xs.size() != N)
        throw std::invalid_argument("config: '" + key + "' expects " + std::to_string(N) + " values");
    std::array<double, N> out{};
    std::copy(xs.begin(), xs.end(), out.begin());
    return out;
}

std::string hex64(std::uint64_t x)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string geometry_digest(const netmodel::Geometry& g)
{
    // FNV-1a over the exact bit patterns of every coordinate.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& p : g.rrh_positions) {
        feed(p.x);
        feed(p.y);
    }
    for (const auto& p : g.ms_positions) {
        feed(p.x);
        feed(p.y);
    }
    return hex64(h);
}

double parse_field(const std::string& s) { return s.empty() ? kNaN : std::stod(s); }

json opt_number(const std::optional<double>& x) { return x ? json(std::stod(format_number(*x))) : json(nullptr); }
json number(double x) { return std::isfinite(x) ? json(std::stod(format_number(x))) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out)
        throw std::runtime_error("failed while writing '" + path.string() + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

const char* method_name(Method m)
{
    switch (m) {
    case Method::AO: return "ao";
    case Method::TSM: return "tsm";
    case Method::MRCZF: return "mrczf";
    case Method::SVDZF: return "svdzf";
    }
    return "unknown";
}

Method parse_method(const std::string& name)
{
    for (Method m : all_methods())
        if (name == method_name(m))
            return m;
    throw std::invalid_argument("unknown method '" + name + "' (expected ao, tsm, mrczf or svdzf)");
}

void CampaignConfig::validate() const
{
    network.validate();
    if (!(channel.cell_radius_m > 0.0) || !(channel.min_distance_m >= 0.0))
        throw std::invalid_argument("config: cell_radius_m must be > 0 and min_distance_m >= 0");
    if (!(channel.bandwidth_hz > 0.0))
        throw std::invalid_argument("config: bandwidth_hz must be > 0");
    for (double s : channel.shadowing_std_db)
        if (!(s >= 0.0))
            throw std::invalid_argument("config: shadowing_std_db must be >= 0");
    if (methods.empty())
        throw std::invalid_argument("config: at least one method is required");
    if (threads < 0)
        throw std::invalid_argument("config: threads must be >= 0");
}

void set_parameter(CampaignConfig& cfg, const std::string& key_in, const std::string& value_in)
{
    const std::string key = trim(key_in), v = trim(value_in);
    auto& net = cfg.network;
    auto& ch = cfg.channel;
    auto positive_int = [&](const std::string& k) {
        const long long x = parse_int(k, v);
        if (x < 1 || x > 1'000'000)
            throw std::invalid_argument("config: '" + k + "' must be a positive integer");
        return static_cast<int>(x);
    };

    if (key == "K") {
        const int K = positive_int(key);
        // A uniform threshold list follows K; a per-user list must be re-specified.
        const bool uniform = !net.gamma_db.empty() &&
                             std::all_of(net.gamma_db.begin(), net.gamma_db.end(), [&](double g) { return g == net.gamma_db[0]; });
        if (uniform)
            net.gamma_db.assign(K, net.gamma_db[0]);
        net.K = K;
    } else if (key == "N") {
        net.N = positive_int(key);
    } else if (key == "L") {
        net.L = positive_int(key);
    } else if (key == "M") {
        net.M = positive_int(key);
    } else if (key == "gamma_db") {
        const auto xs = parse_list(key, v);
        if (xs.size() == 1)
            net.gamma_db.assign(net.K, xs[0]);
        else
            net.gamma_db = xs;
    } else if (key == "gamma_ch") {
        net.gamma_ch = parse_double(key, v);
    } else if (key == "trials") {
        net.trials = positive_int(key);
    } else if (key == "seed") {
        const long long s = parse_int(key, v);
        if (s < 0)
            throw std::invalid_argument("config: seed must be >= 0");
        net.seed = static_cast<std::uint64_t>(s);
    } else if (key == "cell_radius_m") {
        ch.cell_radius_m = parse_double(key, v);
    } else if (key == "min_distance_m") {
        ch.min_distance_m = parse_double(key, v);
    } else if (key == "bandwidth_hz") {
        ch.bandwidth_hz = parse_double(key, v);
    } else if (key == "nsd_dbm_hz") {
        ch.nsd_dbm_hz = parse_double(key, v);
    } else if (key == "nf_rrh_db") {
        ch.nf_rrh_db = parse_double(key, v);
    } else if (key == "nf_ms_db") {
        ch.nf_ms_db = parse_double(key, v);
    } else if (key == "antenna_gains_dbi") {
        ch.antenna_gains_dbi = parse_array<3>(key, v);
    } else if (key == "shadowing_std_db") {
        ch.shadowing_std_db = parse_array<2>(key, v);
    } else if (key == "averaging_domain") {
        if (v == "linear")
            cfg.averaging = AveragingDomain::Linear;
        else if (v == "db")
            cfg.averaging = AveragingDomain::Db;
        else
            throw std::invalid_argument("config: averaging_domain must be 'linear' or 'db'");
    } else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : split(v, ','))
            cfg.methods.push_back(parse_method(m));
    } else if (key == "timing") {
        if (v == "wall")
            cfg.record_timing = true;
        else if (v == "off")
            cfg.record_timing = false;
        else
            throw std::invalid_argument("config: timing must be 'wall' or 'off'");
    } else if (key == "threads") {
        const long long t = parse_int(key, v);
        if (t < 0)
            throw std::invalid_argument("config: threads must be >= 0");
        cfg.threads = static_cast<int>(t);
    } else if (key == "rrh_positions") {
        cfg.fixed.rrh = parse_points(key, v);
    } else if (key == "ms_positions") {
        cfg.fixed.ms = parse_points(key, v);
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

CampaignConfig parse_config(const std::string& text)
{
    CampaignConfig cfg;
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find_first_of("=:");
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    // K first so that a scalar gamma_db expands to the right length wherever it appears.
    std::stable_partition(entries.begin(), entries.end(), [](const auto& e) { return e.first == "K"; });
    for (const auto& [k, v] : entries)
        set_parameter(cfg, k, v);
    cfg.validate();
    return cfg;
}

CampaignConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Trials

const MethodResult* TrialRecord::find(Method m) const
{
    for (const auto& r : methods)
        if (r.method == m)
            return &r;
    return nullptr;
}

std::uint64_t trial_seed(std::uint64_t campaign_seed, int index)
{
    return mix_seed(campaign_seed, static_cast<std::uint64_t>(index));
}

namespace {

enum Stream : std::uint64_t { kGeometry = 0, kChannels = 1, kErrors = 2, kMethodBase = 16 };

}  // namespace

netmodel::ChannelKnowledge trial_knowledge(const CampaignConfig& cfg, int index, netmodel::Geometry* geometry)
{
    const std::uint64_t ts = trial_seed(cfg.network.seed, index);
    Rng geo_rng(mix_seed(ts, kGeometry)), ch_rng(mix_seed(ts, kChannels)), err_rng(mix_seed(ts, kErrors));
    const netmodel::Geometry geo = netmodel::sample_geometry(cfg.network, cfg.channel, cfg.fixed, geo_rng);
    const auto truth = netmodel::sample_channels(cfg.network, geo, cfg.channel, ch_rng);
    if (geometry)
        *geometry = geo;
    return netmodel::apply_estimation_error(truth, cfg.network.N, cfg.network.L, cfg.network.gamma_ch,
                                            netmodel::noise_powers(cfg.channel), err_rng);
}

TrialRecord run_trial(const CampaignConfig& cfg, int index)
{
    TrialRecord rec;
    rec.index = index;
    rec.seed = trial_seed(cfg.network.seed, index);
    netmodel::Geometry geo;
    const auto kn = trial_knowledge(cfg, index, &geo);
    rec.geometry_digest = geometry_digest(geo);
    rec.thresholds = cfg.network.thresholds_linear();
    rec.bound = bound::lower_bound(kn, rec.thresholds);

    for (Method m : cfg.methods) {
        MethodResult r;
        r.method = m;
        Rng rng(mix_seed(rec.seed, kMethodBase + static_cast<std::uint64_t>(m)));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            switch (m) {
            case Method::AO: r.outcome = sdr::alternating_optimization(kn, rec.thresholds, rng, cfg.sdr); break;
            case Method::TSM: r.outcome = sdr::total_snr_max(kn, rec.thresholds, rng, cfg.sdr); break;
            case Method::MRCZF: r.outcome = classic::mrc_zf(kn, rec.thresholds, rng); break;
            case Method::SVDZF: r.outcome = classic::svd_zf(kn, rec.thresholds); break;
            }
        } catch (const std::exception& e) {
            r.outcome = DesignOutcome{};
            r.outcome.status = DesignStatus::NumericalFailure;
            r.outcome.detail = std::string("exception: ") + e.what();
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.runtime_s = cfg.record_timing ? elapsed : 0.0;
        if (!cfg.record_timing)
            r.outcome.wall_clock_s = 0.0;

        if (r.outcome.feasible()) {
            if (!rec.bound.total_bound)
                rec.dominance_violations.push_back(std::string(method_name(m)) + ": feasible despite a non-positive margin");
            else if (r.outcome.total_power < *rec.bound.total_bound * (1.0 - 1e-9))
                rec.dominance_violations.push_back(std::string(method_name(m)) + ": power below the bound");
        }
        rec.methods.push_back(std::move(r));
    }
    return rec;
}

std::vector<TrialRow> trial_rows(const std::vector<TrialRecord>& records)
{
    std::vector<TrialRow> rows;
    for (const auto& rec : records) {
        TrialRow b;
        b.trial = rec.index;
        b.method = "bound";
        b.feasible = rec.bound.feasible;
        b.power_dbw = rec.bound.total_bound ? to_db(*rec.bound.total_bound) : kNaN;
        b.min_sinr_margin = kNaN;
        b.runtime_s = 0.0;
        b.rank1_ratio = kNaN;
        rows.push_back(b);
        for (const auto& m : rec.methods) {
            TrialRow r;
            r.trial = rec.index;
            r.method = method_name(m.method);
            r.feasible = m.outcome.feasible();
            r.power_dbw = r.feasible ? to_db(m.outcome.total_power) : kNaN;
            r.min_sinr_margin = kNaN;
            if (r.feasible) {
                double worst = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < rec.thresholds.size(); ++k)
                    worst = std::min(worst, to_db(m.outcome.per_user_sinr[k] / rec.thresholds[k]));
                r.min_sinr_margin = worst;
            }
            r.runtime_s = m.runtime_s;
            r.rank1_ratio = m.outcome.rank1_ratios.empty()
                                ? kNaN
                                : *std::max_element(m.outcome.rank1_ratios.begin(), m.outcome.rank1_ratios.end());
            rows.push_back(r);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Aggregation

const MethodSummary* CampaignSummary::find(const std::string& method) const
{
    for (const auto& m : methods)
        if (m.method == method)
            return &m;
    return nullptr;
}

CampaignSummary summarize(const std::vector<TrialRow>& rows, AveragingDomain averaging)
{
    CampaignSummary s;
    s.averaging = averaging == AveragingDomain::Linear ? "linear" : "db";
    std::vector<std::string> order;
    std::map<std::string, std::vector<const TrialRow*>> groups;
    std::map<int, double> bound_by_trial;
    std::vector<int> trials_seen;
    for (const auto& r : rows) {
        if (!groups.count(r.method))
            order.push_back(r.method);
        groups[r.method].push_back(&r);
        if (std::find(trials_seen.begin(), trials_seen.end(), r.trial) == trials_seen.end())
            trials_seen.push_back(r.trial);
        if (r.method == "bound" && r.feasible)
            bound_by_trial[r.trial] = r.power_dbw;
    }
    s.trials = static_cast<int>(trials_seen.size());

    for (const auto& name : order) {
        const auto& g = groups[name];
        MethodSummary m;
        m.method = name;
        m.trials = static_cast<int>(g.size());
        double acc = 0.0, rt = 0.0;
        int r1_ok = 0;
        for (const TrialRow* r : g) {
            rt += r->runtime_s;
            if (r->feasible) {
                ++m.feasible;
                acc += averaging == AveragingDomain::Linear ? from_db(r->power_dbw) : r->power_dbw;
            }
            if (std::isfinite(r->rank1_ratio)) {
                ++m.sdr_trials;
                r1_ok += r->rank1_ratio <= kRank1Tolerance;
            }
            if (name != "bound" && r->feasible) {
                const auto it = bound_by_trial.find(r->trial);
                // Rows carry 9 significant digits, hence the small dB allowance.
                if (it == bound_by_trial.end() || r->power_dbw < it->second - 1e-6)
                    ++s.dominance_violations;
            }
        }
        m.p_success = m.trials ? 100.0 * m.feasible / m.trials : 0.0;
        if (m.feasible) {
            const double mean = acc / m.feasible;
            m.mean_power_dbw = averaging == AveragingDomain::Linear ? to_db(mean) : mean;
        }
        m.mean_runtime_s = m.trials ? rt / m.trials : 0.0;
        if (m.sdr_trials)
            m.rank1_success = static_cast<double>(r1_ok) / m.sdr_trials;
        if (name == "bound") {
            s.mean_bound_dbw = m.mean_power_dbw;
            s.bound_trials = m.feasible;
        }
        s.methods.push_back(m);
    }
    return s;
}

CampaignResult run_campaign(const CampaignConfig& cfg, const ProgressFn& progress)
{
    cfg.validate();
    const int n = cfg.network.trials;
    CampaignResult res;
    res.records.resize(n);

    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    std::atomic<int> next{0};
    std::mutex mu;
    int done = 0;
    std::exception_ptr error;

    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                res.records[i] = run_trial(cfg, i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error)
                    error = std::current_exception();
                next = n;
                return;
            }
            std::lock_guard<std::mutex> lock(mu);
            ++done;
            if (progress)
                progress(done, n);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);

    // Aggregate what the CSV will hold, so re-reading trials.csv reproduces the summary.
    res.summary = summarize(parse_trials_csv(trials_csv(trial_rows(res.records))), cfg.averaging);
    return res;
}

std::vector<SweepRow> sweep(const CampaignConfig& cfg, const std::string& param, const std::vector<std::string>& values,
                            const ProgressFn& progress)
{
    if (values.empty())
        throw std::invalid_argument("sweep: no values given");
    std::vector<SweepRow> rows;
    for (const auto& value : values) {
        CampaignConfig c = cfg;
        set_parameter(c, param, value);
        c.validate();
        const auto res = run_campaign(c, progress);
        for (const auto& m : res.summary.methods)
            rows.push_back({trim(value), m.method, m.mean_power_dbw, m.p_success, m.mean_runtime_s});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Files

std::string format_number(double x)
{
    if (std::isnan(x))
        return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string config_json(const CampaignConfig& cfg)
{
    const auto& n = cfg.network;
    const auto& c = cfg.channel;
    json j;
    j["K"] = n.K;
    j["N"] = n.N;
    j["L"] = n.L;
    j["M"] = n.M;
    j["gamma_db"] = n.gamma_db;
    j["gamma_ch"] = n.gamma_ch;
    j["trials"] = n.trials;
    j["seed"] = n.seed;
    j["cell_radius_m"] = c.cell_radius_m;
    j["min_distance_m"] = c.min_distance_m;
    j["bandwidth_hz"] = c.bandwidth_hz;
    j["nsd_dbm_hz"] = c.nsd_dbm_hz;
    j["nf_rrh_db"] = c.nf_rrh_db;
    j["nf_ms_db"] = c.nf_ms_db;
    j["antenna_gains_dbi"] = c.antenna_gains_dbi;
    j["shadowing_std_db"] = c.shadowing_std_db;
    j["averaging_domain"] = cfg.averaging == AveragingDomain::Linear ? "linear" : "db";
    std::vector<std::string> ms;
    for (Method m : cfg.methods)
        ms.emplace_back(method_name(m));
    j["methods"] = ms;
    j["timing"] = cfg.record_timing ? "wall" : "off";
    auto pts = [](const std::vector<netmodel::Point>& p) {
        json a = json::array();
        for (const auto& q : p)
            a.push_back({q.x, q.y});
        return a;
    };
    if (!cfg.fixed.rrh.empty())
        j["rrh_positions"] = pts(cfg.fixed.rrh);
    if (!cfg.fixed.ms.empty())
        j["ms_positions"] = pts(cfg.fixed.ms);
    return j.dump();
}

std::string summary_json(const CampaignSummary& s, const CampaignConfig& cfg)
{
    json j;
    j["config"] = json::parse(config_json(cfg));
    j["trials"] = s.trials;
    j["averaging_domain"] = s.averaging;
    j["mean_bound_dbw"] = opt_number(s.mean_bound_dbw);
    j["bound_trials"] = s.bound_trials;
    j["dominance_violations"] = s.dominance_violations;
    json ms = json::array();
    for (const auto& m : s.methods) {
        json e;
        e["method"] = m.method;
        e["trials"] = m.trials;
        e["feasible"] = m.feasible;
        e["p_success"] = number(m.p_success);
        e["mean_power_dbw"] = opt_number(m.mean_power_dbw);
        e["mean_runtime_s"] = number(m.mean_runtime_s);
        e["sdr_trials"] = m.sdr_trials;
        e["rank1_success"] = opt_number(m.rank1_success);
        ms.push_back(e);
    }
    j["methods"] = ms;
    return j.dump(2) + "\n";
}

CampaignSummary parse_summary_json(const std::string& text)
{
    const json j = json::parse(text);
    auto opt = [](const json& v) -> std::optional<double> {
        if (v.is_null())
            return std::nullopt;
        return v.get<double>();
    };
    CampaignSummary s;
    s.trials = j.at("trials").get<int>();
    s.averaging = j.at("averaging_domain").get<std::string>();
    s.mean_bound_dbw = opt(j.at("mean_bound_dbw"));
    s.bound_trials = j.at("bound_trials").get<int>();
    s.dominance_violations = j.at("dominance_violations").get<int>();
    for (const auto& e : j.at("methods")) {
        MethodSummary m;
        m.method = e.at("method").get<std::string>();
        m.trials = e.at("trials").get<int>();
        m.feasible = e.at("feasible").get<int>();
        m.p_success = e.at("p_success").get<double>();
        m.mean_power_dbw = opt(e.at("mean_power_dbw"));
        m.mean_runtime_s = e.at("mean_runtime_s").get<double>();
        m.sdr_trials = e.at("sdr_trials").get<int>();
        m.rank1_success = opt(e.at("rank1_success"));
        s.methods.push_back(m);
    }
    return s;
}

namespace {
const char* kTrialsHeader = "trial,method,feasible,power_dbw,min_sinr_margin,runtime_s,rank1_ratio";
}

std::string trials_csv(const std::vector<TrialRow>& rows)
{
    std::string out = std::string(kTrialsHeader) + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.trial) + "," + r.method + "," + (r.feasible ? "1" : "0") + "," + format_number(r.power_dbw) +
               "," + format_number(r.min_sinr_margin) + "," + format_number(r.runtime_s) + "," +
               format_number(r.rank1_ratio) + "\n";
    }
    return out;
}

std::vector<TrialRow> parse_trials_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != kTrialsHeader)
        throw std::invalid_argument("trials.csv: unexpected header");
    std::vector<TrialRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 7)
            throw std::invalid_argument("trials.csv line " + std::to_string(lineno) + ": expected 7 fields");
        TrialRow r;
        r.trial = std::stoi(f[0]);
        r.method = f[1];
        r.feasible = f[2] == "1";
        r.power_dbw = parse_field(f[3]);
        r.min_sinr_margin = parse_field(f[4]);
        r.runtime_s = parse_field(f[5]);
        r.rank1_ratio = parse_field(f[6]);
        rows.push_back(r);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& param)
{
    std::string out = "param,param_value,method,mean_power_dbw,p_success,mean_runtime_s\n";
    for (const auto& r : rows)
        out += param + "," + r.param_value + "," + r.method + "," + format_number(r.mean_power_dbw.value_or(kNaN)) + "," +
               format_number(r.p_success) + "," + format_number(r.mean_runtime_s) + "\n";
    return out;
}

void emit_outputs(const CampaignResult& result, const CampaignConfig& cfg, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());
    write_file(out_dir / "summary.json", summary_json(result.summary, cfg));
    write_file(out_dir / "trials.csv", trials_csv(trial_rows(result.records)));
}

void emit_sweep(const std::vector<SweepRow>& rows, const std::string& param, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());
    write_file(out_dir / "sweep.csv", sweep_csv(rows, param));
}

}  // namespace cranbf::harness
