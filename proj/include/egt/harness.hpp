// Parameter sweeps, concurrent batch execution, aggregation and output.
//
// A sweep file is an ordinary config file with one extra section:
//
//   [sweep]
//   parameter = m
//   values = 0, 0.2, 0.4
//   runs = 20
//   seed_base = 1
//   burn_in = 0
//
// parameter is any config key, optionally "section.key". Run r at point p
// uses seed seed_base + p*runs + r. burn_in is the fraction of generations
// dropped before averaging.
//
// CSV column order: the swept parameter, then "<series>_mean" and
// "<series>_sd" for every series in AggregateResult::series order. Series are
// the strategy labels in universe order, then cooperation_rate, mean_payoff,
// then family aggregates (responsible for the public-goods families;
// group_entitative, ingroup_defection, outgroup_defection for ethnocentrism).
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "egt/config.hpp"
#include "egt/dynamics.hpp"
#include "egt/engine.hpp"

namespace egt {

struct SweepSpec {
    std::string parameter_path;
    std::vector<std::string> values;  // raw text, applied with set_config_value
    int runs_per_point = 1;
    ModelConfig base_config;
    std::uint64_t seed_base = 1;
    double burn_in = 0.0;
};

inline std::uint64_t sweep_seed(const SweepSpec& spec, std::size_t point, std::size_t run) {
    return spec.seed_base + point * static_cast<std::uint64_t>(spec.runs_per_point) + run;
}

/// Raised when one run of a sweep fails; identifies the job.
class SweepError : public std::runtime_error {
public:
    SweepError(std::size_t point, std::size_t run, std::uint64_t seed, const std::string& what)
        : std::runtime_error("sweep run failed at point " + std::to_string(point) + ", run " +
                             std::to_string(run) + ", seed " + std::to_string(seed) + ": " + what),
          point_(point), run_(run), seed_(seed) {}
    std::size_t point() const { return point_; }
    std::size_t run() const { return run_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::size_t point_, run_;
    std::uint64_t seed_;
};

inline void validate(const SweepSpec& spec) {
    if (spec.parameter_path.empty()) throw ConfigError("sweep.parameter: missing");
    if (!is_config_key(spec.parameter_path))
        throw ConfigError("sweep.parameter: unknown key '" + spec.parameter_path + "'");
    if (spec.values.empty()) throw ConfigError("sweep.values: must list at least one value");
    if (spec.runs_per_point < 1) throw ConfigError("sweep.runs: must be >= 1");
    if (!(spec.burn_in >= 0.0 && spec.burn_in < 1.0)) throw ConfigError("sweep.burn_in: must lie in [0, 1)");
}

/// Config for one sweep point, validated.
inline ModelConfig point_config(const SweepSpec& spec, std::size_t point) {
    ModelConfig cfg = spec.base_config;
    try {
        set_config_value(cfg, spec.parameter_path, spec.values.at(point));
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError("sweep point " + std::to_string(point) + " (" + spec.parameter_path + " = " +
                          spec.values[point] + "): " + e.what());
    }
    return cfg;
}

inline SweepSpec sweep_from_entries(const std::vector<IniEntry>& entries, const std::string& source) {
    using namespace detail;
    SweepSpec spec;
    spec.base_config = config_from_entries(entries, source, {"sweep"});
    bool have_param = false, have_values = false;
    std::map<std::string, int> seen;
    for (const auto& e : entries) {
        if (e.section != "sweep") continue;
        const std::string where = source + ":" + std::to_string(e.line) + ": ";
        if (seen.count(e.key)) throw ConfigError(where + "duplicate key '" + e.key + "'");
        seen[e.key] = e.line;
        try {
            if (e.key == "parameter") {
                spec.parameter_path = e.value;
                have_param = true;
            } else if (e.key == "values") {
                spec.values = split_list(e.value);
                have_values = true;
            } else if (e.key == "runs") {
                spec.runs_per_point = to_integer<int>(e.key, e.value);
            } else if (e.key == "seed_base") {
                spec.seed_base = to_integer<std::uint64_t>(e.key, e.value);
            } else if (e.key == "burn_in") {
                spec.burn_in = to_double(e.key, e.value);
            } else {
                throw ConfigError("unknown key '" + e.key + "' in [sweep]");
            }
        } catch (const ConfigError& err) {
            if (std::string(err.what()).rfind(source, 0) == 0) throw;
            throw ConfigError(where + err.what());
        }
    }
    if (!have_param) throw ConfigError(source + ": [sweep] requires 'parameter'");
    if (!have_values) throw ConfigError(source + ": [sweep] requires 'values'");
    validate(spec);
    for (std::size_t p = 0; p < spec.values.size(); ++p) point_config(spec, p);
    return spec;
}

inline SweepSpec parse_sweep(std::istream& in, const std::string& source = "<sweep>") {
    return sweep_from_entries(read_ini(in, source), source);
}

inline SweepSpec load_sweep(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep file '" + path + "'");
    return parse_sweep(in, path);
}

// ---------------------------------------------------------------------------
// Aggregation

struct AggregateResult {
    std::string parameter;
    std::vector<std::string> x;       // swept values, in sweep order
    std::vector<std::string> series;  // tracked quantities
    std::size_t strategy_series = 0;  // the first this-many series are strategy proportions
    std::vector<std::vector<double>> mean;  // [point][series]
    std::vector<std::vector<double>> sd;

    std::size_t series_index(const std::string& name) const {
        for (std::size_t i = 0; i < series.size(); ++i)
            if (series[i] == name) return i;
        throw std::out_of_range("no series named '" + name + "'");
    }
    double mean_of(std::size_t point, const std::string& name) const { return mean.at(point)[series_index(name)]; }
    double sd_of(std::size_t point, const std::string& name) const { return sd.at(point)[series_index(name)]; }
};

inline std::vector<std::string> tracked_series(const ModelConfig& cfg) {
    auto out = strategy_universe(cfg).labels();
    out.push_back("cooperation_rate");
    out.push_back("mean_payoff");
    if (cfg.family == ModelFamily::Ethnocentrism) {
        out.push_back("group_entitative");
        out.push_back("ingroup_defection");
        out.push_back("outgroup_defection");
    } else {
        out.push_back("responsible");
    }
    return out;
}

/// Long-run averages of one run, in tracked_series order. Proportions and
/// rates are averaged over the generations after the burn-in; defection
/// rates are pooled counts over the same window.
inline std::vector<double> summarize_run(const ModelConfig& cfg, const std::vector<MetricsRecord>& records,
                                         double burn_in = 0.0) {
    const auto universe = strategy_universe(cfg);
    const std::size_t ns = universe.size();
    const std::size_t first = std::min(records.size(),
                                       static_cast<std::size_t>(std::floor(burn_in * records.size())));
    const std::size_t count = records.size() - first;
    std::vector<double> props(ns, 0.0);
    double coop = 0.0, payoff = 0.0;
    std::uint64_t ia = 0, id = 0, oa = 0, od = 0;
    for (std::size_t g = first; g < records.size(); ++g) {
        const auto& r = records[g];
        for (std::size_t i = 0; i < ns; ++i) props[i] += r.strategy_proportions[i];
        coop += r.cooperation_rate;
        payoff += r.mean_payoff;
        ia += r.ingroup_actions;
        id += r.ingroup_defections;
        oa += r.outgroup_actions;
        od += r.outgroup_defections;
    }
    const double scale = count ? 1.0 / static_cast<double>(count) : 0.0;
    std::vector<double> out;
    for (double p : props) out.push_back(p * scale);
    out.push_back(coop * scale);
    out.push_back(payoff * scale);
    if (cfg.family == ModelFamily::Ethnocentrism) {
        double group = 0.0;
        for (std::size_t i = 0; i < ns; ++i)
            if (universe.programs[i].entitativity == Entitativity::Group) group += out[i];
        out.push_back(group);
        out.push_back(ia ? static_cast<double>(id) / static_cast<double>(ia) : 0.0);
        out.push_back(oa ? static_cast<double>(od) / static_cast<double>(oa) : 0.0);
    } else {
        double resp = 0.0;
        for (std::size_t i = 0; i < ns; ++i)
            if (universe.norms[i].punishment == Punishment::Responsible) resp += out[i];
        out.push_back(resp);
    }
    return out;
}

/// Mean and sample standard deviation (0 for a single value), in input order.
inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double x : v) sum += x;
    const double m = sum / static_cast<double>(v.size());
    if (v.size() == 1) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

/// Aggregate per-run summaries; runs[p][r] is the summary of run r at point p.
inline AggregateResult aggregate(const SweepSpec& spec, const std::vector<std::vector<std::vector<double>>>& runs) {
    AggregateResult res;
    res.parameter = spec.parameter_path;
    res.x = spec.values;
    res.series = tracked_series(point_config(spec, 0));
    res.strategy_series = strategy_universe(spec.base_config).size();
    for (const auto& point : runs) {
        std::vector<double> m(res.series.size()), s(res.series.size());
        for (std::size_t q = 0; q < res.series.size(); ++q) {
            std::vector<double> col;
            for (const auto& run : point) col.push_back(run.at(q));
            std::tie(m[q], s[q]) = mean_sd(col);
        }
        res.mean.push_back(std::move(m));
        res.sd.push_back(std::move(s));
    }
    return res;
}

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;
using SweepRunner = std::function<std::vector<MetricsRecord>(const ModelConfig&, std::uint64_t)>;

/// Execute every (point, run) job on up to `parallelism` worker threads.
/// Results land in per-job slots and are aggregated in job order, so the
/// outcome does not depend on scheduling.
inline AggregateResult run_sweep(const SweepSpec& spec, int parallelism, const SweepProgress& progress = {},
                                 const SweepRunner& runner = run_simulation) {
    validate(spec);
    std::vector<ModelConfig> configs;
    for (std::size_t p = 0; p < spec.values.size(); ++p) configs.push_back(point_config(spec, p));

    const std::size_t runs = static_cast<std::size_t>(spec.runs_per_point);
    const std::size_t total = configs.size() * runs;
    std::vector<std::vector<double>> slots(total);
    std::vector<std::string> failures(total);
    std::vector<char> failed(total, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            if (abort.load()) return;
            const std::size_t job = next.fetch_add(1);
            if (job >= total) return;
            const std::size_t p = job / runs, r = job % runs;
            try {
                const auto records = runner(configs[p], sweep_seed(spec, p, r));
                slots[job] = summarize_run(configs[p], records, spec.burn_in);
            } catch (const std::exception& e) {
                failures[job] = e.what();
                failed[job] = 1;
                abort.store(true);
                return;
            }
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                progress(d, total);
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(parallelism < 1 ? 1 : parallelism, total));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t job = 0; job < total; ++job)
        if (failed[job]) throw SweepError(job / runs, job % runs, sweep_seed(spec, job / runs, job % runs), failures[job]);

    std::vector<std::vector<std::vector<double>>> grouped(configs.size());
    for (std::size_t job = 0; job < total; ++job) grouped[job / runs].push_back(std::move(slots[job]));
    return aggregate(spec, grouped);
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_field(fields[i]);
    }
    os << '\n';
}

/// Parse RFC-4180-style CSV (quoted fields may hold commas, quotes, newlines).
inline std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw std::runtime_error("csv: unterminated quoted field");
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_csv(const AggregateResult& res, std::ostream& os) {
    std::vector<std::string> header{res.parameter};
    for (const auto& s : res.series) {
        header.push_back(s + "_mean");
        header.push_back(s + "_sd");
    }
    write_csv_row(os, header);
    for (std::size_t p = 0; p < res.x.size(); ++p) {
        std::vector<std::string> row{res.x[p]};
        for (std::size_t q = 0; q < res.series.size(); ++q) {
            row.push_back(format_value(res.mean[p][q]));
            row.push_back(format_value(res.sd[p][q]));
        }
        write_csv_row(os, row);
    }
}

inline void emit_csv(const AggregateResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(res, out);
    if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

/// One block per series, blocks separated by two blank lines:
///   # <series>
///   <x> <mean> <sd>
inline void write_plot_data(const AggregateResult& res, std::ostream& os) {
    if (res.x.empty()) throw std::invalid_argument("plot data: empty sweep");
    for (std::size_t q = 0; q < res.series.size(); ++q) {
        if (q) os << "\n\n";
        os << "# " << res.series[q] << '\n';
        for (std::size_t p = 0; p < res.x.size(); ++p)
            os << res.x[p] << ' ' << format_value(res.mean[p][q]) << ' ' << format_value(res.sd[p][q]) << '\n';
    }
}

inline void emit_plot_data(const AggregateResult& res, const std::string& path) {
    if (res.x.empty()) throw std::invalid_argument("plot data: empty sweep");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_plot_data(res, out);
    if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

/// Per-generation CSV for a single run.
inline void write_generation_csv(const ModelConfig& cfg, const std::vector<MetricsRecord>& records, std::ostream& os) {
    std::vector<std::string> header{"generation"};
    for (const auto& l : strategy_universe(cfg).labels()) header.push_back(l);
    header.insert(header.end(), {"cooperation_rate", "mean_payoff", "cooperative_actions", "total_actions"});
    const bool ethno = cfg.family == ModelFamily::Ethnocentrism;
    if (ethno)
        header.insert(header.end(), {"ingroup_actions", "ingroup_defections", "outgroup_actions", "outgroup_defections"});
    write_csv_row(os, header);
    for (const auto& r : records) {
        std::vector<std::string> row{std::to_string(r.generation)};
        for (double p : r.strategy_proportions) row.push_back(format_value(p));
        row.push_back(format_value(r.cooperation_rate));
        row.push_back(format_value(r.mean_payoff));
        row.push_back(std::to_string(r.cooperative_actions));
        row.push_back(std::to_string(r.total_actions));
        if (ethno) {
            row.push_back(std::to_string(r.ingroup_actions));
            row.push_back(std::to_string(r.ingroup_defections));
            row.push_back(std::to_string(r.outgroup_actions));
            row.push_back(std::to_string(r.outgroup_defections));
        }
        write_csv_row(os, row);
    }
}

// ---------------------------------------------------------------------------
// Replicator input: a square payoff matrix, one whitespace-separated row per
// line; blank lines and '#' comments ignored.

inline PayoffMatrix read_payoff_matrix(std::istream& in, const std::string& source = "<matrix>") {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                row.push_back(detail::to_double("matrix entry", tok));
            } catch (const ConfigError& e) {
                throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(source + ": empty payoff matrix");
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.size())
            throw ConfigError(source + ": payoff matrix must be square (" + std::to_string(rows.size()) + " rows, a row has " +
                              std::to_string(r.size()) + " entries)");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    try {
        return PayoffMatrix(rows.size(), std::move(flat));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

inline void write_trajectory_csv(const std::vector<MixedState>& traj, double step, double horizon, std::ostream& os) {
    if (traj.empty()) return;
    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < traj.front().size(); ++i) header.push_back("x" + std::to_string(i));
    write_csv_row(os, header);
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const double t = n + 1 == traj.size() ? horizon : std::min(horizon, static_cast<double>(n) * step);
        std::vector<std::string> row{format_value(t)};
        for (double v : traj[n].proportions()) row.push_back(format_value(v));
        write_csv_row(os, row);
    }
}

}  // namespace egt
