#include "qmem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qmem/errors.hpp"

namespace qmem {

const char* to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Path: return "path";
    case ExperimentKind::TimeBin: return "timebin";
    case ExperimentKind::DualTimeBin: return "dual";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "path") return ExperimentKind::Path;
    if (s == "timebin") return ExperimentKind::TimeBin;
    if (s == "dual") return ExperimentKind::DualTimeBin;
    throw ConfigError("unknown experiment kind '" + s +
                      "' (expected path, timebin or dual)");
}

namespace {

struct Value {
    enum class Kind { Str, Num, Bool, Arr } kind = Kind::Str;
    std::string str;
    double num = 0.0;
    bool flag = false;
    std::vector<Value> arr;
    int line = 0;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Strip a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        else if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

class ConfigText {
public:
    ConfigText(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        parse(text);
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const Value* take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return nullptr;
        consumed_.insert(key);
        return &it->second;
    }

    double take_num(const std::string& key, double fallback) {
        const Value* v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Num) fail(v->line, "'" + key + "' must be a number");
        return v->num;
    }

    std::uint64_t take_uint(const std::string& key, std::uint64_t fallback) {
        const Value* v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Num || v->num < 0.0 ||
            v->num != std::floor(v->num))
            fail(v->line, "'" + key + "' must be a non-negative integer");
        return static_cast<std::uint64_t>(v->num);
    }

    bool take_bool(const std::string& key, bool fallback) {
        const Value* v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Bool) fail(v->line, "'" + key + "' must be true or false");
        return v->flag;
    }

    std::string take_str(const std::string& key, const std::string& fallback) {
        const Value* v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Str) fail(v->line, "'" + key + "' must be a string");
        return v->str;
    }

    std::vector<double> take_num_array(const std::string& key, std::vector<double> fallback) {
        const Value* v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Arr) fail(v->line, "'" + key + "' must be an array");
        std::vector<double> out;
        for (const auto& e : v->arr) {
            if (e.kind != Value::Kind::Num)
                fail(v->line, "'" + key + "' must contain only numbers");
            out.push_back(e.num);
        }
        return out;
    }

    // Keys in declaration order whose full name starts with `prefix`.
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& k : order_)
            if (k.rfind(prefix, 0) == 0) out.push_back(k);
        return out;
    }

    void reject_unconsumed() const {
        for (const auto& k : order_)
            if (!consumed_.count(k))
                throw ConfigError(origin_ + ":" + std::to_string(values_.at(k).line) +
                                  ": unknown key '" + k + "'");
    }

private:
    void parse(const std::string& text) {
        std::istringstream in(text);
        std::string raw, section;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            std::string line = trim(strip_comment(raw));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    fail(line_no, "malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty() || !valid_name(section))
                    fail(line_no, "malformed section name '" + section + "'");
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                fail(line_no, "expected 'key = value'");
            std::string key = trim(line.substr(0, eq));
            if (key.empty() || !valid_name(key))
                fail(line_no, "malformed key '" + key + "'");
            if (section.empty())
                fail(line_no, "key '" + key + "' appears outside any [section]");
            std::string full = section + "." + key;
            if (values_.count(full))
                fail(line_no, "duplicate key '" + full + "'");
            values_[full] = parse_value(trim(line.substr(eq + 1)), line_no);
            order_.push_back(full);
        }
    }

    static bool valid_name(const std::string& s) {
        return std::all_of(s.begin(), s.end(), [](unsigned char c) {
            return std::isalnum(c) || c == '_' || c == '.' || c == '-';
        });
    }

    Value parse_value(const std::string& s, int line_no) {
        Value v;
        v.line = line_no;
        if (s.empty()) fail(line_no, "missing value");
        if (s.front() == '"') {
            if (s.size() < 2 || s.back() != '"')
                fail(line_no, "unterminated string");
            v.kind = Value::Kind::Str;
            v.str = s.substr(1, s.size() - 2);
            if (v.str.find('"') != std::string::npos)
                fail(line_no, "strings may not contain quotes");
            return v;
        }
        if (s == "true" || s == "false") {
            v.kind = Value::Kind::Bool;
            v.flag = (s == "true");
            return v;
        }
        if (s.front() == '[') {
            if (s.back() != ']')
                fail(line_no, "unterminated array");
            v.kind = Value::Kind::Arr;
            std::string body = trim(s.substr(1, s.size() - 2));
            if (body.empty()) return v;
            std::size_t start = 0;
            bool in_str = false;
            for (std::size_t i = 0; i <= body.size(); ++i) {
                if (i < body.size() && body[i] == '"') in_str = !in_str;
                if (i == body.size() || (body[i] == ',' && !in_str)) {
                    std::string elem = trim(body.substr(start, i - start));
                    if (elem.empty()) fail(line_no, "empty array element");
                    if (!elem.empty() && elem.front() == '[')
                        fail(line_no, "nested arrays are not supported");
                    v.arr.push_back(parse_value(elem, line_no));
                    start = i + 1;
                }
            }
            return v;
        }
        double num = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), num);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size()) {
            v.kind = Value::Kind::Num;
            v.num = num;
            return v;
        }
        fail(line_no, "cannot parse value '" + s + "'");
    }

    std::string origin_;
    std::map<std::string, Value> values_;
    std::vector<std::string> order_;
    std::set<std::string> consumed_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

int parse_int(const std::string& s, const std::string& what) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("malformed " + what + " '" + s + "'");
    return v;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& s, int n_cells) {
    std::vector<std::pair<int, int>> out;
    if (s == "all") {
        for (int p = 1; p <= n_cells / 2; ++p) out.push_back(pair_cells(p, n_cells));
        return out;
    }
    for (const auto& item : split(s, ',')) {
        auto dash = item.find('-');
        if (dash == std::string::npos)
            throw ConfigError("pair '" + item + "' must look like 'a-b'");
        int a = parse_int(item.substr(0, dash), "cell index");
        int b = parse_int(item.substr(dash + 1), "cell index");
        if (a < 1 || b < 1 || a > n_cells || b > n_cells || a == b)
            throw ConfigError("pair '" + item + "' is out of range");
        out.emplace_back(a, b);
    }
    if (out.empty()) throw ConfigError("experiment.pairs selects no pairs");
    return out;
}

std::vector<int> parse_cell_list(const std::string& s, int n_cells) {
    std::vector<int> out;
    if (s == "all") {
        for (int c = 1; c <= n_cells; ++c) out.push_back(c);
        return out;
    }
    for (const auto& item : split(s, ',')) {
        int c = parse_int(item, "cell index");
        if (c < 1 || c > n_cells)
            throw ConfigError("cell index " + std::to_string(c) + " is out of range");
        out.push_back(c);
    }
    if (out.empty()) throw ConfigError("experiment.cells selects no cells");
    return out;
}

std::vector<StateName> parse_states(const std::string& s) {
    std::vector<StateName> out;
    if (s == "all") {
        out.assign(std::begin(kCardinalStates), std::end(kCardinalStates));
        return out;
    }
    for (const auto& item : split(s, ',')) {
        try {
            out.push_back(state_name_from_string(item));
        } catch (const UsageError& e) {
            throw ConfigError(e.what());
        }
    }
    if (out.empty()) throw ConfigError("experiment.states selects no states");
    return out;
}

} // namespace

void RunConfig::validate() const {
    array.validate();
    if (experiment.nbar <= 0.0)
        throw ConfigError("experiment.nbar must be positive");
    if (experiment.kind == ExperimentKind::TimeBin) {
        if (experiment.cells.empty())
            throw ConfigError("time-bin runs need at least one cell");
    } else if (experiment.pairs.empty()) {
        throw ConfigError("path and dual runs need at least one pair");
    }
    for (auto [a, b] : experiment.pairs) {
        if (a < 1 || a > array.n_cells() || b < 1 || b > array.n_cells() || a == b)
            throw ConfigError("pair " + std::to_string(a) + "-" + std::to_string(b) +
                              " is out of range");
    }
    for (int c : experiment.cells)
        if (c < 1 || c > array.n_cells())
            throw ConfigError("cell " + std::to_string(c) + " is out of range");
    if (experiment.kind != ExperimentKind::DualTimeBin && experiment.states.empty())
        throw ConfigError("tomography runs need at least one prepared state");
    if (experiment.kind == ExperimentKind::DualTimeBin && experiment.phase_points < 6)
        throw ConfigError("dual runs need at least 6 phase points for the fringe fit");
    if (experiment.repeats_per_cycle < 1)
        throw ConfigError("experiment.repeats_per_cycle must be at least 1");
    if (sampling.cycles < 1)
        throw ConfigError("sampling.cycles must be at least 1");
    if (sampling.bin_width_ns <= 0.0)
        throw ConfigError("sampling.bin_width_ns must be positive");
    if (analysis.windows_ns.empty())
        throw ConfigError("analysis.windows_ns must not be empty");
    double span = 2.0 * array.acquisition_halfspan_ns;
    for (double w : analysis.windows_ns)
        if (w <= 0.0 || w > span + 1e-9)
            throw ConfigError("analysis window " + std::to_string(w) +
                              " ns outside (0, " + std::to_string(span) + "]");
    if (analysis.default_window_ns <= 0.0 || analysis.default_window_ns > span + 1e-9)
        throw ConfigError("analysis.default_window_ns outside the acquisition gate");
    if (analysis.n_mc < 2)
        throw ConfigError("analysis.n_mc must be at least 2");
    if (experiment.spin_storage_us < array.min_spin_hold_us ||
        experiment.spin_storage_us > array.spin_lifetime_us)
        throw ConfigError("experiment.spin_storage_us outside the allowed hold range");
}

RunConfig default_run_config(ExperimentKind kind) {
    RunConfig cfg;
    cfg.array = default_array(ArrayProfile::CenterPeaked);
    cfg.experiment.kind = kind;
    cfg.experiment.states.assign(std::begin(kCardinalStates), std::end(kCardinalStates));
    for (int p = 1; p <= 5; ++p) cfg.experiment.pairs.push_back(pair_cells(p));
    for (int c = 1; c <= 10; ++c) cfg.experiment.cells.push_back(c);
    switch (kind) {
    case ExperimentKind::Path:
        cfg.experiment.nbar = 1.10;
        cfg.experiment.spin_storage_us = 8.0;
        cfg.experiment.repeats_per_cycle = 51;
        cfg.analysis.default_window_ns = 270.0;
        break;
    case ExperimentKind::TimeBin:
        cfg.experiment.nbar = 0.94;
        cfg.experiment.spin_storage_us = 11.0;
        cfg.experiment.repeats_per_cycle = 41;
        cfg.analysis.default_window_ns = 300.0;
        break;
    case ExperimentKind::DualTimeBin:
        cfg.experiment.nbar = 0.94;
        cfg.experiment.spin_storage_us = 8.0;
        cfg.experiment.repeats_per_cycle = 41;
        cfg.analysis.default_window_ns = 300.0;
        break;
    }
    return cfg;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    ConfigText t(text, origin);

    const Value* kind_v = t.take("experiment.kind");
    if (!kind_v)
        throw ConfigError(origin + ": experiment.kind is required (path, timebin or dual)");
    if (kind_v->kind != Value::Kind::Str)
        t.fail(kind_v->line, "'experiment.kind' must be a string");
    RunConfig cfg = default_run_config(experiment_kind_from_string(kind_v->str));

    // [array]
    std::string profile = t.take_str("array.profile", "center_peaked");
    if (profile == "flat")
        cfg.array = default_array(ArrayProfile::Flat);
    else if (profile != "center_peaked")
        throw ConfigError("array.profile must be 'flat' or 'center_peaked'");

    cfg.array.cell_pitch_um = t.take_num("array.cell_pitch_um", cfg.array.cell_pitch_um);
    cfg.array.cell_freq_spacing_mhz =
        t.take_num("array.cell_freq_spacing_mhz", cfg.array.cell_freq_spacing_mhz);
    cfg.array.afc_delay_us = t.take_num("array.afc_delay_us", cfg.array.afc_delay_us);
    cfg.array.cp_duration_us = t.take_num("array.cp_duration_us", cfg.array.cp_duration_us);
    cfg.array.pulse_fwhm_in_ns =
        t.take_num("array.pulse_fwhm_in_ns", cfg.array.pulse_fwhm_in_ns);
    std::string shape = t.take_str(
        "array.output_shape", cfg.array.output_shape == PulseShape::Lorentzian
                                  ? "lorentzian"
                                  : "two_sided_exponential");
    if (shape == "lorentzian")
        cfg.array.output_shape = PulseShape::Lorentzian;
    else if (shape == "two_sided_exponential")
        cfg.array.output_shape = PulseShape::TwoSidedExponential;
    else
        throw ConfigError("array.output_shape must be 'lorentzian' or "
                          "'two_sided_exponential'");
    cfg.array.acquisition_halfspan_ns =
        t.take_num("array.acquisition_halfspan_ns", cfg.array.acquisition_halfspan_ns);
    cfg.array.timebin_separation_us =
        t.take_num("array.timebin_separation_us", cfg.array.timebin_separation_us);
    cfg.array.eta_detection = t.take_num("array.eta_detection", cfg.array.eta_detection);
    cfg.array.min_spin_hold_us =
        t.take_num("array.min_spin_hold_us", cfg.array.min_spin_hold_us);
    cfg.array.spin_lifetime_us =
        t.take_num("array.spin_lifetime_us", cfg.array.spin_lifetime_us);
    auto band = t.take_num_array("array.spin_wave_band",
                                 {cfg.array.spin_wave_band_lo, cfg.array.spin_wave_band_hi});
    if (band.size() != 2 || band[0] <= 0.0 || band[1] <= band[0])
        throw ConfigError("array.spin_wave_band must be [lo, hi] with 0 < lo < hi");
    cfg.array.spin_wave_band_lo = band[0];
    cfg.array.spin_wave_band_hi = band[1];

    double noise = t.take_num("array.noise_rate_per_ns", -1.0);
    if (noise >= 0.0)
        for (auto& c : cfg.array.cells) c.noise_rate_per_ns = noise;

    // Detected-pulse width: explicit value wins, otherwise calibrated from
    // the containment anchors under the acquisition gate.
    auto anchor_w = t.take_num_array("array.containment_windows_ns", {270.0, 865.0});
    auto anchor_f = t.take_num_array("array.containment_fractions", {0.42, 0.87});
    if (anchor_w.size() != anchor_f.size() || anchor_w.empty())
        throw ConfigError("containment anchor arrays must be non-empty and equal length");
    double fwhm = t.take_num("array.output_broadening_ns", 0.0);
    if (fwhm > 0.0) {
        cfg.array.output_broadening_ns = fwhm;
    } else {
        std::vector<ContainmentTarget> targets;
        for (std::size_t i = 0; i < anchor_w.size(); ++i)
            targets.push_back({anchor_w[i], anchor_f[i]});
        try {
            cfg.array.output_broadening_ns = calibrate_broadening(
                targets, cfg.array.output_shape, cfg.array.acquisition_halfspan_ns);
        } catch (const UsageError& e) {
            throw ConfigError(std::string("containment anchors: ") + e.what());
        }
    }

    // [cell.N] overrides
    for (const auto& full : t.keys_with_prefix("cell.")) {
        auto rest = full.substr(5);
        auto dot = rest.find('.');
        if (dot == std::string::npos)
            throw ConfigError("unknown key '" + full + "'");
        int id = parse_int(rest.substr(0, dot), "cell section index");
        if (id < 1 || id > cfg.array.n_cells())
            throw ConfigError("section [cell." + rest.substr(0, dot) +
                              "] is out of range for this array");
        CellParams& c = cfg.array.cells[static_cast<std::size_t>(id - 1)];
        std::string field = rest.substr(dot + 1);
        if (field == "eta_afc") c.eta_afc = t.take_num(full, c.eta_afc);
        else if (field == "eta_cp") c.eta_cp = t.take_num(full, c.eta_cp);
        else if (field == "eta_demux") c.eta_demux = t.take_num(full, c.eta_demux);
        else if (field == "noise_rate_per_ns")
            c.noise_rate_per_ns = t.take_num(full, c.noise_rate_per_ns);
        else
            throw ConfigError("unknown key '" + full + "'");
    }

    // [experiment]
    cfg.experiment.nbar = t.take_num("experiment.nbar", cfg.experiment.nbar);
    cfg.experiment.spin_storage_us =
        t.take_num("experiment.spin_storage_us", cfg.experiment.spin_storage_us);
    cfg.experiment.pairs =
        parse_pairs(t.take_str("experiment.pairs", "all"), cfg.array.n_cells());
    cfg.experiment.cells =
        parse_cell_list(t.take_str("experiment.cells", "all"), cfg.array.n_cells());
    cfg.experiment.states = parse_states(t.take_str("experiment.states", "all"));
    cfg.experiment.phase_points = static_cast<int>(
        t.take_uint("experiment.phase_points",
                    static_cast<std::uint64_t>(cfg.experiment.phase_points)));
    cfg.experiment.repeats_per_cycle = static_cast<int>(
        t.take_uint("experiment.repeats_per_cycle",
                    static_cast<std::uint64_t>(cfg.experiment.repeats_per_cycle)));

    // [sampling]
    cfg.sampling.cycles = t.take_uint("sampling.cycles", cfg.sampling.cycles);
    cfg.sampling.seed = t.take_uint("sampling.seed", cfg.sampling.seed);
    cfg.sampling.bin_width_ns =
        t.take_num("sampling.bin_width_ns", cfg.sampling.bin_width_ns);

    // [analysis]
    cfg.analysis.windows_ns = t.take_num_array("analysis.windows_ns", cfg.analysis.windows_ns);
    cfg.analysis.default_window_ns =
        t.take_num("analysis.default_window_ns", cfg.analysis.default_window_ns);
    cfg.analysis.n_mc = t.take_uint("analysis.n_mc", cfg.analysis.n_mc);
    cfg.analysis.mc_seed = t.take_uint("analysis.mc_seed", cfg.analysis.mc_seed);
    cfg.analysis.subtract_noise_baseline =
        t.take_bool("analysis.subtract_noise_baseline", cfg.analysis.subtract_noise_baseline);

    t.reject_unconsumed();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace qmem
