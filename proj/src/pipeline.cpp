#include "qmem/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "qmem/errors.hpp"
#include "qmem/rng.hpp"

namespace qmem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt_num(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string two_digits(int v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot open '" + path + "' for writing");
    f << text;
    if (!f)
        throw UsageError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw UsageError("malformed JSON in '" + path + "': " + e.what());
    }
}

// Echo peak positions shared by the sequence builders: slot k sits one
// time-bin separation after slot k-1, first slot centered one acquisition
// halfspan into the record.
double slot_center_ns(const ArrayConfig& a, int slot) {
    return a.acquisition_halfspan_ns + slot * 1e3 * a.timebin_separation_us;
}

double group_noise_rate(const ArrayConfig& a, int cell_a, int cell_b) {
    if (cell_b > 0 && cell_b != cell_a)
        return 0.5 * (a.cell(cell_a).noise_rate_per_ns + a.cell(cell_b).noise_rate_per_ns);
    return a.cell(cell_a).noise_rate_per_ns;
}

// Heralded retrieval probability into a window: spin-wave echo, demux and
// the window's share of the broadened pulse. Detector efficiency is a
// property of the measurement apparatus, not of the memory, so it stays out.
double retrieval_probability(const ArrayConfig& a, int cell_a, int cell_b, double window_ns) {
    double frac = window_fraction(a.output_profile(), window_ns);
    double pa = spin_wave_efficiency(a.cell(cell_a)) * a.cell(cell_a).eta_demux;
    if (cell_b > 0 && cell_b != cell_a) {
        double pb = spin_wave_efficiency(a.cell(cell_b)) * a.cell(cell_b).eta_demux;
        return 0.5 * (pa + pb) * frac;
    }
    return pa * frac;
}

struct RunGroup {
    std::string label;
    int cell_a = 0;
    int cell_b = 0; // 0 for single-cell groups
};

std::vector<RunGroup> run_groups(const RunConfig& cfg) {
    std::vector<RunGroup> out;
    if (cfg.experiment.kind == ExperimentKind::TimeBin) {
        for (int c : cfg.experiment.cells)
            out.push_back({group_label(cfg.experiment.kind, c, 0), c, 0});
    } else {
        for (auto [a, b] : cfg.experiment.pairs)
            out.push_back({group_label(cfg.experiment.kind, a, b), a, b});
    }
    return out;
}

double dual_phase(const RunConfig& cfg, int index) {
    // Phase grid from -pi to 2*pi inclusive: wide enough to pin the fringe
    // period and offset.
    int n = cfg.experiment.phase_points;
    return -kPi + 3.0 * kPi * index / (n - 1);
}

// The analysis settings of a tomography run: one acquisition per cardinal
// state, mirroring the interleaved setting cycle of a real run. Path qubits
// are projected by the demultiplexer; time-bin poles come from full-readout
// acquisitions gated on the matching slot, and each equatorial state from
// its own interferometric phase setting.
struct AnalysisSetting {
    std::string label;
    MeasSetting meas;
};

std::vector<AnalysisSetting> analysis_settings(ExperimentKind kind) {
    std::vector<AnalysisSetting> out;
    if (kind == ExperimentKind::Path) {
        for (StateName n : kCardinalStates)
            out.push_back({to_string(n),
                           MeasSetting::projector(canonical_state(n, BasisLabel::Path))});
    } else if (kind == ExperimentKind::TimeBin) {
        for (StateName n : {StateName::Zero, StateName::One})
            out.push_back({to_string(n), MeasSetting::projector(
                                             canonical_state(n, BasisLabel::TimeBin))});
        for (StateName n :
             {StateName::PlusX, StateName::MinusX, StateName::PlusY, StateName::MinusY})
            out.push_back({to_string(n), MeasSetting::phase(equatorial_phase(n))});
    }
    return out;
}

std::string hist_filename(ExperimentKind kind, const std::string& group,
                          const std::string& state, const std::string& setting) {
    std::string name = std::string("hist_") + to_string(kind) + "_" + group;
    if (!state.empty()) name += "_" + state;
    name += "_" + setting + ".csv";
    return name;
}

// ---- manifest-driven histogram access --------------------------------------

struct HistSet {
    ExperimentKind kind = ExperimentKind::Path;
    // key: group|state|setting
    std::map<std::string, TrialHistogram> hists;
    std::map<std::string, double> dphi; // dual: group|ph<k> -> phase

    static std::string key(const std::string& group, const std::string& state,
                           const std::string& setting) {
        return group + "|" + state + "|" + setting;
    }

    const TrialHistogram& get(const std::string& group, const std::string& state,
                              const std::string& setting) const {
        auto it = hists.find(key(group, state, setting));
        if (it == hists.end())
            throw UsageError("histogram for group " + group + ", state '" + state +
                             "', setting '" + setting + "' missing from the run directory");
        return it->second;
    }
};

HistSet load_run_dir(const std::string& hist_dir, ExperimentKind expected) {
    fs::path manifest = fs::path(hist_dir) / "manifest.json";
    if (!fs::exists(manifest))
        throw UsageError("'" + hist_dir + "' has no manifest.json; not a run directory");
    json m = read_json(manifest.string());
    if (m.value("schema", "") != "qmem-run-1")
        throw UsageError("'" + hist_dir + "' does not contain a simulated run");
    HistSet set;
    set.kind = experiment_kind_from_string(m.value("kind", ""));
    if (set.kind != expected)
        throw UsageError(std::string("run directory holds a ") + to_string(set.kind) +
                         " run but the config requests " + to_string(expected));
    for (const auto& entry : m.at("files")) {
        std::string file = entry.at("file").get<std::string>();
        std::string group = entry.at("group").get<std::string>();
        std::string state = entry.value("state", "");
        std::string setting = entry.at("setting").get<std::string>();
        std::string k = HistSet::key(group, state, setting);
        set.hists[k] = read_histogram_csv((fs::path(hist_dir) / file).string());
        if (entry.contains("dphi_rad"))
            set.dphi[k] = entry.at("dphi_rad").get<double>();
    }
    return set;
}

// ---- group-mean Monte-Carlo -------------------------------------------------

struct GroupMc {
    double fbar = 0.0;
    double err_plus = 0.0;
    double err_minus = 0.0;
};

double percentile(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Mean fidelity over the prepared states with jointly resampled counts, so
// the quoted uncertainty reflects the correlated average, not six
// independent error bars.
GroupMc mc_group_mean(const std::vector<TomographyInput>& inputs,
                      const std::vector<QubitState>& targets, std::size_t n_mc,
                      std::uint64_t seed, const ReconstructOptions& opt) {
    GroupMc out;
    double sum = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        sum += fidelity(reconstruct(inputs[i], opt), targets[i]);
    out.fbar = sum / static_cast<double>(inputs.size());

    SplitMix64 rng(derive_stream(seed, 0));
    std::vector<double> samples;
    samples.reserve(n_mc);
    std::size_t failures = 0;
    for (std::size_t s = 0; s < n_mc; ++s) {
        // Draw every count before reconstructing so failed samples consume
        // the same generator stream as successful ones.
        std::vector<TomographyInput> resampled = inputs;
        for (auto& in : resampled)
            for (auto& c : in.counts)
                c = static_cast<double>(poisson_draw(rng, c));
        try {
            double acc = 0.0;
            for (std::size_t i = 0; i < resampled.size(); ++i)
                acc += fidelity(reconstruct(resampled[i], opt), targets[i]);
            samples.push_back(acc / static_cast<double>(resampled.size()));
        } catch (const AnalysisError&) {
            ++failures;
        }
    }
    if (failures * 100 > n_mc)
        throw AnalysisError("more than 1% of group resamples were degenerate");
    if (samples.size() < 2)
        throw AnalysisError("too few successful group resamples");
    std::sort(samples.begin(), samples.end());
    out.err_minus = std::max(0.0, out.fbar - percentile(samples, 0.16));
    out.err_plus = std::max(0.0, percentile(samples, 0.84) - out.fbar);
    return out;
}

json bound_entry(ExperimentKind kind, const std::string& group, double window_ns,
                 const BoundResult& b) {
    json alloc = json::array();
    for (const auto& a : b.allocation)
        alloc.push_back({{"n", a.n}, {"weight", a.weight}});
    return {{"kind", to_string(kind)}, {"group", group},  {"window_ns", window_ns},
            {"nbar", b.nbar},          {"p_succ", b.p_succ}, {"f_b", b.f_b},
            {"allocation", alloc}};
}

std::vector<double> window_ladder(const RunConfig& cfg, double headline) {
    std::vector<double> windows = cfg.analysis.windows_ns;
    bool present = std::any_of(windows.begin(), windows.end(),
                               [&](double w) { return std::abs(w - headline) < 1e-9; });
    if (!present) windows.push_back(headline);
    return windows;
}

} // namespace

std::string group_label(ExperimentKind kind, int cell_a, int cell_b) {
    if (kind == ExperimentKind::TimeBin)
        return "cell" + two_digits(cell_a);
    return "pair" + two_digits(cell_a) + "-" + two_digits(cell_b);
}

std::string setting_label(const MeasSetting& m) {
    if (m.is_phase) {
        long deg = std::lround(m.phase_rad * 180.0 / kPi);
        return "ph" + std::to_string(deg);
    }
    for (StateName n : kCardinalStates) {
        QubitState c = canonical_state(n, m.state.basis);
        if (std::abs(m.state.a0 - c.a0) < 1e-9 && std::abs(m.state.a1 - c.a1) < 1e-9)
            return to_string(n);
    }
    throw UsageError("projector setting is not one of the six cardinal states");
}

// ---- simulate ---------------------------------------------------------------

SimulateResult simulate_run(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (out_dir.empty())
        throw UsageError("simulate needs an output directory");
    ensure_dir(out_dir);

    const std::uint64_t n_trials =
        cfg.sampling.cycles * static_cast<std::uint64_t>(cfg.experiment.repeats_per_cycle);
    std::uint64_t stream = 0;

    SimulateResult result;
    json files = json::array();

    auto emit = [&](const ExpectedTimeline& timeline, const std::string& group,
                    const std::string& state, const std::string& setting,
                    double dphi, bool has_dphi) {
        TrialHistogram h = sample_trials(timeline, n_trials, cfg.sampling.seed, stream,
                                         cfg.sampling.bin_width_ns);
        h.set_meta("kind", to_string(cfg.experiment.kind));
        h.set_meta("group", group);
        if (!state.empty()) h.set_meta("state", state);
        h.set_meta("setting", setting);
        if (has_dphi) h.set_meta("dphi_rad", fmt_num(dphi));
        h.set_meta("nbar", fmt_num(cfg.experiment.nbar));
        h.set_meta("spin_storage_us", fmt_num(cfg.experiment.spin_storage_us));
        h.set_meta("analysis_center_ns", fmt_num(timeline.analysis_center_ns));
        h.set_meta("stream", std::to_string(stream));
        std::string name = hist_filename(cfg.experiment.kind, group, state, setting);
        write_histogram_csv(h, (fs::path(out_dir) / name).string());
        result.files.push_back(name);

        json entry = {{"file", name}, {"group", group}, {"setting", setting},
                      {"stream", stream}};
        if (!state.empty()) entry["state"] = state;
        if (has_dphi) entry["dphi_rad"] = dphi;
        files.push_back(entry);
        ++stream;
    };

    ExperimentSpec spec;
    spec.kind = cfg.experiment.kind;
    spec.nbar = cfg.experiment.nbar;
    spec.spin_storage_us = cfg.experiment.spin_storage_us;

    for (const auto& g : run_groups(cfg)) {
        spec.cell_a = g.cell_a;
        spec.cell_b = g.cell_b > 0 ? g.cell_b : g.cell_a;
        if (cfg.experiment.kind == ExperimentKind::DualTimeBin) {
            for (int k = 0; k < cfg.experiment.phase_points; ++k) {
                double dphi = dual_phase(cfg, k);
                ExpectedTimeline t = run_dual_sequence(spec, cfg.array, dphi);
                emit(t, g.label, "", "ph" + two_digits(k), dphi, true);
            }
            continue;
        }
        BasisLabel basis = cfg.experiment.kind == ExperimentKind::Path
                               ? BasisLabel::Path
                               : BasisLabel::TimeBin;
        for (StateName s : cfg.experiment.states) {
            spec.prepared = canonical_state(s, basis);
            for (const auto& setting : analysis_settings(cfg.experiment.kind)) {
                spec.measurement = setting.meas;
                ExpectedTimeline t = cfg.experiment.kind == ExperimentKind::Path
                                         ? run_path_sequence(spec, cfg.array)
                                         : run_timebin_sequence(spec, cfg.array);
                emit(t, g.label, to_string(s), setting.label, 0.0, false);
            }
        }
    }

    json manifest;
    manifest["schema"] = "qmem-run-1";
    manifest["kind"] = to_string(cfg.experiment.kind);
    manifest["seed"] = cfg.sampling.seed;
    manifest["cycles"] = cfg.sampling.cycles;
    manifest["repeats_per_cycle"] = cfg.experiment.repeats_per_cycle;
    manifest["n_trials"] = n_trials;
    manifest["bin_width_ns"] = cfg.sampling.bin_width_ns;
    manifest["nbar"] = cfg.experiment.nbar;
    manifest["spin_storage_us"] = cfg.experiment.spin_storage_us;
    manifest["n_cells"] = cfg.array.n_cells();
    manifest["files"] = files;
    result.manifest_path = (fs::path(out_dir) / "manifest.json").string();
    write_text(result.manifest_path, manifest.dump(2) + "\n");
    return result;
}

// ---- analyze ----------------------------------------------------------------

namespace {

TomographyInput tomography_input(const RunConfig& cfg, const HistSet& hists,
                                 const RunGroup& g, StateName state, double window_ns) {
    TomographyInput in;
    in.t_window_ns = window_ns;
    in.noise_rate_per_ns = group_noise_rate(cfg.array, g.cell_a,
                                            g.cell_b > 0 ? g.cell_b : g.cell_a);
    const std::string state_str = to_string(state);

    if (cfg.experiment.kind == ExperimentKind::Path) {
        double center = slot_center_ns(cfg.array, 0);
        for (int k = 0; k < 6; ++k) {
            const TrialHistogram& h =
                hists.get(g.label, state_str, to_string(kCardinalStates[k]));
            in.counts[static_cast<std::size_t>(k)] =
                static_cast<double>(windowed_counts(h, window_ns, center).counts);
            in.n_trials = static_cast<double>(h.n_trials);
        }
        return in;
    }

    // Time-bin: the "0" acquisition is gated on the early slot, everything
    // else on the late/central one (the late pole of the full readout and
    // the interference peak of the phase settings share that position).
    for (int k = 0; k < 6; ++k) {
        const TrialHistogram& h =
            hists.get(g.label, state_str, to_string(kCardinalStates[k]));
        double center = slot_center_ns(cfg.array, k == 0 ? 0 : 1);
        in.counts[static_cast<std::size_t>(k)] =
            static_cast<double>(windowed_counts(h, window_ns, center).counts);
        in.n_trials = static_cast<double>(h.n_trials);
    }
    return in;
}

} // namespace

AnalyzeResult analyze_run(const RunConfig& cfg, const std::string& hist_dir,
                          const std::string& out_dir, double window_override_ns) {
    cfg.validate();
    if (cfg.experiment.kind == ExperimentKind::DualTimeBin)
        throw UsageError("dual runs are analyzed with the fringe pipeline");
    HistSet hists = load_run_dir(hist_dir, cfg.experiment.kind);

    AnalyzeResult result;
    result.kind = cfg.experiment.kind;
    result.headline_window_ns =
        window_override_ns > 0.0 ? window_override_ns : cfg.analysis.default_window_ns;
    const double headline = result.headline_window_ns;
    const std::vector<double> windows = window_ladder(cfg, headline);
    const BasisLabel basis = cfg.experiment.kind == ExperimentKind::Path
                                 ? BasisLabel::Path
                                 : BasisLabel::TimeBin;
    const ReconstructOptions opt{cfg.analysis.subtract_noise_baseline};

    json bound_entries = json::array();
    std::map<std::string, std::string> rho_json; // file name -> payload
    std::uint64_t mc_counter = 0;

    for (const auto& g : run_groups(cfg)) {
        // Headline window: per-state fidelity estimates and density matrices.
        for (StateName s : cfg.experiment.states) {
            TomographyInput in = tomography_input(cfg, hists, g, s, headline);
            QubitState target = canonical_state(s, basis);
            FidelityEstimate est =
                mc_fidelity(in, target, cfg.analysis.n_mc,
                            derive_stream(cfg.analysis.mc_seed, mc_counter++), opt);
            result.fidelities.push_back({g.label, s, headline, est});
            rho_json["rho_" + std::string(to_string(cfg.experiment.kind)) + "_" +
                     g.label + "_" + to_string(s) + ".json"] =
                reconstruct(in, opt).to_json();
        }

        // Window ladder: group means, bounds, violation scores.
        for (double w : windows) {
            std::vector<TomographyInput> inputs;
            std::vector<QubitState> targets;
            for (StateName s : cfg.experiment.states) {
                inputs.push_back(tomography_input(cfg, hists, g, s, w));
                targets.push_back(canonical_state(s, basis));
            }
            GroupMc mc =
                mc_group_mean(inputs, targets, cfg.analysis.n_mc,
                              derive_stream(cfg.analysis.mc_seed, 0xF1D0 + mc_counter++),
                              opt);
            double p_succ = retrieval_probability(cfg.array, g.cell_a,
                                                  g.cell_b > 0 ? g.cell_b : g.cell_a, w);
            BoundResult bound = classical_bound(cfg.experiment.nbar, p_succ);
            Violation v = violation(mc.fbar, mc.err_plus, mc.err_minus, bound.f_b);

            GroupWindowSummary sum;
            sum.group = g.label;
            sum.window_ns = w;
            sum.fbar = mc.fbar;
            sum.err_plus = mc.err_plus;
            sum.err_minus = mc.err_minus;
            sum.nbar = cfg.experiment.nbar;
            sum.p_succ = p_succ;
            sum.f_b = bound.f_b;
            sum.s = v.s;
            sum.sigma = v.sigma;
            result.summaries.push_back(sum);
            bound_entries.push_back(bound_entry(cfg.experiment.kind, g.label, w, bound));
        }
    }

    if (out_dir.empty()) return result;
    ensure_dir(out_dir);

    std::ostringstream fid;
    fid << "kind,group,state,window_ns,fidelity,err_plus,err_minus\n";
    for (const auto& r : result.fidelities)
        fid << to_string(result.kind) << ',' << r.group << ',' << to_string(r.state)
            << ',' << fmt_num(r.window_ns) << ',' << fmt_num(r.estimate.f_hat) << ','
            << fmt_num(r.estimate.err_plus) << ',' << fmt_num(r.estimate.err_minus)
            << '\n';
    write_text((fs::path(out_dir) / "fidelities.csv").string(), fid.str());
    result.files.push_back("fidelities.csv");

    std::ostringstream vio;
    vio << "kind,group,window_ns,fbar,err_plus,err_minus,nbar,p_succ,f_b,s,sigma\n";
    for (const auto& r : result.summaries)
        vio << to_string(result.kind) << ',' << r.group << ',' << fmt_num(r.window_ns)
            << ',' << fmt_num(r.fbar) << ',' << fmt_num(r.err_plus) << ','
            << fmt_num(r.err_minus) << ',' << fmt_num(r.nbar) << ','
            << fmt_num(r.p_succ) << ',' << fmt_num(r.f_b) << ',' << fmt_num(r.s) << ','
            << fmt_num(r.sigma) << '\n';
    write_text((fs::path(out_dir) / "violations.csv").string(), vio.str());
    result.files.push_back("violations.csv");

    json bound_doc = {{"schema", "qmem-bound-1"}, {"entries", bound_entries}};
    write_text((fs::path(out_dir) / "bound.json").string(), bound_doc.dump(2) + "\n");
    result.files.push_back("bound.json");

    for (const auto& [name, payload] : rho_json) {
        write_text((fs::path(out_dir) / name).string(), payload + "\n");
        result.files.push_back(name);
    }

    json manifest;
    manifest["schema"] = "qmem-analysis-1";
    manifest["kind"] = to_string(result.kind);
    manifest["headline_window_ns"] = headline;
    manifest["files"] = result.files;
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return result;
}

// ---- fringe -----------------------------------------------------------------

FringeResult fringe_run(const RunConfig& cfg, const std::string& hist_dir,
                        const std::string& out_dir, double window_override_ns) {
    cfg.validate();
    if (cfg.experiment.kind != ExperimentKind::DualTimeBin)
        throw UsageError("fringe analysis expects a dual run configuration");
    HistSet hists = load_run_dir(hist_dir, cfg.experiment.kind);

    FringeResult result;
    result.window_ns =
        window_override_ns > 0.0 ? window_override_ns : cfg.analysis.default_window_ns;
    double center = slot_center_ns(cfg.array, 1);

    for (const auto& g : run_groups(cfg)) {
        std::vector<FringePoint> points;
        for (int k = 0; k < cfg.experiment.phase_points; ++k) {
            std::string setting = "ph" + two_digits(k);
            const TrialHistogram& h = hists.get(g.label, "", setting);
            auto it = hists.dphi.find(HistSet::key(g.label, "", setting));
            if (it == hists.dphi.end())
                throw UsageError("manifest lacks the phase of " + g.label + " " + setting);
            WindowCounts wc = windowed_counts(h, result.window_ns, center);
            FringePoint p;
            p.dphi_rad = it->second;
            p.c_s = wc.c_s;
            // Poisson error on the windowed counts; keep a one-count floor so
            // empty windows do not claim zero uncertainty.
            p.sigma = std::sqrt(static_cast<double>(std::max<std::uint64_t>(wc.counts, 1))) /
                      static_cast<double>(h.n_trials);
            points.push_back(p);
        }
        GroupFringe gf;
        gf.group = g.label;
        gf.window_ns = result.window_ns;
        gf.n_points = static_cast<int>(points.size());
        gf.fit = fit_fringe(points);
        result.groups.push_back(gf);
    }

    if (out_dir.empty()) return result;
    ensure_dir(out_dir);

    std::ostringstream csv;
    csv << "kind,group,window_ns,n_points,amplitude,visibility,visibility_err,"
           "phi0,phi0_err,chi2,dof\n";
    for (const auto& gf : result.groups)
        csv << "dual," << gf.group << ',' << fmt_num(gf.window_ns) << ','
            << gf.n_points << ',' << fmt_num(gf.fit.amplitude) << ','
            << fmt_num(gf.fit.visibility) << ',' << fmt_num(gf.fit.visibility_err)
            << ',' << fmt_num(gf.fit.phi0) << ',' << fmt_num(gf.fit.phi0_err) << ','
            << fmt_num(gf.fit.chi2) << ',' << gf.fit.dof << '\n';
    write_text((fs::path(out_dir) / "fringe.csv").string(), csv.str());
    result.files.push_back("fringe.csv");

    json manifest;
    manifest["schema"] = "qmem-analysis-1";
    manifest["kind"] = "dual";
    manifest["headline_window_ns"] = result.window_ns;
    manifest["files"] = result.files;
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return result;
}

// ---- bound ------------------------------------------------------------------

std::vector<GroupWindowSummary> bound_run(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::vector<GroupWindowSummary> out;
    json entries = json::array();
    for (const auto& g : run_groups(cfg)) {
        for (double w : window_ladder(cfg, cfg.analysis.default_window_ns)) {
            double p_succ = retrieval_probability(cfg.array, g.cell_a,
                                                  g.cell_b > 0 ? g.cell_b : g.cell_a, w);
            BoundResult b = classical_bound(cfg.experiment.nbar, p_succ);
            GroupWindowSummary sum;
            sum.group = g.label;
            sum.window_ns = w;
            sum.nbar = b.nbar;
            sum.p_succ = b.p_succ;
            sum.f_b = b.f_b;
            out.push_back(sum);
            entries.push_back(bound_entry(cfg.experiment.kind, g.label, w, b));
        }
    }
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        json doc = {{"schema", "qmem-bound-1"}, {"entries", entries}};
        write_text((fs::path(out_dir) / "bound.json").string(), doc.dump(2) + "\n");
    }
    return out;
}

// ---- report -----------------------------------------------------------------

namespace {

// Append CSV rows (minus the header) from `text` onto `sink`; the header
// must match what the first contributor established.
void merge_csv(std::map<std::string, std::string>& sink, const std::string& name,
               const std::string& text) {
    auto nl = text.find('\n');
    if (nl == std::string::npos)
        throw UsageError("'" + name + "' is not a CSV table");
    std::string header = text.substr(0, nl + 1);
    auto it = sink.find(name);
    if (it == sink.end())
        sink[name] = text;
    else {
        if (it->second.compare(0, header.size(), header) != 0)
            throw UsageError("'" + name + "' has mismatched columns across inputs");
        it->second += text.substr(nl + 1);
    }
}

} // namespace

std::vector<std::string> report_run(const std::vector<std::string>& analysis_dirs,
                                    const std::string& out_dir) {
    if (analysis_dirs.empty())
        throw UsageError("report needs at least one analysis directory");
    if (out_dir.empty())
        throw UsageError("report needs an output directory");

    std::map<std::string, std::string> tables; // csv name -> merged text
    json bound_entries = json::array();
    std::map<std::string, std::string> rho_files;
    json inputs = json::array();

    for (const auto& dir : analysis_dirs) {
        fs::path manifest = fs::path(dir) / "manifest.json";
        if (!fs::exists(manifest))
            throw UsageError("'" + dir + "' has no manifest.json; not an analysis directory");
        json m = read_json(manifest.string());
        if (m.value("schema", "") != "qmem-analysis-1")
            throw UsageError("'" + dir + "' was not produced by analyze or fringe");
        inputs.push_back({{"dir", dir},
                          {"kind", m.value("kind", "")},
                          {"headline_window_ns", m.value("headline_window_ns", 0.0)}});
        for (const auto& f : m.at("files")) {
            std::string name = f.get<std::string>();
            fs::path src = fs::path(dir) / name;
            if (name == "manifest.json") continue;
            if (name.size() > 4 && name.compare(name.size() - 4, 4, ".csv") == 0) {
                merge_csv(tables, name, read_text(src.string()));
            } else if (name == "bound.json") {
                json b = read_json(src.string());
                for (const auto& e : b.at("entries")) bound_entries.push_back(e);
            } else if (name.rfind("rho_", 0) == 0) {
                std::string target = name;
                int suffix = 2;
                while (rho_files.count(target)) {
                    target = name.substr(0, name.size() - 5) + "_" +
                             std::to_string(suffix++) + ".json";
                }
                rho_files[target] = read_text(src.string());
            }
        }
    }

    ensure_dir(out_dir);
    std::vector<std::string> written;
    for (const auto& [name, text] : tables) {
        write_text((fs::path(out_dir) / name).string(), text);
        written.push_back(name);
    }
    if (!bound_entries.empty()) {
        json doc = {{"schema", "qmem-bound-1"}, {"entries", bound_entries}};
        write_text((fs::path(out_dir) / "bound.json").string(), doc.dump(2) + "\n");
        written.push_back("bound.json");
    }
    for (const auto& [name, text] : rho_files) {
        write_text((fs::path(out_dir) / name).string(), text);
        written.push_back(name);
    }

    json report;
    report["schema"] = "qmem-report-1";
    report["inputs"] = inputs;
    report["files"] = written;
    write_text((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
    written.push_back("report.json");
    return written;
}

} // namespace qmem
