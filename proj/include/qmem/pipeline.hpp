#pragma once

#include <string>
#include <vector>

#include "qmem/bound.hpp"
#include "qmem/config.hpp"
#include "qmem/fringe.hpp"
#include "qmem/sampler.hpp"
#include "qmem/tomography.hpp"

namespace qmem {

// ---- simulate -------------------------------------------------------------

struct SimulateResult {
    std::string manifest_path;
    std::vector<std::string> files; // histogram files, manifest order
};

// Sample every histogram the configured run produces and write them plus a
// manifest.json into out_dir. Trials per histogram = cycles *
// repeats_per_cycle. Deterministic: the same config and seed reproduce every
// output byte.
SimulateResult simulate_run(const RunConfig& cfg, const std::string& out_dir);

// ---- analyze --------------------------------------------------------------

struct StateFidelity {
    std::string group; // "pair05-06" or "cell07"
    StateName state = StateName::Zero;
    double window_ns = 0.0;
    FidelityEstimate estimate;
};

struct GroupWindowSummary {
    std::string group;
    double window_ns = 0.0;
    double fbar = 0.0; // mean fidelity over prepared states
    double err_plus = 0.0;
    double err_minus = 0.0;
    double nbar = 0.0;
    double p_succ = 0.0; // heralded retrieval probability into the window
    double f_b = 0.0;    // classical measure-and-prepare bound at (nbar, p_succ)
    double s = 0.0;      // violation score (fbar - f_b) / sigma
    double sigma = 0.0;
};

struct AnalyzeResult {
    ExperimentKind kind = ExperimentKind::Path;
    double headline_window_ns = 0.0;
    std::vector<StateFidelity> fidelities;     // headline window only
    std::vector<GroupWindowSummary> summaries; // full window ladder
    std::vector<std::string> files;
};

// Tomography + bound comparison over a directory written by simulate_run.
// window_override_ns > 0 replaces the config's headline window. Writes
// fidelities.csv, violations.csv, bound.json, rho_<group>_<state>.json and
// manifest.json into out_dir (out_dir empty: nothing written).
AnalyzeResult analyze_run(const RunConfig& cfg, const std::string& hist_dir,
                          const std::string& out_dir, double window_override_ns = 0.0);

// ---- fringe ---------------------------------------------------------------

struct GroupFringe {
    std::string group;
    double window_ns = 0.0;
    int n_points = 0;
    FringeFit fit;
};

struct FringeResult {
    double window_ns = 0.0;
    std::vector<GroupFringe> groups;
    std::vector<std::string> files;
};

// Interference-visibility fits for a dual-readout run directory. Writes
// fringe.csv and manifest.json into out_dir.
FringeResult fringe_run(const RunConfig& cfg, const std::string& hist_dir,
                        const std::string& out_dir, double window_override_ns = 0.0);

// ---- bound ----------------------------------------------------------------

// Bound table for the configured run: every group and analysis window.
// Writes bound.json when out_dir is non-empty.
std::vector<GroupWindowSummary> bound_run(const RunConfig& cfg,
                                          const std::string& out_dir);

// ---- report ---------------------------------------------------------------

// Merge one or more analysis/fringe output directories into a single report
// directory: concatenated tables, merged bound.json, copied density
// matrices and a report.json summary.
std::vector<std::string> report_run(const std::vector<std::string>& analysis_dirs,
                                    const std::string& out_dir);

// Helpers shared with the CLI and tests.
std::string group_label(ExperimentKind kind, int cell_a, int cell_b);
std::string setting_label(const MeasSetting& m);

} // namespace qmem
