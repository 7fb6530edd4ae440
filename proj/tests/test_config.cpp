#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "qmem/errors.hpp"
#include "qmem/pipeline.hpp"

using namespace qmem;

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// Fresh scratch directory per test-case name.
std::string scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "qmem_config_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string error_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("per-kind defaults") {
    RunConfig p = default_run_config(ExperimentKind::Path);
    CHECK(p.experiment.nbar == doctest::Approx(1.10));
    CHECK(p.experiment.spin_storage_us == doctest::Approx(8.0));
    CHECK(p.experiment.repeats_per_cycle == 51);
    CHECK(p.experiment.pairs.size() == 5);
    CHECK(p.experiment.states.size() == 6);
    CHECK(p.sampling.cycles == 13000);
    CHECK(p.sampling.seed == 20260816);
    CHECK(p.analysis.default_window_ns == doctest::Approx(270.0));
    CHECK(p.analysis.windows_ns.size() == 9);
    CHECK(p.analysis.n_mc == 1000);
    CHECK(!p.analysis.subtract_noise_baseline);
    CHECK_NOTHROW(p.validate());

    RunConfig t = default_run_config(ExperimentKind::TimeBin);
    CHECK(t.experiment.nbar == doctest::Approx(0.94));
    CHECK(t.experiment.spin_storage_us == doctest::Approx(11.0));
    CHECK(t.experiment.repeats_per_cycle == 41);
    CHECK(t.experiment.cells.size() == 10);
    CHECK(t.analysis.default_window_ns == doctest::Approx(300.0));
    CHECK_NOTHROW(t.validate());

    RunConfig d = default_run_config(ExperimentKind::DualTimeBin);
    CHECK(d.experiment.nbar == doctest::Approx(0.94));
    CHECK(d.experiment.spin_storage_us == doctest::Approx(8.0));
    CHECK(d.experiment.phase_points == 13);
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("a minimal config inherits the kind's defaults") {
    RunConfig cfg = parse_config("[experiment]\nkind = \"path\"\n", "inline");
    RunConfig def = default_run_config(ExperimentKind::Path);
    CHECK(cfg.experiment.kind == ExperimentKind::Path);
    CHECK(cfg.experiment.nbar == doctest::Approx(def.experiment.nbar));
    CHECK(cfg.experiment.pairs == def.experiment.pairs);
    CHECK(cfg.sampling.seed == def.sampling.seed);
    CHECK(spin_wave_efficiency(cfg.array.cell(5)) == doctest::Approx(0.067).epsilon(1e-9));
    CHECK(cfg.array.output_broadening_ns == doctest::Approx(def.array.output_broadening_ns));
}

TEST_CASE("config keys override defaults across all sections") {
    const char* text =
        "# device under test\n"
        "[experiment]\n"
        "kind = \"dual\"\n"
        "nbar = 0.8\n"
        "spin_storage_us = 9.5\n"
        "pairs = \"1-2,5-6\"\n"
        "phase_points = 9\n"
        "repeats_per_cycle = 11\n"
        "\n"
        "[array]\n"
        "profile = \"flat\"\n"
        "noise_rate_per_ns = 1e-7\n"
        "output_broadening_ns = 400\n"
        "eta_detection = 0.06\n"
        "\n"
        "[cell.3]\n"
        "eta_afc = 0.05   # trimmed comb\n"
        "eta_demux = 0.35\n"
        "\n"
        "[sampling]\n"
        "cycles = 500\n"
        "seed = 99\n"
        "bin_width_ns = 5\n"
        "\n"
        "[analysis]\n"
        "windows_ns = [270, 865]\n"
        "default_window_ns = 865\n"
        "n_mc = 50\n"
        "mc_seed = 3\n"
        "subtract_noise_baseline = true\n";
    RunConfig cfg = parse_config(text, "inline");
    CHECK(cfg.experiment.kind == ExperimentKind::DualTimeBin);
    CHECK(cfg.experiment.nbar == doctest::Approx(0.8));
    CHECK(cfg.experiment.spin_storage_us == doctest::Approx(9.5));
    REQUIRE(cfg.experiment.pairs.size() == 2);
    CHECK(cfg.experiment.pairs[0] == std::pair<int, int>(1, 2));
    CHECK(cfg.experiment.pairs[1] == std::pair<int, int>(5, 6));
    CHECK(cfg.experiment.phase_points == 9);
    CHECK(cfg.experiment.repeats_per_cycle == 11);
    CHECK(cfg.array.cell(1).eta_afc == doctest::Approx(0.0625)); // flat profile
    CHECK(cfg.array.cell(3).eta_afc == doctest::Approx(0.05));
    CHECK(cfg.array.cell(3).eta_demux == doctest::Approx(0.35));
    CHECK(cfg.array.cell(4).eta_demux == doctest::Approx(0.4));
    CHECK(cfg.array.cell(7).noise_rate_per_ns == doctest::Approx(1e-7));
    CHECK(cfg.array.output_broadening_ns == doctest::Approx(400.0)); // not calibrated
    CHECK(cfg.array.eta_detection == doctest::Approx(0.06));
    CHECK(cfg.sampling.cycles == 500);
    CHECK(cfg.sampling.seed == 99);
    CHECK(cfg.sampling.bin_width_ns == doctest::Approx(5.0));
    REQUIRE(cfg.analysis.windows_ns.size() == 2);
    CHECK(cfg.analysis.default_window_ns == doctest::Approx(865.0));
    CHECK(cfg.analysis.n_mc == 50);
    CHECK(cfg.analysis.mc_seed == 3);
    CHECK(cfg.analysis.subtract_noise_baseline);
}

TEST_CASE("state and cell selections parse") {
    RunConfig cfg = parse_config("[experiment]\nkind = \"timebin\"\n"
                                 "cells = \"3,7\"\nstates = \"0,X\"\n",
                                 "inline");
    REQUIRE(cfg.experiment.cells.size() == 2);
    CHECK(cfg.experiment.cells[0] == 3);
    CHECK(cfg.experiment.cells[1] == 7);
    REQUIRE(cfg.experiment.states.size() == 2);
    CHECK(cfg.experiment.states[0] == StateName::Zero);
    CHECK(cfg.experiment.states[1] == StateName::PlusX);
}

TEST_CASE("config rejections carry the key name and the line") {
    auto parse = [](const std::string& text) {
        return [text] { parse_config(text, "inline"); };
    };

    std::string msg = error_message(
        parse("[experiment]\nkind = \"path\"\nfoo = 3\n"));
    CHECK(contains(msg, "experiment.foo"));
    CHECK(contains(msg, "inline:3"));

    CHECK_THROWS_AS(parse_config("[sampling]\ncycles = 10\n", "inline"), ConfigError);
    CHECK(contains(error_message(parse("[sampling]\ncycles = 10\n")),
                   "experiment.kind is required"));

    CHECK_THROWS_AS(parse_config("[experiment]\nkind = \"laser\"\n", "inline"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = \"path\"\nnbar = 1\nnbar = 2\n",
                                 "inline"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("kind = \"path\"\n", "inline"), ConfigError);
    CHECK_THROWS_AS(
        parse_config("[experiment]\nkind = \"path\"\n[analysis]\nwindows_ns = [[1]]\n",
                     "inline"),
        ConfigError);
    CHECK(contains(error_message(parse("[experiment]\nkind = \"path\npairs = \"all\"\n")),
                   "inline:2"));
    CHECK_THROWS_AS(parse_config("[experiment\nkind = \"path\"\n", "inline"), ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind\n", "inline"), ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = \"path\"\nstates = \"Q\"\n",
                                 "inline"),
                    ConfigError);
}

TEST_CASE("semantic validation failures are config errors") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = \"path\"\nnbar = -1\n", "inline"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = \"path\"\npairs = \"5-5\"\n",
                                 "inline"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config("[experiment]\nkind = \"path\"\n[analysis]\nwindows_ns = [2000]\n",
                     "inline"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config("[experiment]\nkind = \"path\"\n[analysis]\nn_mc = 1\n", "inline"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config("[experiment]\nkind = \"path\"\nspin_storage_us = 60\n", "inline"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config("[experiment]\nkind = \"dual\"\nphase_points = 4\n", "inline"),
        ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/qmem.toml"), ConfigError);
}

TEST_CASE("kind names round-trip") {
    CHECK(experiment_kind_from_string("path") == ExperimentKind::Path);
    CHECK(experiment_kind_from_string("timebin") == ExperimentKind::TimeBin);
    CHECK(experiment_kind_from_string("dual") == ExperimentKind::DualTimeBin);
    CHECK(std::string(to_string(ExperimentKind::Path)) == "path");
    CHECK(std::string(to_string(ExperimentKind::TimeBin)) == "timebin");
    CHECK(std::string(to_string(ExperimentKind::DualTimeBin)) == "dual");
    CHECK_THROWS_AS(experiment_kind_from_string("laser"), ConfigError);
}

TEST_CASE("group and setting labels") {
    CHECK(group_label(ExperimentKind::Path, 5, 6) == "pair05-06");
    CHECK(group_label(ExperimentKind::DualTimeBin, 1, 2) == "pair01-02");
    CHECK(group_label(ExperimentKind::TimeBin, 7, 0) == "cell07");
    CHECK(setting_label(MeasSetting::projector(
              canonical_state(StateName::MinusY, BasisLabel::Path))) == "-Y");
    CHECK(setting_label(MeasSetting::phase(0.0)) == "ph0");
    CHECK(setting_label(MeasSetting::phase(-3.14159265358979)) == "ph-180");
    QubitState skew{std::sqrt(0.9), std::sqrt(0.1), BasisLabel::Path};
    CHECK_THROWS_AS(setting_label(MeasSetting::projector(skew)), UsageError);
}

TEST_CASE("path runs simulate and analyze end to end") {
    RunConfig cfg = parse_config("[experiment]\nkind = \"path\"\npairs = \"5-6\"\n"
                                 "[sampling]\ncycles = 8000\n"
                                 "[analysis]\nwindows_ns = [270, 865]\nn_mc = 300\n",
                                 "inline");
    std::string run1 = scratch("path_run1");
    std::string run2 = scratch("path_run2");
    SimulateResult s1 = simulate_run(cfg, run1);
    SimulateResult s2 = simulate_run(cfg, run2);
    CHECK(s1.files.size() == 36); // 1 pair x 6 states x 6 settings
    REQUIRE(s1.files.size() == s2.files.size());
    for (std::size_t i = 0; i < s1.files.size(); ++i) {
        CHECK(slurp((fs::path(run1) / s1.files[i]).string()) ==
              slurp((fs::path(run2) / s2.files[i]).string()));
    }
    CHECK(slurp(s1.manifest_path) == slurp(s2.manifest_path));

    std::string out1 = scratch("path_out1");
    std::string out2 = scratch("path_out2");
    AnalyzeResult a = analyze_run(cfg, run1, out1);
    analyze_run(cfg, run1, out2);
    CHECK(slurp((fs::path(out1) / "fidelities.csv").string()) ==
          slurp((fs::path(out2) / "fidelities.csv").string()));

    CHECK(a.kind == ExperimentKind::Path);
    CHECK(a.headline_window_ns == doctest::Approx(270.0));
    REQUIRE(a.fidelities.size() == 6);
    for (const auto& f : a.fidelities) {
        CHECK(f.group == "pair05-06");
        CHECK(f.estimate.f_hat > 0.85);
        CHECK(f.estimate.f_hat <= 1.0);
        CHECK(f.estimate.err_plus >= 0.0);
    }
    REQUIRE(a.summaries.size() == 2);
    const GroupWindowSummary& head = a.summaries[0];
    CHECK(head.window_ns == doctest::Approx(270.0));
    CHECK(head.fbar > 0.89);
    CHECK(head.fbar < 0.98);
    CHECK(head.p_succ > 5e-3);
    CHECK(head.p_succ < 2e-2);
    CHECK(head.f_b > 0.84);
    CHECK(head.f_b < 0.88);
    CHECK(head.s > 1.0);
    CHECK(head.sigma > 0.0);

    for (const char* name :
         {"fidelities.csv", "violations.csv", "bound.json", "manifest.json"})
        CHECK(fs::exists(fs::path(out1) / name));
    CHECK(line_count(slurp((fs::path(out1) / "fidelities.csv").string())) == 7);
    CHECK(line_count(slurp((fs::path(out1) / "violations.csv").string())) == 3);
    CHECK(fs::exists(fs::path(out1) / "rho_path_pair05-06_X.json"));

    // Window override replaces the headline.
    AnalyzeResult wide = analyze_run(cfg, run1, "", 865.0);
    CHECK(wide.headline_window_ns == doctest::Approx(865.0));
    REQUIRE(!wide.fidelities.empty());
    CHECK(wide.fidelities[0].window_ns == doctest::Approx(865.0));

    // Kind mismatch between config and run directory.
    RunConfig tb = default_run_config(ExperimentKind::TimeBin);
    CHECK_THROWS_AS(analyze_run(tb, run1, ""), UsageError);
    CHECK_THROWS_AS(analyze_run(cfg, scratch("not_a_run"), ""), UsageError);
}

TEST_CASE("time-bin runs simulate and analyze end to end") {
    RunConfig cfg = parse_config("[experiment]\nkind = \"timebin\"\ncells = \"5\"\n"
                                 "[sampling]\ncycles = 8000\n"
                                 "[analysis]\nwindows_ns = [300]\nn_mc = 300\n",
                                 "inline");
    std::string run = scratch("tb_run");
    SimulateResult s = simulate_run(cfg, run);
    CHECK(s.files.size() == 36); // 1 cell x 6 states x 6 settings

    std::string out = scratch("tb_out");
    AnalyzeResult a = analyze_run(cfg, run, out);
    CHECK(a.kind == ExperimentKind::TimeBin);
    REQUIRE(a.fidelities.size() == 6);
    REQUIRE(a.summaries.size() == 1);
    CHECK(a.summaries[0].group == "cell05");
    CHECK(a.summaries[0].fbar > 0.84);
    CHECK(a.summaries[0].fbar < 0.95);
    CHECK(a.summaries[0].f_b > 0.81);
    CHECK(a.summaries[0].f_b < 0.86);
    CHECK(a.summaries[0].s > 0.5);
    CHECK(fs::exists(fs::path(out) / "rho_timebin_cell05_-Y.json"));
}

TEST_CASE("dual runs simulate and fit a fringe end to end") {
    RunConfig cfg = parse_config("[experiment]\nkind = \"dual\"\npairs = \"5-6\"\n"
                                 "phase_points = 7\n"
                                 "[sampling]\ncycles = 20000\n"
                                 "[analysis]\nwindows_ns = [300]\n",
                                 "inline");
    std::string run = scratch("dual_run");
    SimulateResult s = simulate_run(cfg, run);
    CHECK(s.files.size() == 7);

    std::string out = scratch("dual_out");
    FringeResult f = fringe_run(cfg, run, out);
    CHECK(f.window_ns == doctest::Approx(300.0));
    REQUIRE(f.groups.size() == 1);
    CHECK(f.groups[0].group == "pair05-06");
    CHECK(f.groups[0].n_points == 7);
    CHECK(f.groups[0].fit.visibility > 0.78);
    CHECK(f.groups[0].fit.visibility <= 1.0);
    CHECK(std::abs(f.groups[0].fit.phi0) < 0.3);
    CHECK(fs::exists(fs::path(out) / "fringe.csv"));

    // Tomography pipelines refuse interference runs and vice versa.
    CHECK_THROWS_AS(analyze_run(cfg, run, ""), UsageError);
    RunConfig path_cfg = default_run_config(ExperimentKind::Path);
    CHECK_THROWS_AS(fringe_run(path_cfg, run, ""), UsageError);
}

TEST_CASE("bound tables cover every group and window") {
    RunConfig cfg = parse_config("[experiment]\nkind = \"path\"\npairs = \"1-2,5-6\"\n"
                                 "[analysis]\nwindows_ns = [270, 865, 1250]\n",
                                 "inline");
    std::string out = scratch("bound_out");
    auto rows = bound_run(cfg, out);
    REQUIRE(rows.size() == 6);
    CHECK(fs::exists(fs::path(out) / "bound.json"));
    // Wider windows catch more of the echo: p_succ rises, the bound falls.
    CHECK(rows[0].window_ns < rows[2].window_ns);
    CHECK(rows[0].p_succ < rows[2].p_succ);
    CHECK(rows[0].f_b > rows[2].f_b);
    // The center pair retrieves more than the edge pair.
    CHECK(rows[3].p_succ > rows[0].p_succ);
    CHECK(rows[3].f_b < rows[0].f_b);
}

TEST_CASE("report merges analysis directories") {
    RunConfig path_cfg =
        parse_config("[experiment]\nkind = \"path\"\npairs = \"5-6\"\nstates = \"0,X\"\n"
                     "[sampling]\ncycles = 2000\n"
                     "[analysis]\nwindows_ns = [270]\nn_mc = 100\n",
                     "inline");
    RunConfig dual_cfg = parse_config("[experiment]\nkind = \"dual\"\npairs = \"5-6\"\n"
                                      "phase_points = 7\n"
                                      "[sampling]\ncycles = 5000\n"
                                      "[analysis]\nwindows_ns = [300]\n",
                                      "inline");
    std::string path_run = scratch("rep_path_run");
    std::string dual_run = scratch("rep_dual_run");
    simulate_run(path_cfg, path_run);
    simulate_run(dual_cfg, dual_run);
    std::string path_out = scratch("rep_path_out");
    std::string dual_out = scratch("rep_dual_out");
    analyze_run(path_cfg, path_run, path_out);
    fringe_run(dual_cfg, dual_run, dual_out);

    std::string rep = scratch("rep_out");
    auto files = report_run({path_out, dual_out}, rep);
    CHECK(fs::exists(fs::path(rep) / "report.json"));
    CHECK(fs::exists(fs::path(rep) / "fidelities.csv"));
    CHECK(fs::exists(fs::path(rep) / "fringe.csv"));
    CHECK(fs::exists(fs::path(rep) / "bound.json"));
    CHECK(line_count(slurp((fs::path(rep) / "fidelities.csv").string())) == 3);
    CHECK(files.size() >= 5);

    // Merging the same analysis twice keeps one header and doubles the rows.
    std::string rep2 = scratch("rep_out2");
    report_run({path_out, path_out}, rep2);
    CHECK(line_count(slurp((fs::path(rep2) / "fidelities.csv").string())) == 5);

    CHECK_THROWS_AS(report_run({}, rep), UsageError);
    CHECK_THROWS_AS(report_run({scratch("rep_empty")}, rep), UsageError);
    CHECK_THROWS_AS(report_run({path_run}, rep), UsageError); // run dir, not analysis
}
