#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "qmem/bound.hpp"
#include "qmem/config.hpp"
#include "qmem/errors.hpp"
#include "qmem/pipeline.hpp"

#include <json.hpp>

namespace {

using namespace qmem;

RunConfig config_for(const std::string& config_path, std::uint64_t seed, bool seed_set,
                     double window, bool window_set) {
    RunConfig cfg = load_config(config_path);
    if (seed_set) cfg.sampling.seed = seed;
    if (window_set) cfg.analysis.default_window_ns = window;
    cfg.validate();
    return cfg;
}

void print_summaries(const AnalyzeResult& result) {
    std::printf("kind=%s window=%.10g ns\n", to_string(result.kind),
                result.headline_window_ns);
    for (const auto& s : result.summaries) {
        if (std::abs(s.window_ns - result.headline_window_ns) > 1e-9) continue;
        std::printf("%s  fbar=%.4f +%.4f/-%.4f  p_succ=%.3e  f_b=%.4f  S=%.2f\n",
                    s.group.c_str(), s.fbar, s.err_plus, s.err_minus, s.p_succ, s.f_b,
                    s.s);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Temporally multiplexed memory-array simulator and analysis"};
    app.require_subcommand(1);

    std::string config_path, out_dir, hist_dir;
    std::vector<std::string> report_dirs;
    std::uint64_t seed = 0;
    double window = 0.0;
    double nbar = 0.0, p_succ = 0.0, f_b_target = 0.0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "run configuration file");
        if (needs_config) c->required();
        sub->add_option("--seed", seed, "override the sampling seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--t-window-ns", window, "override the headline analysis window")
            ->check(CLI::PositiveNumber);
    };

    CLI::App* sim = app.add_subcommand("simulate", "sample a run into histogram files");
    add_common(sim, true);

    CLI::App* ana = app.add_subcommand("analyze",
                                       "tomography, bounds and violations for a run");
    ana->add_option("run_dir", hist_dir, "directory written by simulate")->required();
    add_common(ana, true);

    CLI::App* bnd = app.add_subcommand("bound", "classical measure-and-prepare bound");
    add_common(bnd, false);
    bnd->add_option("--nbar", nbar, "mean photon number for a direct bound query");
    bnd->add_option("--p-succ", p_succ, "success probability for a direct bound query");
    bnd->add_option("--f-b", f_b_target, "bound target; solves for p_succ");

    CLI::App* frg = app.add_subcommand("fringe", "interference-visibility fits");
    frg->add_option("run_dir", hist_dir, "directory written by simulate")->required();
    add_common(frg, true);

    CLI::App* rep = app.add_subcommand("report", "merge analysis outputs into a report");
    rep->add_option("analysis_dirs", report_dirs, "directories written by analyze/fringe")
        ->required();
    rep->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const bool seed_set = sim->count("--seed") + ana->count("--seed") +
                              bnd->count("--seed") + frg->count("--seed") >
                          0;
    const bool window_set = sim->count("--t-window-ns") + ana->count("--t-window-ns") +
                                bnd->count("--t-window-ns") + frg->count("--t-window-ns") >
                            0;

    if (sim->parsed()) {
        if (out_dir.empty())
            throw UsageError("simulate needs --out");
        RunConfig cfg = config_for(config_path, seed, seed_set, window, window_set);
        SimulateResult r = simulate_run(cfg, out_dir);
        std::printf("wrote %zu histograms and %s\n", r.files.size(),
                    r.manifest_path.c_str());
        return 0;
    }

    if (ana->parsed()) {
        RunConfig cfg = config_for(config_path, seed, seed_set, window, window_set);
        if (seed_set) cfg.analysis.mc_seed = seed;
        AnalyzeResult r = analyze_run(cfg, hist_dir, out_dir,
                                      window_set ? window : 0.0);
        print_summaries(r);
        if (!out_dir.empty())
            std::printf("wrote %zu files to %s\n", r.files.size() + 1, out_dir.c_str());
        return 0;
    }

    if (bnd->parsed()) {
        const bool direct = bnd->count("--nbar") > 0;
        if (direct) {
            const bool has_p = bnd->count("--p-succ") > 0;
            const bool has_f = bnd->count("--f-b") > 0;
            if (has_p == has_f)
                throw UsageError("bound --nbar needs exactly one of --p-succ or --f-b");
            if (bnd->count("--f-b") > 0)
                p_succ = solve_p_succ(f_b_target, nbar);
            BoundResult b = classical_bound(nbar, p_succ);
            nlohmann::json alloc = nlohmann::json::array();
            for (const auto& a : b.allocation)
                alloc.push_back({{"n", a.n}, {"weight", a.weight}});
            nlohmann::json doc = {{"nbar", b.nbar},
                                  {"p_succ", b.p_succ},
                                  {"f_b", b.f_b},
                                  {"allocation", alloc}};
            std::printf("%s\n", doc.dump(2).c_str());
            return 0;
        }
        if (config_path.empty())
            throw UsageError("bound needs --config or a direct --nbar query");
        RunConfig cfg = config_for(config_path, seed, seed_set, window, window_set);
        auto rows = bound_run(cfg, out_dir);
        for (const auto& s : rows)
            std::printf("%s  window=%.10g ns  p_succ=%.3e  f_b=%.4f\n", s.group.c_str(),
                        s.window_ns, s.p_succ, s.f_b);
        return 0;
    }

    if (frg->parsed()) {
        RunConfig cfg = config_for(config_path, seed, seed_set, window, window_set);
        FringeResult r = fringe_run(cfg, hist_dir, out_dir, window_set ? window : 0.0);
        for (const auto& g : r.groups)
            std::printf("%s  V=%.4f +/- %.4f  phi0=%.4f  chi2/dof=%.2f\n",
                        g.group.c_str(), g.fit.visibility, g.fit.visibility_err,
                        g.fit.phi0,
                        g.fit.dof > 0 ? g.fit.chi2 / g.fit.dof : 0.0);
        return 0;
    }

    if (rep->parsed()) {
        auto files = report_run(report_dirs, out_dir);
        std::printf("report with %zu files in %s\n", files.size(), out_dir.c_str());
        return 0;
    }

    throw UsageError("no subcommand selected");
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qmem::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const qmem::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const qmem::AnalysisError& e) {
        std::fprintf(stderr, "analysis error: %s\n", e.what());
        return 2;
    } catch (const qmem::ScheduleError& e) {
        std::fprintf(stderr, "schedule error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
