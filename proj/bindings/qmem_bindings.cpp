// Python bindings for the main operations: running simulated acquisitions,
// tomography analysis, fringe fits, and the classical fidelity bound.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qmem/bound.hpp"
#include "qmem/config.hpp"
#include "qmem/errors.hpp"
#include "qmem/fringe.hpp"
#include "qmem/pipeline.hpp"
#include "qmem/states.hpp"
#include "qmem/tomography.hpp"

namespace py = pybind11;
using namespace qmem;

namespace {

TomographyInput make_input(const std::array<double, 6>& counts, double window_ns,
                           double n_trials, double noise_rate_per_ns) {
    TomographyInput in;
    in.counts = counts;
    in.t_window_ns = window_ns;
    in.n_trials = n_trials;
    in.noise_rate_per_ns = noise_rate_per_ns;
    return in;
}

py::dict summary_dict(const GroupWindowSummary& s) {
    py::dict d;
    d["group"] = s.group;
    d["window_ns"] = s.window_ns;
    d["fbar"] = s.fbar;
    d["err_plus"] = s.err_plus;
    d["err_minus"] = s.err_minus;
    d["nbar"] = s.nbar;
    d["p_succ"] = s.p_succ;
    d["f_b"] = s.f_b;
    d["s"] = s.s;
    d["sigma"] = s.sigma;
    return d;
}

py::dict fit_dict(const FringeFit& f) {
    py::dict d;
    d["amplitude"] = f.amplitude;
    d["amplitude_err"] = f.amplitude_err;
    d["visibility"] = f.visibility;
    d["visibility_err"] = f.visibility_err;
    d["phi0"] = f.phi0;
    d["phi0_err"] = f.phi0_err;
    d["chi2"] = f.chi2;
    d["dof"] = f.dof;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Photon-counting simulator and analysis for a ten-cell "
              "temporally multiplexed quantum-memory array";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const UsageError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const AnalysisError& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        } catch (const ScheduleError& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def(
        "simulate",
        [](const std::string& config_path, const std::string& out_dir) {
            SimulateResult r = simulate_run(load_config(config_path), out_dir);
            py::dict d;
            d["manifest"] = r.manifest_path;
            d["files"] = r.files;
            return d;
        },
        py::arg("config_path"), py::arg("out_dir"),
        "Sample every histogram of the configured run into out_dir.");

    m.def(
        "analyze",
        [](const std::string& config_path, const std::string& run_dir,
           const std::string& out_dir, double window_ns) {
            AnalyzeResult r =
                analyze_run(load_config(config_path), run_dir, out_dir, window_ns);
            py::list fids;
            for (const auto& f : r.fidelities) {
                py::dict d;
                d["group"] = f.group;
                d["state"] = std::string(to_string(f.state));
                d["window_ns"] = f.window_ns;
                d["fidelity"] = f.estimate.f_hat;
                d["err_plus"] = f.estimate.err_plus;
                d["err_minus"] = f.estimate.err_minus;
                fids.append(d);
            }
            py::list sums;
            for (const auto& s : r.summaries) sums.append(summary_dict(s));
            py::dict d;
            d["headline_window_ns"] = r.headline_window_ns;
            d["fidelities"] = fids;
            d["summaries"] = sums;
            d["files"] = r.files;
            return d;
        },
        py::arg("config_path"), py::arg("run_dir"), py::arg("out_dir") = "",
        py::arg("window_ns") = 0.0,
        "Tomography and bound comparison over a simulated run directory.");

    m.def(
        "fringe",
        [](const std::string& config_path, const std::string& run_dir,
           const std::string& out_dir, double window_ns) {
            FringeResult r = fringe_run(load_config(config_path), run_dir, out_dir, window_ns);
            py::list groups;
            for (const auto& g : r.groups) {
                py::dict d = fit_dict(g.fit);
                d["group"] = g.group;
                d["window_ns"] = g.window_ns;
                d["n_points"] = g.n_points;
                groups.append(d);
            }
            return groups;
        },
        py::arg("config_path"), py::arg("run_dir"), py::arg("out_dir") = "",
        py::arg("window_ns") = 0.0,
        "Interference-visibility fits for a dual-readout run directory.");

    m.def(
        "bound_table",
        [](const std::string& config_path, const std::string& out_dir) {
            py::list rows;
            for (const auto& s : bound_run(load_config(config_path), out_dir))
                rows.append(summary_dict(s));
            return rows;
        },
        py::arg("config_path"), py::arg("out_dir") = "",
        "Classical-bound table for every group and window of a config.");

    m.def(
        "report",
        [](const std::vector<std::string>& analysis_dirs, const std::string& out_dir) {
            return report_run(analysis_dirs, out_dir);
        },
        py::arg("analysis_dirs"), py::arg("out_dir"),
        "Merge analysis/fringe output directories into one report.");

    m.def(
        "classical_bound",
        [](double nbar, double p_succ) { return classical_bound(nbar, p_succ).f_b; },
        py::arg("nbar"), py::arg("p_succ"),
        "Best measure-and-prepare fidelity at mean photon number nbar and "
        "success probability p_succ.");

    m.def("solve_p_succ", &solve_p_succ, py::arg("f_b_target"), py::arg("nbar"),
          py::arg("tol") = 1e-9,
          "Success probability at which the classical bound equals f_b_target.");

    m.def("fock_fidelity", &fock_fidelity, py::arg("n"),
          "Classical bound (n+1)/(n+2) for an exact n-photon input.");

    m.def(
        "fidelity_from_counts",
        [](const std::array<double, 6>& counts, const std::string& target,
           const std::string& basis, double window_ns, double n_trials,
           double noise_rate_per_ns, bool subtract_baseline) {
            BasisLabel b = basis == "timebin" ? BasisLabel::TimeBin : BasisLabel::Path;
            ReconstructOptions opt;
            opt.subtract_noise_baseline = subtract_baseline;
            DensityMatrix rho = reconstruct(
                make_input(counts, window_ns, n_trials, noise_rate_per_ns), opt);
            return fidelity(rho, canonical_state(state_name_from_string(target), b));
        },
        py::arg("counts"), py::arg("target"), py::arg("basis") = "path",
        py::arg("window_ns") = 270.0, py::arg("n_trials") = 0.0,
        py::arg("noise_rate_per_ns") = 0.0, py::arg("subtract_baseline") = false,
        "Reconstruct a state from counts in the setting order 0, 1, X, -X, Y, -Y "
        "and return its fidelity against a cardinal target state.");

    m.def(
        "mc_fidelity",
        [](const std::array<double, 6>& counts, const std::string& target,
           const std::string& basis, std::size_t n_mc, std::uint64_t seed,
           double window_ns, double n_trials, double noise_rate_per_ns,
           bool subtract_baseline) {
            BasisLabel b = basis == "timebin" ? BasisLabel::TimeBin : BasisLabel::Path;
            ReconstructOptions opt;
            opt.subtract_noise_baseline = subtract_baseline;
            FidelityEstimate est = mc_fidelity(
                make_input(counts, window_ns, n_trials, noise_rate_per_ns),
                canonical_state(state_name_from_string(target), b), n_mc, seed, opt);
            py::dict d;
            d["fidelity"] = est.f_hat;
            d["err_plus"] = est.err_plus;
            d["err_minus"] = est.err_minus;
            d["n_mc"] = est.n_mc;
            d["failures"] = est.failures;
            return d;
        },
        py::arg("counts"), py::arg("target"), py::arg("basis") = "path",
        py::arg("n_mc") = 1000, py::arg("seed") = 1, py::arg("window_ns") = 270.0,
        py::arg("n_trials") = 0.0, py::arg("noise_rate_per_ns") = 0.0,
        py::arg("subtract_baseline") = false,
        "Monte-Carlo fidelity estimate with 16/84-percentile error bars.");

    m.def(
        "fit_fringe",
        [](const std::vector<double>& phases, const std::vector<double>& counts,
           const std::vector<double>& sigmas) {
            if (phases.size() != counts.size() ||
                (!sigmas.empty() && sigmas.size() != phases.size()))
                throw UsageError("phases, counts and sigmas must have equal length");
            std::vector<FringePoint> pts(phases.size());
            for (std::size_t i = 0; i < phases.size(); ++i)
                pts[i] = {phases[i], counts[i], sigmas.empty() ? 0.0 : sigmas[i]};
            return fit_dict(fit_fringe(pts));
        },
        py::arg("phases"), py::arg("counts"), py::arg("sigmas") = std::vector<double>{},
        "Fit c = A (1 + V cos(phi + phi0)) to a phase sweep.");

    m.def("closed_form_visibility", &closed_form_visibility, py::arg("s"), py::arg("b"),
          "Noise-diluted visibility s / (s + 2 b).");
}
