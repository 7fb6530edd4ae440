#include "qmem/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qmem/errors.hpp"
#include "qmem/rng.hpp"

namespace qmem {

namespace {

constexpr const char* kSchema = "qmem-hist-1";

std::string fmt_num(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_num(const std::string& s, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw UsageError(std::string("malformed ") + what + " '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw UsageError(std::string("malformed ") + what + " '" + s + "'");
    return v;
}

} // namespace

std::uint64_t TrialHistogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

void TrialHistogram::set_meta(const std::string& key, const std::string& value) {
    for (auto& kv : metadata)
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    metadata.emplace_back(key, value);
}

const std::string* TrialHistogram::find_meta(const std::string& key) const {
    for (const auto& kv : metadata)
        if (kv.first == key) return &kv.second;
    return nullptr;
}

TrialHistogram sample_trials(const ExpectedTimeline& timeline, std::uint64_t n_trials,
                             std::uint64_t master_seed, std::uint64_t stream_id,
                             double bin_width_ns) {
    if (bin_width_ns <= 0.0)
        throw UsageError("bin width must be positive");
    if (timeline.span_end_ns <= timeline.span_start_ns)
        throw UsageError("timeline span is empty");

    TrialHistogram h;
    h.bin_width_ns = bin_width_ns;
    h.span_start_ns = timeline.span_start_ns;
    h.n_trials = n_trials;
    auto n_bins = static_cast<std::size_t>(
        std::ceil((timeline.span_end_ns - timeline.span_start_ns) / bin_width_ns - 1e-9));
    h.counts.resize(n_bins, 0);

    SplitMix64 rng(derive_stream(master_seed, stream_id));
    double trials = static_cast<double>(n_trials);
    for (std::size_t i = 0; i < n_bins; ++i) {
        double lo = h.bin_start(i);
        double hi = lo + bin_width_ns;
        double mean = timeline.noise_rate_per_ns * bin_width_ns;
        for (const auto& p : timeline.peaks) {
            PulseProfile shifted = timeline.profile;
            shifted.center_ns = p.center_ns;
            mean += p.mean_photons * (profile_cdf(shifted, hi) - profile_cdf(shifted, lo));
        }
        h.counts[i] = poisson_draw(rng, trials * mean);
    }
    return h;
}

std::vector<double> sample_clicks(const ExpectedTimeline& timeline,
                                  std::uint64_t master_seed, std::uint64_t trial_id) {
    SplitMix64 rng(derive_stream(master_seed ^ 0xC11C5ULL, trial_id));
    std::vector<double> clicks;
    for (const auto& p : timeline.peaks) {
        PulseProfile shifted = timeline.profile;
        shifted.center_ns = p.center_ns;
        std::uint64_t n = poisson_draw(rng, p.mean_photons);
        for (std::uint64_t k = 0; k < n; ++k)
            clicks.push_back(profile_quantile(shifted, rng.next_unit()));
    }
    double span = timeline.span_end_ns - timeline.span_start_ns;
    std::uint64_t n_noise = poisson_draw(rng, timeline.noise_rate_per_ns * span);
    for (std::uint64_t k = 0; k < n_noise; ++k)
        clicks.push_back(timeline.span_start_ns + span * rng.next_unit());
    std::sort(clicks.begin(), clicks.end());
    return clicks;
}

WindowCounts windowed_counts(const TrialHistogram& h, double t_window_ns,
                             double center_ns) {
    if (h.counts.empty())
        throw UsageError("histogram is empty");
    if (h.n_trials == 0)
        throw UsageError("histogram has no trials");
    if (t_window_ns < 0.0)
        throw UsageError("window width must be non-negative");
    double lo = center_ns - 0.5 * t_window_ns;
    double hi = center_ns + 0.5 * t_window_ns;
    if (lo < h.span_start_ns - 1e-9 || hi > h.span_end_ns() + 1e-9)
        throw UsageError("analysis window extends beyond the histogram span");

    WindowCounts w;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        double c = h.bin_center(i);
        if (c >= lo && c < hi) w.counts += h.counts[i];
    }
    w.c_s = static_cast<double>(w.counts) / static_cast<double>(h.n_trials);
    return w;
}

TrialHistogram merge_histograms(const TrialHistogram& a, const TrialHistogram& b) {
    if (a.counts.size() != b.counts.size() || a.bin_width_ns != b.bin_width_ns ||
        a.span_start_ns != b.span_start_ns)
        throw UsageError("histograms have incompatible binning");
    TrialHistogram out = a;
    out.n_trials = a.n_trials + b.n_trials;
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += b.counts[i];
    return out;
}

void write_histogram_csv(const TrialHistogram& h, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot open '" + path + "' for writing");
    f << "# schema=" << kSchema << "\n";
    f << "# n_trials=" << h.n_trials << "\n";
    f << "# bin_width_ns=" << fmt_num(h.bin_width_ns) << "\n";
    f << "# span_start_ns=" << fmt_num(h.span_start_ns) << "\n";
    for (const auto& kv : h.metadata)
        f << "# " << kv.first << "=" << kv.second << "\n";
    f << "bin_start_ns,counts\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        f << fmt_num(h.bin_start(i)) << "," << h.counts[i] << "\n";
    if (!f)
        throw UsageError("failed writing '" + path + "'");
}

TrialHistogram read_histogram_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot open histogram file '" + path + "'");
    TrialHistogram h;
    h.counts.clear();
    bool saw_schema = false, saw_header = false;
    std::size_t row = 0;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(line.find_first_not_of(" \t", 1));
            auto eq = body.find('=');
            if (eq == std::string::npos)
                throw UsageError("malformed metadata line in '" + path + "': " + line);
            std::string key = body.substr(0, eq);
            std::string value = body.substr(eq + 1);
            if (key == "schema") {
                if (value != kSchema)
                    throw UsageError("unsupported histogram schema '" + value + "'");
                saw_schema = true;
            } else if (key == "n_trials") {
                h.n_trials = parse_u64(value, "n_trials");
            } else if (key == "bin_width_ns") {
                h.bin_width_ns = parse_num(value, "bin_width_ns");
            } else if (key == "span_start_ns") {
                h.span_start_ns = parse_num(value, "span_start_ns");
            } else {
                h.metadata.emplace_back(key, value);
            }
            continue;
        }
        if (!saw_header) {
            if (line != "bin_start_ns,counts")
                throw UsageError("missing column header in '" + path + "'");
            saw_header = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw UsageError("malformed data row in '" + path + "': " + line);
        double start = parse_num(line.substr(0, comma), "bin start");
        std::uint64_t count = parse_u64(line.substr(comma + 1), "count");
        double expect = h.span_start_ns + static_cast<double>(row) * h.bin_width_ns;
        if (std::abs(start - expect) > 1e-6)
            throw UsageError("non-contiguous bins in '" + path + "' at row " +
                             std::to_string(row));
        h.counts.push_back(count);
        ++row;
    }
    if (!saw_schema)
        throw UsageError("'" + path + "' is not a histogram file (no schema line)");
    if (!saw_header || h.counts.empty())
        throw UsageError("'" + path + "' contains no histogram rows");
    if (h.bin_width_ns <= 0.0)
        throw UsageError("'" + path + "' has a non-positive bin width");
    return h;
}

} // namespace qmem
