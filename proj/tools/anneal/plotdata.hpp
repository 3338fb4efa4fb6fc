#pragma once

// Plot-ready tables built from one or more result directories. Every kind has
// a fixed header; rows are tab-separated, and each table opens with one
// `# source=... config_hash=... seed=...` line per input directory.
//
//   gap          series run s gap
//   pgs          series run s pgs
//   schedules    series run s schedule value
//   histogram    series bin_lo bin_hi count          (per-run scores)
//   boxplot      n count min q1 median q3 max        (per-run scores, grouped by size)
//   approx_ratio series bin_lo bin_hi count          (per-directory median ratio vs baseline)

#include "results.hpp"

#include "qaga/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace anneal {

class PlotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& plot_kinds() {
    static const std::vector<std::string> kinds{"gap", "pgs", "schedules", "histogram", "boxplot", "approx_ratio"};
    return kinds;
}

struct PlotRequest {
    std::vector<std::filesystem::path> results;
    std::string kind;
    int bins{20};
};

namespace detail {

struct Source {
    std::filesystem::path dir;
    std::string label;
    std::optional<json> summary;
    std::optional<json> baseline;
};

inline std::optional<json> read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw PlotError(path.string() + ": " + e.what());
    }
}

inline Source load_source(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw PlotError("results directory not found: " + dir.string());
    Source s;
    s.dir = dir;
    s.label = std::filesystem::path(dir).lexically_normal().filename().string();
    if (s.label.empty()) s.label = std::filesystem::path(dir).lexically_normal().parent_path().filename().string();
    s.summary = read_json(dir / "summary.json");
    s.baseline = read_json(dir / "baseline.json");
    return s;
}

inline void write_provenance(std::ostream& os, const Source& s) {
    const json* doc = s.summary ? &*s.summary : (s.baseline ? &*s.baseline : nullptr);
    os << "# source=" << s.label;
    if (doc) os << " config_hash=" << doc->value("config_hash", "") << " seed=" << doc->value("seed", 0ULL);
    os << '\n';
}

struct TraceTable {
    std::string run;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline TraceTable read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PlotError("cannot read " + path.string());
    TraceTable t;
    t.run = path.stem().string();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (t.columns.empty()) {
            for (std::string c; ls >> c;) t.columns.push_back(c);
            continue;
        }
        std::vector<double> row;
        for (double v; ls >> v;) row.push_back(v);
        if (row.size() != t.columns.size()) throw PlotError(path.string() + ": ragged row");
        t.rows.push_back(std::move(row));
    }
    if (t.columns.size() < 7 || t.columns[0] != "s") throw PlotError(path.string() + ": not a trace table");
    return t;
}

inline std::vector<TraceTable> read_traces(const Source& s) {
    const auto dir = s.dir / "traces";
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir)) {
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (e.path().extension() == ".tsv") files.push_back(e.path());
        }
    }
    if (files.empty()) throw PlotError("no traces under " + dir.string() + " (set emit_traces or run baseline)");
    std::sort(files.begin(), files.end());
    std::vector<TraceTable> out;
    for (const auto& f : files) out.push_back(read_trace(f));
    return out;
}

inline const json& require_summary(const Source& s) {
    if (!s.summary) throw PlotError("missing " + (s.dir / "summary.json").string());
    return *s.summary;
}

inline std::vector<double> run_scores(const json& summary) {
    std::vector<double> out;
    for (const auto& r : summary.at("runs")) {
        if (r.value("ok", false) && r.at("score").is_number()) out.push_back(r.at("score").get<double>());
    }
    return out;
}

inline void write_histogram(std::ostream& os, const std::string& series, const std::vector<double>& values, int bins) {
    const auto h = qaga::histogram(values, bins, 0.0, 1.0);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        os << series << '\t' << h.edges[b] << '\t' << h.edges[b + 1] << '\t' << h.counts[b] << '\n';
    }
}

} // namespace detail

inline void write_plot_table(std::ostream& os, const PlotRequest& req) {
    if (std::find(plot_kinds().begin(), plot_kinds().end(), req.kind) == plot_kinds().end()) {
        throw PlotError("unknown plot kind '" + req.kind + "'");
    }
    if (req.results.empty()) throw PlotError("no results directories given");
    if (req.bins < 1) throw PlotError("bins must be >= 1");
    std::vector<detail::Source> sources;
    for (const auto& dir : req.results) sources.push_back(detail::load_source(dir));

    std::ostringstream body;
    body << std::setprecision(12);
    const std::string& kind = req.kind;
    if (kind == "gap" || kind == "pgs") {
        body << "series\trun\ts\t" << kind << '\n';
        for (const auto& src : sources) {
            for (const auto& t : detail::read_traces(src)) {
                const auto col = static_cast<std::size_t>(
                    std::find(t.columns.begin(), t.columns.end(), kind) - t.columns.begin());
                for (const auto& row : t.rows) body << src.label << '\t' << t.run << '\t' << row[0] << '\t' << row[col] << '\n';
            }
        }
    } else if (kind == "schedules") {
        body << "series\trun\ts\tschedule\tvalue\n";
        for (const auto& src : sources) {
            for (const auto& t : detail::read_traces(src)) {
                for (const auto& row : t.rows) {
                    for (std::size_t c = 5; c < t.columns.size(); ++c) {
                        body << src.label << '\t' << t.run << '\t' << row[0] << '\t' << t.columns[c] << '\t' << row[c] << '\n';
                    }
                }
            }
        }
    } else if (kind == "histogram") {
        body << "series\tbin_lo\tbin_hi\tcount\n";
        for (const auto& src : sources) detail::write_histogram(body, src.label, detail::run_scores(detail::require_summary(src)), req.bins);
    } else if (kind == "boxplot") {
        body << "n\tcount\tmin\tq1\tmedian\tq3\tmax\n";
        std::map<int, std::vector<double>> by_size;
        for (const auto& src : sources) {
            const auto& summary = detail::require_summary(src);
            auto scores = detail::run_scores(summary);
            auto& bucket = by_size[summary.at("n").get<int>()];
            bucket.insert(bucket.end(), scores.begin(), scores.end());
        }
        for (const auto& [n, scores] : by_size) {
            const auto b = qaga::box_stats(scores);
            body << n << '\t' << b.count << '\t' << b.min << '\t' << b.q1 << '\t' << b.median << '\t' << b.q3 << '\t'
                 << b.max << '\n';
        }
    } else {
        body << "series\tbin_lo\tbin_hi\tcount\n";
        std::vector<double> optimized;
        std::vector<double> baseline;
        for (const auto& src : sources) {
            const auto& summary = detail::require_summary(src);
            if (summary.value("score_kind", "") != "approximation_ratio") {
                throw PlotError(src.label + ": approx_ratio needs Ising results");
            }
            const auto scores = detail::run_scores(summary);
            if (!scores.empty()) optimized.push_back(qaga::quantile(scores, 0.5));
            if (src.baseline && src.baseline->at("approximation_ratio").is_number()) {
                baseline.push_back(src.baseline->at("approximation_ratio").get<double>());
            }
        }
        detail::write_histogram(body, "optimized", optimized, req.bins);
        if (!baseline.empty()) detail::write_histogram(body, "baseline", baseline, req.bins);
    }

    for (const auto& src : sources) detail::write_provenance(os, src);
    os << body.str();
}

} // namespace anneal
