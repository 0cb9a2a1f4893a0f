#include "kinobs/report.hpp"

#include <algorithm>
#include <stdexcept>

#include "kinobs/config.hpp"
#include "kinobs/io.hpp"

namespace kinobs {

std::string series_csv(const RunResult& r) {
    std::string out = kSeriesHeader;
    out += '\n';
    const ErrorSeries& e = r.errors;
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double cols[] = {e.times[k], e.l1_rel[k], e.l1_abs[k], e.sobolev[k],
                               r.energy[k], r.dt[k]};
        for (std::size_t c = 0; c < std::size(cols); ++c) {
            if (c) out += ',';
            out += format_double(cols[c]);
        }
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepEntry>& sweep) {
    std::vector<SweepEntry> sorted = sweep;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SweepEntry& a, const SweepEntry& b) { return a.lambda < b.lambda; });
    std::string out = kSweepHeader;
    out += '\n';
    for (const SweepEntry& s : sorted) {
        out += format_double(s.lambda) + ',' + format_double(s.final_l1_rel) + ',' +
               format_double(s.final_sobolev) + '\n';
    }
    return out;
}

void emit_csv(const RunResult& result, const std::filesystem::path& path) {
    write_file_atomic(path, series_csv(result));
}

void emit_csv(const std::vector<SweepEntry>& sweep, const std::filesystem::path& path) {
    write_file_atomic(path, sweep_csv(sweep));
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    const auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]).empty()) throw std::runtime_error("csv: missing header");
    for (auto h : split(trim(lines[0]), ',')) t.header.emplace_back(trim(h));
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != t.header.size()) {
            throw std::runtime_error("csv line " + std::to_string(ln + 1) + ": expected " +
                                     std::to_string(t.header.size()) + " columns");
        }
        std::vector<double> row;
        for (auto c : cells) {
            try {
                row.push_back(parse_double(c));
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error("csv line " + std::to_string(ln + 1) + ": " + e.what());
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

void write_report(const std::filesystem::path& path, const RunConfig& cfg,
                  const std::string& summary) {
    std::string out = echo_config(cfg);
    out += '\n';
    for (auto line : split(summary, '\n')) {
        if (trim(line).empty()) continue;
        out += "# ";
        out += line;
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace kinobs
