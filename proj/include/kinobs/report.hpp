#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kinobs/assimilation.hpp"

namespace kinobs {

inline constexpr const char* kSeriesHeader = "t,l1_rel,l1_abs,sobolev_s,energy_total,dt";
inline constexpr const char* kSweepHeader = "lambda,final_l1_rel,final_sobolev";

std::string series_csv(const RunResult& result);
/// Rows sorted by lambda; failed runs are written as nan.
std::string sweep_csv(const std::vector<SweepEntry>& sweep);

/// Atomic writes (temporary file, then rename).
void emit_csv(const RunResult& result, const std::filesystem::path& path);
void emit_csv(const std::vector<SweepEntry>& sweep, const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV written by emit_csv. Throws std::runtime_error on
/// ragged rows or non-numeric cells.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// Resolved configuration followed by a commented summary.
void write_report(const std::filesystem::path& path, const RunConfig& cfg,
                  const std::string& summary);

}  // namespace kinobs
