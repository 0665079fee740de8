#pragma once
// Deterministic artifact emission: CSV tables with fixed 17-significant-digit
// number rendering (so identical runs byte-reproduce their outputs), and
// self-contained python plot scripts that read only the CSV they are given.

#include <string>
#include <vector>

namespace nesskit {

// %.17g rendering used for every CSV number.
std::string format_full(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Writes header + rows with comma separators and "\n" line ends; every row
// must match the header width.  Throws on I/O failure.
void write_csv(const std::string& path, const CsvTable& table);

void write_text(const std::string& path, const std::string& content);

// Header row of an existing CSV, split on commas.
std::vector<std::string> read_csv_header(const std::string& path);

// Plot-script emitters.  Each checks the CSV header for the columns the
// script will reference and throws "missing columns: ..." otherwise; no
// rendering happens here, the scripts are artifacts.

// Two panels: component populations p_*(t), then the rate-driven and
// residual contributions m1_*/m2_*(t) when present.
void emit_trajectory_plot(const std::string& csv_path, const std::string& script_path);

// One panel: every k_* column against the swept value; log-log when asked.
void emit_sweep_plot(const std::string& csv_path, const std::string& script_path,
                     bool loglog);

// Heatmap of beta over the (delta, gamma) grid.
void emit_beta_map_plot(const std::string& csv_path, const std::string& script_path);

}  // namespace nesskit
