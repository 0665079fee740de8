#include "nesskit/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nesskit {

namespace {

std::string base_name(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

std::string png_name(const std::string& script_path) {
    return std::filesystem::path(script_path).filename().replace_extension(".png").string();
}

// Verifies that every wanted column is present; reports all gaps at once.
void require_columns(const std::string& csv_path, const std::vector<std::string>& header,
                     const std::vector<std::string>& wanted) {
    std::string missing;
    for (const std::string& w : wanted) {
        bool found = false;
        for (const std::string& h : header) found = found || h == w;
        if (!found) missing += (missing.empty() ? "" : ", ") + w;
    }
    if (!missing.empty())
        throw std::invalid_argument("missing columns: " + missing + " in " + csv_path);
}

std::string python_list(const std::vector<std::string>& names) {
    std::string out = "[";
    for (std::size_t i = 0; i < names.size(); ++i) {
        out += "\"" + names[i] + "\"";
        if (i + 1 < names.size()) out += ", ";
    }
    return out + "]";
}

std::vector<std::string> columns_with_prefix(const std::vector<std::string>& header,
                                             const std::string& prefix) {
    std::vector<std::string> out;
    for (const std::string& h : header)
        if (h.rfind(prefix, 0) == 0) out.push_back(h);
    return out;
}

}  // namespace

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    for (const auto& row : table.rows)
        if (row.size() != table.header.size())
            throw std::invalid_argument("row width differs from header in " + path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<std::string> read_csv_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

void emit_trajectory_plot(const std::string& csv_path, const std::string& script_path) {
    const auto header = read_csv_header(csv_path);
    require_columns(csv_path, header, {"t"});
    const auto pcols = columns_with_prefix(header, "p_");
    if (pcols.empty())
        throw std::invalid_argument("missing columns: p_* in " + csv_path);
    const auto m1cols = columns_with_prefix(header, "m1_");
    const auto m2cols = columns_with_prefix(header, "m2_");

    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "\"\"\"Component populations and rate-split terms from " << base_name(csv_path)
      << ".\"\"\"\n"
      << "import csv\n\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "with open(\"" << base_name(csv_path) << "\") as fh:\n"
      << "    rows = list(csv.DictReader(fh))\n"
      << "t = [float(r[\"t\"]) for r in rows]\n"
      << "pcols = " << python_list(pcols) << "\n"
      << "mcols = " << python_list(m1cols) << " + " << python_list(m2cols) << "\n"
      << "npanel = 2 if mcols else 1\n"
      << "fig, axes = plt.subplots(npanel, 1, figsize=(7, 4 * npanel), sharex=True)\n"
      << "axes = axes if npanel > 1 else [axes]\n"
      << "for col in pcols:\n"
      << "    axes[0].plot(t, [float(r[col]) for r in rows], label=col)\n"
      << "axes[0].set_ylabel(\"population\")\n"
      << "axes[0].legend()\n"
      << "for col in mcols:\n"
      << "    axes[-1].plot(t, [float(r[col]) for r in rows], label=col)\n"
      << "if mcols:\n"
      << "    axes[-1].set_ylabel(\"rate term\")\n"
      << "    axes[-1].legend()\n"
      << "axes[-1].set_xlabel(\"t (a.u.)\")\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(\"" << png_name(script_path) << "\", dpi=160)\n";
    write_text(script_path, s.str());
}

void emit_sweep_plot(const std::string& csv_path, const std::string& script_path,
                     bool loglog) {
    const auto header = read_csv_header(csv_path);
    require_columns(csv_path, header, {"value"});
    const auto kcols = columns_with_prefix(header, "k_");
    if (kcols.empty())
        throw std::invalid_argument("missing columns: k_* in " + csv_path);

    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "\"\"\"Rates against the swept value from " << base_name(csv_path) << ".\"\"\"\n"
      << "import csv\n\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "with open(\"" << base_name(csv_path) << "\") as fh:\n"
      << "    rows = list(csv.DictReader(fh))\n"
      << "x = [float(r[\"value\"]) for r in rows]\n"
      << "fig, ax = plt.subplots(figsize=(7, 5))\n"
      << "for col in " << python_list(kcols) << ":\n"
      << "    ax.plot(x, [float(r[col]) for r in rows], marker=\"o\", label=col)\n";
    if (loglog) s << "ax.set_xscale(\"log\")\nax.set_yscale(\"log\")\n";
    s << "ax.set_xlabel(\"swept value\")\n"
      << "ax.set_ylabel(\"rate (a.u.)\")\n"
      << "ax.legend()\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(\"" << png_name(script_path) << "\", dpi=160)\n";
    write_text(script_path, s.str());
}

void emit_beta_map_plot(const std::string& csv_path, const std::string& script_path) {
    const auto header = read_csv_header(csv_path);
    require_columns(csv_path, header, {"delta", "gamma", "beta"});

    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "\"\"\"Coherence contribution over the (delta, gamma) grid from "
      << base_name(csv_path) << ".\"\"\"\n"
      << "import csv\n\n"
      << "import matplotlib.pyplot as plt\n"
      << "import numpy as np\n\n"
      << "with open(\"" << base_name(csv_path) << "\") as fh:\n"
      << "    rows = list(csv.DictReader(fh))\n"
      << "deltas = sorted({float(r[\"delta\"]) for r in rows})\n"
      << "gammas = sorted({float(r[\"gamma\"]) for r in rows})\n"
      << "z = np.full((len(gammas), len(deltas)), np.nan)\n"
      << "for r in rows:\n"
      << "    z[gammas.index(float(r[\"gamma\"])), deltas.index(float(r[\"delta\"]))] = "
         "float(r[\"beta\"])\n"
      << "fig, ax = plt.subplots(figsize=(7, 5))\n"
      << "im = ax.pcolormesh(deltas, gammas, z, shading=\"auto\")\n"
      << "fig.colorbar(im, ax=ax, label=\"beta (a.u.)\")\n"
      << "ax.set_xlabel(\"delta (a.u.)\")\n"
      << "ax.set_ylabel(\"gamma (a.u.)\")\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(\"" << png_name(script_path) << "\", dpi=160)\n";
    write_text(script_path, s.str());
}

}  // namespace nesskit
