#pragma once

// Deterministic text output for benchmark reports.

#include <iosfwd>
#include <string>

#include "mocc/benchmark.hpp"

namespace mocc {

/// Column header used for a controller in the table.
const char* column_label(ControllerKind k);

/// One row per disturbance plus the norm row, one column per controller.
/// Failed cells are left empty. Values use 17 significant digits.
void write_table_csv(std::ostream& os, const PerformanceReport& rep);

/// Long form: one line per cell with its status, expected value and band.
void write_cells_csv(std::ostream& os, const PerformanceReport& rep);

/// Structured report; schema documented in README.md.
void write_report_json(std::ostream& os, const PerformanceReport& rep);

/// Writes report.csv, cells.csv and report.json into dir (created if needed).
void emit_report(const std::string& dir, const PerformanceReport& rep);

}  // namespace mocc
