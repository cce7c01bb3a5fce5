#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "voc/simulation.hpp"

namespace voc {

/// Column names in output order:
/// t_s, inv<k>_{V_rms_V, theta_rad, freq_hz, P_W, Q_var, kv, ki}..., load_P_W, load_Q_var, margin
std::vector<std::string> csv_columns(std::size_t inverters, const std::string& prefix = "");

/// Fixed-format, locale-independent CSV. Non-finite values are written as empty fields.
void write_csv_header(std::ostream& os, std::size_t inverters);
void write_csv_row(std::ostream& os, const TraceRow& row);
void write_csv(std::ostream& os, const std::vector<TraceRow>& rows, std::size_t inverters);

/// Formats one value the way the CSV writer does.
std::string format_value(double v);

/// Row values (without t) in csv_columns order.
std::vector<double> row_values(const TraceRow& row);

}  // namespace voc
