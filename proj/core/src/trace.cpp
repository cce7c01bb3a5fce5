#include "voc/trace.hpp"

#include <cmath>
#include <fmt/format.h>

namespace voc {

std::vector<std::string> csv_columns(std::size_t inverters, const std::string& prefix) {
    std::vector<std::string> c;
    if (prefix.empty()) c.emplace_back("t_s");
    static const char* fields[] = {"V_rms_V", "theta_rad", "freq_hz", "P_W", "Q_var", "kv", "ki"};
    for (std::size_t k = 0; k < inverters; ++k) {
        for (const char* f : fields) c.push_back(fmt::format("{}inv{}_{}", prefix, k + 1, f));
    }
    c.push_back(prefix + "load_P_W");
    c.push_back(prefix + "load_Q_var");
    c.push_back(prefix + "margin");
    return c;
}

std::string format_value(double v) {
    if (!std::isfinite(v)) return {};
    return fmt::format("{:.10g}", v);
}

std::vector<double> row_values(const TraceRow& row) {
    std::vector<double> v;
    v.reserve(7 * row.inverters.size() + 3);
    for (const auto& s : row.inverters) {
        v.insert(v.end(), {s.V_rms, s.theta, s.freq_hz, s.P, s.Q, s.k_v, s.k_i});
    }
    v.push_back(row.load_P);
    v.push_back(row.load_Q);
    v.push_back(row.margin);
    return v;
}

void write_csv_header(std::ostream& os, std::size_t inverters) {
    const auto cols = csv_columns(inverters);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

void write_csv_row(std::ostream& os, const TraceRow& row) {
    std::string line = fmt::format("{:.6f}", row.t);
    for (double v : row_values(row)) {
        line += ',';
        line += format_value(v);
    }
    line += '\n';
    os << line;
}

void write_csv(std::ostream& os, const std::vector<TraceRow>& rows, std::size_t inverters) {
    write_csv_header(os, inverters);
    for (const auto& r : rows) write_csv_row(os, r);
}

}  // namespace voc
