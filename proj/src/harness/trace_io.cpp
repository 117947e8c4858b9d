#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/harness.hpp"

namespace xpm::harness {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidParameter(fmt::format("cannot write {}", path));
    out << content;
    if (!out) throw InvalidParameter(fmt::format("write failed for {}", path));
}

namespace {

std::vector<double> split_numbers(std::string_view line, std::size_t line_no) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const auto comma = line.find(',', pos);
        auto field = line.substr(pos, comma == std::string_view::npos ? line.size() - pos : comma - pos);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\r' || field.back() == '\t'))
            field.remove_suffix(1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size())
            throw InvalidParameter(fmt::format("line {}: '{}' is not a number", line_no, field));
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

PhaseTrace parse_trace_csv(std::string_view content) {
    std::vector<double> t, phi, err;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        auto line = content.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("time_s", 0) == 0) continue;
        }
        const auto v = split_numbers(line, line_no);
        if (v.size() < 2 || v.size() > 3)
            throw InvalidParameter(fmt::format("line {}: expected 2 or 3 columns", line_no));
        t.push_back(v[0]);
        phi.push_back(v[1]);
        err.push_back(v.size() == 3 ? v[2] : 0.0);
    }
    if (t.size() < 2) throw InvalidParameter("trace has fewer than two samples");

    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw InvalidParameter("trace times must increase");
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::abs(t[i] - (t.front() + dt * static_cast<double>(i))) > 1e-6 * dt)
            throw InvalidParameter(fmt::format("trace grid is not uniform at sample {}", i));

    PhaseTrace trace;
    trace.grid = TimeGrid{t.front(), dt, t.size()};
    trace.phase = std::move(phi);
    if (std::any_of(err.begin(), err.end(), [](double e) { return e != 0.0; }))
        trace.stderr_rad = std::move(err);
    trace.validate();
    return trace;
}

PhaseTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidParameter(fmt::format("cannot read {}", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_trace_csv(buffer.str());
}

}  // namespace xpm::harness
