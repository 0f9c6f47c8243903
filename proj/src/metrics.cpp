#include "deeprat/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace deeprat::harness {

std::string fmt_double(double v) {
    if (!std::isfinite(v))
        throw NumericWriteError("refusing to write non-finite metric value");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

MetricsWriter::MetricsWriter(const std::string& path, std::vector<std::string> columns)
    : path_(path), n_columns_(columns.size()) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    os_.open(path, std::ios::trunc);
    if (!os_) throw std::runtime_error("cannot open metrics file " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
        os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
    os_.flush();
}

MetricsWriter::~MetricsWriter() = default;

void MetricsWriter::annotation(const std::string& text) {
    if (closed_) throw std::logic_error("metrics file already closed");
    os_ << "# " << text << '\n';
    os_.flush();
}

void MetricsWriter::row(const std::vector<std::string>& cells) {
    if (closed_) throw std::logic_error("metrics file already closed");
    if (cells.size() != n_columns_)
        throw std::invalid_argument("metrics row width mismatch in " + path_);
    for (std::size_t i = 0; i < cells.size(); ++i)
        os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
    os_.flush();
    ++rows_;
}

void MetricsWriter::close_complete() {
    if (closed_) return;
    os_ << "# complete rows=" << rows_ << '\n';
    os_.flush();
    os_.close();
    closed_ = true;
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}
}  // namespace

MetricsFile read_metrics(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open metrics file " + path);
    MetricsFile f;
    std::string line;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = line.size() > 2 ? line.substr(2) : "";
            if (body.rfind("complete rows=", 0) == 0) {
                const auto n = std::stoull(body.substr(14));
                f.complete = n == f.rows.size();
            } else {
                f.annotations.push_back(body);
            }
            continue;
        }
        if (!header_done) {
            f.columns = split_csv(line);
            header_done = true;
        } else {
            f.rows.push_back(split_csv(line));
        }
    }
    return f;
}

std::vector<double> column_as_double(const MetricsFile& f, const std::string& name) {
    std::size_t idx = f.columns.size();
    for (std::size_t i = 0; i < f.columns.size(); ++i)
        if (f.columns[i] == name) idx = i;
    if (idx == f.columns.size())
        throw std::invalid_argument("metrics column '" + name + "' not found");
    std::vector<double> out;
    out.reserve(f.rows.size());
    for (const auto& row : f.rows) out.push_back(std::stod(row.at(idx)));
    return out;
}

void write_status_file(const std::string& dir, const std::string& status,
                       const std::string& detail) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir + "/STATUS");
    os << status << '\n' << detail << '\n';
}

}  // namespace deeprat::harness
