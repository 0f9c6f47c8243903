#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace deeprat::harness {

struct NumericWriteError : std::runtime_error {
    explicit NumericWriteError(const std::string& what) : std::runtime_error(what) {}
};

// %.17g; refuses non-finite values (aborted runs leave a status file instead
// of NaN cells).
std::string fmt_double(double v);

// Headered CSV, append-only while open. A file only parses as complete once
// close_complete() has written the trailing marker, so a crashed run can
// never be mistaken for a finished one.
class MetricsWriter {
public:
    MetricsWriter(const std::string& path, std::vector<std::string> columns);
    ~MetricsWriter();

    void annotation(const std::string& text);  // "# text" comment line
    void row(const std::vector<std::string>& cells);
    void close_complete();

    const std::string& path() const { return path_; }
    std::size_t rows_written() const { return rows_; }

private:
    std::string path_;
    std::ofstream os_;
    std::size_t n_columns_ = 0;
    std::size_t rows_ = 0;
    bool closed_ = false;
};

struct MetricsFile {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> annotations;
    bool complete = false;
};

MetricsFile read_metrics(const std::string& path);
std::vector<double> column_as_double(const MetricsFile& f, const std::string& name);

// Sentinel dropped by aborted runs; summarize() treats such runs as failed.
void write_status_file(const std::string& dir, const std::string& status,
                       const std::string& detail);

}  // namespace deeprat::harness
