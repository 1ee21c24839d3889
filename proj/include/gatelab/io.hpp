#ifndef GATELAB_IO_HPP
#define GATELAB_IO_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gatelab/common.hpp"

namespace gatelab {
namespace io {

// Line-oriented `key = value` configuration with '#' comments and dotted
// keys (net.d, opt.alpha). Later assignments win, so command-line
// overrides are plain re-sets.
class Config {
  public:
    static Config load(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def) const;

    // throws ParseError naming the first key outside `known`
    void require_known(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

// One CSV report: header row plus formatted records. Numeric cells are
// rendered with round-trip precision; non-finite values are rejected at
// insertion.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<double>& cells);
    void add_row_mixed(const std::vector<std::string>& cells);
};

std::string format_double(double v);

void emit_csv(const CsvTable& table, const std::string& path);
CsvTable load_csv_table(const std::string& path);

struct Series {
    std::string label;
    Vec x;
    Vec y;
};

// Standalone SVG line plot with axes and a legend; log_y switches the
// vertical axis to log10 for residual curves.
void emit_svg_lineplot(const std::vector<Series>& series, const std::string& title,
                       const std::string& path, bool log_y = false);

void ensure_directory(const std::string& path);

}  // namespace io
}  // namespace gatelab

#endif
