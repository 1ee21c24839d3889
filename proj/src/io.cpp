#include "gatelab/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gatelab {
namespace io {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ParseError("config: empty key at line " + std::to_string(lineno));
        cfg.kv_[key] = value;
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw ParseError("config: '" + key + "' is not a number: " + it->second);
    return v;
}

int Config::get_int(const std::string& key, int def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    char* end = nullptr;
    const long v = std::strtol(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw ParseError("config: '" + key + "' is not an integer: " + it->second);
    return static_cast<int>(v);
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ParseError("config: '" + key + "' is not a boolean: " + it->second);
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    std::vector<int> out;
    std::string cur;
    std::istringstream in(it->second);
    while (std::getline(in, cur, ',')) {
        const std::string t = trim(cur);
        if (t.empty()) continue;
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (end == t.c_str() || *end != '\0')
            throw ParseError("config: '" + key + "' has a non-integer element: " + t);
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw ParseError("config: '" + key + "' is an empty list");
    return out;
}

void Config::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : kv_)
        if (known.count(key) == 0) throw ParseError("config: unknown key '" + key + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::add_row(const std::vector<double>& cells) {
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (double v : cells) {
        if (!std::isfinite(v)) throw NumericError("csv: refusing to write non-finite value");
        row.push_back(format_double(v));
    }
    rows.push_back(std::move(row));
}

void CsvTable::add_row_mixed(const std::vector<std::string>& cells) { rows.push_back(cells); }

void emit_csv(const CsvTable& table, const std::string& path) {
    if (table.header.empty()) throw FormatError("csv: header row is mandatory");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("csv: cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw FormatError("csv: record width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw FormatError("csv: write failed for '" + path + "'");
}

CsvTable load_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("csv: cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        std::istringstream ls(line);
        while (std::getline(ls, cur, ',')) cells.push_back(cur);
        if (line.back() == ',') cells.push_back("");
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

void emit_svg_lineplot(const std::vector<Series>& series, const std::string& title,
                       const std::string& path, bool log_y) {
    if (series.empty()) throw FormatError("svg: no series to plot");
    for (const Series& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw FormatError("svg: series '" + s.label + "' is empty or ragged");
    }

    const double width = 640, height = 420;
    const double ml = 60, mr = 20, mt = 40, mb = 40;

    auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double v) {
        return height - mb - (ty(v) - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("svg: cannot open '" + path + "' for writing");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    // axis extent labels
    out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << format_double(xmin) << "</text>\n"
        << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << format_double(xmax) << "</text>\n"
        << "<text x=\"" << ml - 6 << "\" y=\"" << height - mb
        << "\" font-size=\"10\" text-anchor=\"end\">"
        << format_double(log_y ? std::pow(10, ymin) : ymin) << "</text>\n"
        << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
        << "\" font-size=\"10\" text-anchor=\"end\">"
        << format_double(log_y ? std::pow(10, ymax) : ymax) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        out << "<polyline fill=\"none\" stroke=\"" << colors[k % 8] << "\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << width - mr - 150 << "\" y=\"" << mt + 14 * (k + 1)
            << "\" font-size=\"11\" fill=\"" << colors[k % 8] << "\">" << s.label
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw FormatError("svg: write failed for '" + path + "'");
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw FormatError("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace io
}  // namespace gatelab
