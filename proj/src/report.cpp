#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anyonfock/cli.hpp"

namespace anyonfock {

namespace {

void dump_value(const nlohmann::json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::json(it.key()).dump() + ": ";
        dump_value(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump_value(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
      } else {
        out += format_double(v);
      }
      return;
    }
    default:
      out += j.dump();
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(CheckMode mode) {
  switch (mode) {
    case CheckMode::abs: return "abs";
    case CheckMode::rel: return "rel";
    case CheckMode::upper: return "upper";
    case CheckMode::lower: return "lower";
  }
  return "abs";
}

CheckMode parse_check_mode(const std::string& name) {
  if (name == "abs") return CheckMode::abs;
  if (name == "rel") return CheckMode::rel;
  if (name == "upper") return CheckMode::upper;
  if (name == "lower") return CheckMode::lower;
  throw std::invalid_argument("unknown check mode '" + name + "'");
}

bool evaluate_check(CheckMode mode, double computed, double expected, double tolerance) {
  if (std::isnan(computed) || std::isnan(expected)) return false;
  switch (mode) {
    case CheckMode::abs: return std::abs(computed - expected) <= tolerance;
    case CheckMode::rel: return std::abs(computed - expected) <= tolerance * std::abs(expected);
    case CheckMode::upper: return computed <= expected + tolerance;
    case CheckMode::lower: return computed >= expected - tolerance;
  }
  return false;
}

bool Report::passed() const {
  for (const auto& r : records) {
    if (!r.passed) return false;
  }
  return true;
}

void Report::append(const Report& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  tables.insert(tables.end(), other.tables.begin(), other.tables.end());
}

nlohmann::json report_to_json(const Report& report, bool timings) {
  nlohmann::json j;
  j["tool"] = "anyonfock";
  j["version"] = report.version;
  j["suite"] = report.suite;
  j["passed"] = report.passed();
  j["config"] = report.config;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    nlohmann::json rec = {{"suite", r.suite},         {"name", r.name},
                          {"computed", r.computed},   {"expected", r.expected},
                          {"tolerance", r.tolerance}, {"mode", to_string(r.mode)},
                          {"passed", r.passed}};
    if (timings) rec["runtime_s"] = r.runtime;
    records.push_back(rec);
  }
  j["records"] = records;
  nlohmann::json tables = nlohmann::json::object();
  for (const auto& t : report.tables) {
    tables[t.name] = {{"columns", t.columns}, {"rows", t.rows}};
  }
  j["tables"] = tables;
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report report;
  report.suite = j.at("suite").get<std::string>();
  report.version = j.at("version").get<std::string>();
  report.config = j.value("config", nlohmann::json::object());
  for (const auto& rec : j.at("records")) {
    CheckRecord r;
    r.suite = rec.at("suite").get<std::string>();
    r.name = rec.at("name").get<std::string>();
    // Non-finite values were written as null.
    auto number = [&](const char* key) {
      const auto& v = rec.at(key);
      return v.is_null() ? std::nan("") : v.get<double>();
    };
    r.computed = number("computed");
    r.expected = number("expected");
    r.tolerance = number("tolerance");
    r.mode = parse_check_mode(rec.at("mode").get<std::string>());
    r.passed = rec.at("passed").get<bool>();
    r.runtime = rec.value("runtime_s", 0.0);
    report.records.push_back(r);
  }
  if (j.contains("tables")) {
    for (auto it = j.at("tables").begin(); it != j.at("tables").end(); ++it) {
      Table t;
      t.name = it.key();
      t.columns = it.value().at("columns").get<std::vector<std::string>>();
      for (const auto& row : it.value().at("rows")) {
        std::vector<double> values;
        for (const auto& v : row) values.push_back(v.is_null() ? std::nan("") : v.get<double>());
        t.rows.push_back(std::move(values));
      }
      report.tables.push_back(std::move(t));
    }
  }
  return report;
}

std::string dump_json(const nlohmann::json& j) {
  std::string out;
  dump_value(j, 0, out);
  out += "\n";
  return out;
}

std::vector<std::string> emit_tables(const Report& report, const std::string& format,
                                     const std::string& out_dir, bool timings) {
  if (format != "json" && format != "csv") {
    throw std::invalid_argument("emit_tables: format must be json or csv");
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  // The JSON report is always written; it is what `report <path>` re-reads.
  const fs::path json_path = fs::path(out_dir) / "report.json";
  write_file(json_path, dump_json(report_to_json(report, timings)));
  written.push_back(json_path.string());
  if (format == "csv") {
    std::string csv = "suite,name,computed,expected,tolerance,mode,passed";
    if (timings) csv += ",runtime_s";
    csv += "\n";
    for (const auto& r : report.records) {
      csv += csv_field(r.suite) + "," + csv_field(r.name) + "," + format_double(r.computed) +
             "," + format_double(r.expected) + "," + format_double(r.tolerance) + "," +
             to_string(r.mode) + "," + (r.passed ? "true" : "false");
      if (timings) csv += "," + format_double(r.runtime);
      csv += "\n";
    }
    const fs::path csv_path = fs::path(out_dir) / "report.csv";
    write_file(csv_path, csv);
    written.push_back(csv_path.string());
    for (const auto& t : report.tables) {
      std::string body;
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        body += (i ? "," : "") + csv_field(t.columns[i]);
      }
      body += "\n";
      for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) body += (i ? "," : "") + format_double(row[i]);
        body += "\n";
      }
      const fs::path path = fs::path(out_dir) / (t.name + ".csv");
      write_file(path, body);
      written.push_back(path.string());
    }
  }
  return written;
}

std::size_t reverify(const Report& report) {
  std::size_t mismatches = 0;
  for (const auto& r : report.records) {
    if (evaluate_check(r.mode, r.computed, r.expected, r.tolerance) != r.passed) ++mismatches;
  }
  return mismatches;
}

}  // namespace anyonfock
