#include "glasd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "glasd/errors.hpp"

namespace glasd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto line =
        trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!line.empty()) lines.push_back(line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return lines;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(std::string_view text, bool require_header) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("CSV input is empty");
  Table t;
  std::size_t first_data = 0;
  {
    const auto fields = split_fields(lines[0]);
    bool numeric = true;
    double tmp;
    for (auto f : fields) numeric = numeric && parse_number(f, tmp);
    if (!numeric || require_header) {
      for (auto f : fields) t.header.push_back(unquote(f));
      first_data = 1;
    }
  }
  std::size_t width = t.header.empty() ? split_fields(lines[0]).size() : t.header.size();
  for (std::size_t li = first_data; li < lines.size(); ++li) {
    const auto fields = split_fields(lines[li]);
    if (fields.size() != width) {
      throw ParseError(fmt::format("line {}: expected {} fields, found {}", li + 1, width,
                                   fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_number(fields[c], row[c])) {
        throw ParseError(fmt::format("line {}, column {}: '{}' is not a number", li + 1, c + 1,
                                     fields[c]));
      }
      if (!std::isfinite(row[c])) {
        throw ParseError(fmt::format("line {}, column {}: non-finite value", li + 1, c + 1));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Eigen::MatrixXd to_matrix(const Table& t) {
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const auto p = static_cast<Eigen::Index>(t.rows.empty() ? 0 : t.rows[0].size());
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      m(i, j) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

}  // namespace

std::string format_machine(double v) { return fmt::format("{:.17g}", v); }

std::string format_console(double v) { return fmt::format("{:.4g}", v); }

DataMatrix parse_data_csv(std::string_view text) {
  Table t = parse_table(text, false);
  if (t.rows.size() < 2 || (t.rows.empty() ? 0 : t.rows[0].size()) < 2) {
    throw ParseError(fmt::format("data needs at least 2 rows and 2 columns, got {}x{}",
                                 t.rows.size(), t.rows.empty() ? 0 : t.rows[0].size()));
  }
  return DataMatrix(to_matrix(t), std::move(t.header));
}

DataMatrix read_data_csv(const std::filesystem::path& path) {
  return parse_data_csv(read_text_file(path));
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names) {
  if (names.size() != static_cast<std::size_t>(m.cols())) {
    throw DimensionMismatch("matrix and name counts differ");
  }
  auto out = open_out(path);
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_machine(m(i, j));
    out << '\n';
  }
}

NamedMatrix read_matrix_csv(const std::filesystem::path& path) {
  Table t = parse_table(read_text_file(path), true);
  if (t.rows.size() != t.header.size()) {
    throw ParseError(fmt::format("'{}' is not square: {} names, {} rows", path.string(),
                                 t.header.size(), t.rows.size()));
  }
  return {to_matrix(t), std::move(t.header)};
}

void write_angles_csv(const std::filesystem::path& path, const AngleVector& a) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < a.angles.size(); ++i) out << (i ? "," : "") << "a" << (i + 1);
  out << '\n';
  for (std::size_t i = 0; i < a.angles.size(); ++i) {
    out << (i ? "," : "") << format_machine(a.angles[i]);
  }
  out << '\n';
}

AngleVector read_angles_csv(const std::filesystem::path& path) {
  Table t = parse_table(read_text_file(path), true);
  if (t.rows.size() != 1) throw ParseError("angle file must hold exactly one data row");
  return {matrix_dim_for_angles(t.rows[0].size()), t.rows[0]};
}

void write_heatmap_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                       const std::vector<std::string>& names) {
  auto out = open_out(path);
  out << "row,col,value\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << names[static_cast<std::size_t>(i)] << ',' << names[static_cast<std::size_t>(j)]
          << ',' << format_machine(m(i, j)) << '\n';
    }
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  auto out = open_out(path);
  out << content;
}

}  // namespace glasd
