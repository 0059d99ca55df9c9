#include <drop/csv.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace drop {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

Dataset read_dataset_csv(std::istream& in) {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.front() == '#') continue;  // provenance comment
    auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_double(fields[k], row[k]);
    if (!numeric) {
      if (rows.empty() && header.empty()) {
        header = std::move(fields);
        continue;
      }
      throw DropError("non-numeric field on CSV line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DropError("ragged CSV: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DropError("CSV contains no data rows");
  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(rows.front().size());
  if (!header.empty() && static_cast<Index>(header.size()) != p) {
    throw DropError("CSV header has " + std::to_string(header.size()) + " fields but rows have " + std::to_string(p));
  }
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return Dataset(std::move(m), std::move(header));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DropError("cannot open '" + path + "'");
  return read_dataset_csv(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw DropError("cannot write '" + path + "'");
  write_matrix_csv(out, m, header);
}

}  // namespace drop
