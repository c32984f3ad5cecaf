#include "ncdnet/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "ncdnet/error.hpp"

namespace ncdnet {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw Error(Errc::BadFormat, "line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  }
  return v;
}

std::vector<double> parse_row(std::string_view line, std::size_t line_no) {
  std::vector<double> row;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    row.push_back(parse_double(line.substr(start, comma - start), line_no));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return row;
}

// Reads "key=value" pairs from a "# ..." header line.
long header_value(const std::string& header, const std::string& key) {
  std::istringstream ss(header.substr(1));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos && tok.substr(0, eq) == key) {
      try {
        return std::stol(tok.substr(eq + 1));
      } catch (const std::exception&) {
        break;
      }
    }
  }
  throw Error(Errc::BadFormat, "header '" + header + "' lacks " + key + "=");
}

struct Rows {
  std::vector<std::string> headers;
  std::vector<std::vector<double>> rows;
};

Rows read_rows(std::istream& in) {
  Rows r;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      r.headers.emplace_back(t);
      continue;
    }
    r.rows.push_back(parse_row(t, line_no));
  }
  return r;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(Errc::BadFormat, "no data rows");
  const auto cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(Errc::BadFormat, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                       " values, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

void write_rows(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m, int precision) {
  out << "# n=" << m.rows() << '\n' << std::fixed << std::setprecision(precision);
  write_rows(out, m);
  out << std::defaultfloat;
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  const auto r = read_rows(in);
  auto m = to_matrix(r.rows);
  if (m.rows() != m.cols()) throw Error(Errc::BadFormat, "matrix is not square");
  for (const auto& h : r.headers) {
    if (h.find("n=") == std::string::npos) continue;
    if (header_value(h, "n") != m.rows()) throw Error(Errc::BadFormat, "header n disagrees with row count");
  }
  return m;
}

void write_tensor_csv(std::ostream& out, const FeatureMap& t) {
  out << "# h=" << t.height() << " w=" << t.width() << " ch=" << t.channels() << " k=" << t.filters() << '\n'
      << std::setprecision(17);
  write_rows(out, t.columns());
  out << std::defaultfloat << std::setprecision(6);
}

FeatureMap read_tensor_csv(std::istream& in) {
  const auto r = read_rows(in);
  if (r.headers.empty()) throw Error(Errc::BadFormat, "tensor CSV needs a '# h= w= ch= k=' header");
  const auto& h = r.headers.front();
  const long hh = header_value(h, "h"), ww = header_value(h, "w"), cc = header_value(h, "ch"),
             kk = header_value(h, "k");
  auto m = to_matrix(r.rows);
  if (m.rows() != hh * ww * cc || m.cols() != kk) throw Error(Errc::BadFormat, "tensor data does not match header");
  return FeatureMap::from_columns(hh, ww, cc, std::move(m));
}

void write_features_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& columns) {
  out << std::setprecision(17);
  write_rows(out, columns);
  out << std::setprecision(6);
}

Eigen::MatrixXd read_features_csv(std::istream& in) { return to_matrix(read_rows(in).rows); }

void write_embedding_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& embedding,
                         const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != embedding.rows() || embedding.cols() != 2) {
    throw Error(Errc::ShapeMismatch, "embedding needs n x 2 points and n labels");
  }
  out << "index,x,y,label\n" << std::setprecision(10);
  for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
    out << i << ',' << embedding(i, 0) << ',' << embedding(i, 1) << ',' << labels[static_cast<std::size_t>(i)] << '\n';
  }
  out << std::setprecision(6);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_matrix_csv(in);
}

void save_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  std::ostringstream out;
  write_matrix_csv(out, m);
  write_file(path, out.str());
}

}  // namespace ncdnet
