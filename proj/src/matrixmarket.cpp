// SPDX-License-Identifier: Apache-2.0
#include "platecav/matrixmarket.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace platecav {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_comments(std::ofstream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "% " << c << '\n';
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  return in;
}

// Reads banner + comments, returns the size line.
std::string read_header(std::ifstream& in, const std::string& path,
                        const std::string& expected_banner,
                        std::vector<std::string>* comments) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty matrix file: " + path);
  if (line.rfind(expected_banner, 0) != 0)
    throw IoError(path + ": unexpected MatrixMarket banner: " + line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '%') {
      if (comments) {
        std::string c = line.substr(1);
        if (!c.empty() && c.front() == ' ') c.erase(0, 1);
        comments->push_back(c);
      }
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return line;
  }
  throw IoError(path + ": missing size line");
}

}  // namespace

void write_market_sparse(const std::string& path, const SpMat& mat,
                         const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file: " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  write_comments(out, comments);
  out << mat.rows() << ' ' << mat.cols() << ' ' << mat.nonZeros() << '\n';
  for (Index k = 0; k < mat.outerSize(); ++k)
    for (SpMat::InnerIterator it(mat, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_g17(it.value())
          << '\n';
  if (!out) throw IoError("write failed: " + path);
}

SpMat read_market_sparse(const std::string& path,
                         std::vector<std::string>* comments) {
  std::ifstream in = open_or_throw(path);
  const std::string size_line =
      read_header(in, path, "%%MatrixMarket matrix coordinate real general", comments);
  std::istringstream hs(size_line);
  Index rows = 0, cols = 0, nnz = 0;
  hs >> rows >> cols >> nnz;
  if (!hs || rows < 0 || cols < 0 || nnz < 0)
    throw IoError(path + ": malformed size line: " + size_line);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  Index r = 0, c = 0;
  double v = 0;
  for (Index k = 0; k < nnz; ++k) {
    if (!(in >> r >> c >> v)) throw IoError(path + ": truncated entry list");
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw IoError(path + ": entry index out of range");
    trips.emplace_back(r - 1, c - 1, v);
  }
  SpMat mat(rows, cols);
  mat.setFromTriplets(trips.begin(), trips.end());
  return mat;
}

void write_market_dense_complex(const std::string& path, const MatrixXcd& mat,
                                const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file: " + path);
  out << "%%MatrixMarket matrix array complex general\n";
  write_comments(out, comments);
  out << mat.rows() << ' ' << mat.cols() << '\n';
  for (Index j = 0; j < mat.cols(); ++j)
    for (Index i = 0; i < mat.rows(); ++i)
      out << format_g17(mat(i, j).real()) << ' ' << format_g17(mat(i, j).imag())
          << '\n';
  if (!out) throw IoError("write failed: " + path);
}

MatrixXcd read_market_dense_complex(const std::string& path,
                                    std::vector<std::string>* comments) {
  std::ifstream in = open_or_throw(path);
  const std::string size_line =
      read_header(in, path, "%%MatrixMarket matrix array complex general", comments);
  std::istringstream hs(size_line);
  Index rows = 0, cols = 0;
  hs >> rows >> cols;
  if (!hs || rows < 0 || cols < 0)
    throw IoError(path + ": malformed size line: " + size_line);
  MatrixXcd mat(rows, cols);
  double re = 0, im = 0;
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      if (!(in >> re >> im)) throw IoError(path + ": truncated entry list");
      mat(i, j) = Complex(re, im);
    }
  return mat;
}

}  // namespace platecav
