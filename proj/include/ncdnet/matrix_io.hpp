#pragma once

// CSV formats shared by the CLI and the tests.
//
//   matrix:   "# n=<N>" then N rows of N comma-separated values, 5 decimals
//   tensor:   "# h=H w=W ch=C k=K" then h*w*ch rows of K values (row r is
//             element (y, x, c) with r = (y*w + x)*ch + c, column = filter)
//   features: rows of comma-separated values, one column per feature vector;
//             lines starting with '#' are ignored

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/tensor.hpp"

namespace ncdnet {

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m, int precision = 5);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

void write_tensor_csv(std::ostream& out, const FeatureMap& t);
FeatureMap read_tensor_csv(std::istream& in);

void write_features_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& columns);
Eigen::MatrixXd read_features_csv(std::istream& in);

/// `index,x,y,label` rows with a header line.
void write_embedding_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& embedding,
                         const std::vector<int>& labels);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace ncdnet
