// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "platecav/types.hpp"

namespace platecav {

// Matrix Market readers/writers used for the on-disk handoff between
// pipeline stages. Values are printed with 17 significant digits so a
// write/read round trip reproduces every double bit-exactly.

// "matrix coordinate real general"; comment lines are emitted verbatim
// after the banner, prefixed with "% ".
void write_market_sparse(const std::string& path, const SpMat& mat,
                         const std::vector<std::string>& comments = {});
SpMat read_market_sparse(const std::string& path,
                         std::vector<std::string>* comments = nullptr);

// "matrix array complex general", column major.
void write_market_dense_complex(const std::string& path, const MatrixXcd& mat,
                                const std::vector<std::string>& comments = {});
MatrixXcd read_market_dense_complex(const std::string& path,
                                    std::vector<std::string>* comments = nullptr);

std::string format_g17(double v);

}  // namespace platecav
