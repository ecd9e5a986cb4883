#pragma once

#include <string>

#include "coveq/geneset.hpp"
#include "coveq/matrix.hpp"

namespace coveq {

// Delimited numeric text: rows are observations, columns are variables;
// tab, comma, or whitespace separated. A first line with any non-numeric
// token is taken as a header of variable names.
SampleMatrix read_sample_matrix(const std::string& path);

// Expression matrix (first column probe id, header row of sample ids) plus
// a two-column labels file (sample id, group tag). log2_scale declares that
// the matrix values are already log2.
ExpressionData read_expression(const std::string& expr_path,
                               const std::string& labels_path,
                               bool log2_scale);

// GMT: one set per line, tab-separated name, description, member ids.
// Duplicate set names are rejected.
GeneSetCollection read_gmt(const std::string& path);

// Write-to-temp then rename, so a failed run never leaves partial output.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace coveq
