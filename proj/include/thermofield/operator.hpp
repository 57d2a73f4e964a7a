// operator.hpp: sparse operator wrapper with a verified hermiticity flag.
#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tfld {

using SparseCd = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

struct OperatorMatrix {
    std::size_t dim = 0;
    SparseCd entries;
    bool hermitian_flag = false;
};

// Largest entrywise deviation from the adjoint.
double hermitian_defect(const SparseCd& m);

// Largest entry magnitude.
double max_abs_entry(const SparseCd& m);

// Wraps a sparse matrix; when hermitian_expected is set the defect must stay
// below 1e-12 times the largest entry or a numerical error is thrown.
OperatorMatrix make_operator(SparseCd m, bool hermitian_expected);

} // namespace tfld
