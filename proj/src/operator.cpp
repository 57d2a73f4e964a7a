#include "thermofield/operator.hpp"

#include <string>

#include "thermofield/errors.hpp"

namespace tfld {

double hermitian_defect(const SparseCd& m) {
    SparseCd diff = SparseCd(m - SparseCd(m.adjoint()));
    double defect = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseCd::InnerIterator it(diff, k); it; ++it)
            defect = std::max(defect, std::abs(it.value()));
    return defect;
}

double max_abs_entry(const SparseCd& m) {
    double top = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseCd::InnerIterator it(m, k); it; ++it)
            top = std::max(top, std::abs(it.value()));
    return top;
}

OperatorMatrix make_operator(SparseCd m, bool hermitian_expected) {
    if (m.rows() != m.cols())
        throw numerical_error("operator matrix must be square, got " +
                              std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    m.makeCompressed();
    if (hermitian_expected) {
        const double defect = hermitian_defect(m);
        const double scale = max_abs_entry(m);
        if (defect > 1e-12 * std::max(scale, 1e-300))
            throw numerical_error("hermiticity defect " + std::to_string(defect) +
                                  " exceeds tolerance at scale " + std::to_string(scale));
    }
    OperatorMatrix out;
    out.dim = static_cast<std::size_t>(m.rows());
    out.entries = std::move(m);
    out.hermitian_flag = hermitian_expected;
    return out;
}

} // namespace tfld
