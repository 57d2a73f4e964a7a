#include "thermofield/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <memory>

#include "thermofield/errors.hpp"

namespace tfld {

namespace {

double trampoline(double x, void* params) {
    auto* fn = static_cast<const std::function<double(double)>*>(params);
    return (*fn)(x);
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

constexpr std::size_t kLimit = 4000;

// GSL aborts by default; errors are converted to return codes and handled per call.
struct ScopedHandlerOff {
    gsl_error_handler_t* previous;
    ScopedHandlerOff() : previous(gsl_set_error_handler_off()) {}
    ~ScopedHandlerOff() { gsl_set_error_handler(previous); }
};

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, double abs_tol) {
    ScopedHandlerOff guard;
    Workspace w(gsl_integration_workspace_alloc(kLimit));
    gsl_function gf;
    gf.function = &trampoline;
    gf.params = const_cast<std::function<double(double)>*>(&f);

    QuadResult out;
    int status = gsl_integration_qags(&gf, a, b, abs_tol, rel_tol, kLimit, w.get(),
                                      &out.value, &out.abs_error);
    if (status == GSL_EROUND || status == GSL_EDIVERGE) {
        // Retry with a fixed-order rule that tolerates mild endpoint roundoff.
        status = gsl_integration_qag(&gf, a, b, abs_tol, 1e3 * rel_tol, kLimit,
                                     GSL_INTEG_GAUSS61, w.get(), &out.value, &out.abs_error);
    }
    if (status != GSL_SUCCESS && status != GSL_EMAXITER) {
        throw numerical_error("quadrature failed on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]: " + gsl_strerror(status) +
                              " (partial value " + std::to_string(out.value) + ")");
    }
    return out;
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 double rel_tol, double abs_tol) {
    ScopedHandlerOff guard;
    Workspace w(gsl_integration_workspace_alloc(kLimit));
    gsl_function gf;
    gf.function = &trampoline;
    gf.params = const_cast<std::function<double(double)>*>(&f);

    QuadResult out;
    const int status = gsl_integration_qagiu(&gf, a, abs_tol, rel_tol, kLimit, w.get(),
                                             &out.value, &out.abs_error);
    if (status != GSL_SUCCESS && status != GSL_EMAXITER && status != GSL_EROUND) {
        throw numerical_error("semi-infinite quadrature failed from " + std::to_string(a) +
                              ": " + gsl_strerror(status) + " (partial value " +
                              std::to_string(out.value) + ")");
    }
    return out;
}

} // namespace tfld
