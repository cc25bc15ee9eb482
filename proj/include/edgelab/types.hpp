#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgelab {

using cdouble = std::complex<double>;

// Error with a machine-readable code matching the operation contracts
// (IncommensurateFlux, RangeTooLarge, GapViolated, NonUnitaryInput, ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Integer-verdict tolerances. Plaquette Chern is exact by construction,
// winding converges faster than the cross-geometry Fredholm trace.
struct Tolerances {
    double chern = 1e-6;
    double winding = 0.05;
    double index = 0.1;
    double bott = 0.1;
    double current = 0.05;
};

struct ReportMeta {
    int L1 = 0;
    int L2 = 0;
    double mu = 1.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    int samples = 1;
};

// A raw invariant value together with its rounding verdict.
struct TopologicalReport {
    std::string quantity;
    double raw = 0.0;
    long nearest = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool quantized = false;
    ReportMeta meta;

    static TopologicalReport make(std::string quantity, double raw, double tol,
                                  ReportMeta meta = {}) {
        TopologicalReport r;
        r.quantity = std::move(quantity);
        r.raw = raw;
        r.nearest = std::lround(raw);
        r.residual = std::abs(raw - static_cast<double>(r.nearest));
        r.tolerance = tol;
        r.quantized = r.residual < tol;
        r.meta = meta;
        return r;
    }
};

} // namespace edgelab
