#ifndef AGRISUIT_LEARNERS_SCALER_HPP
#define AGRISUIT_LEARNERS_SCALER_HPP

#include "agrisuit/common.hpp"

namespace agrisuit::learners {

// Per-feature division by the max absolute value seen at fit time. Maps the
// fit data into [-1, 1] per feature and preserves sparsity; all-zero
// features pass through unchanged.
class MaxAbsScaler {
public:
    static MaxAbsScaler fit(const Matrix& X);

    Matrix transform(const Matrix& X) const;
    Matrix inverse_transform(const Matrix& X) const;

    const Vector& max_abs() const noexcept { return max_abs_; }

private:
    Vector max_abs_;   // raw per-feature max |x|
    Vector divisors_;  // max_abs with zeros replaced by 1
};

} // namespace agrisuit::learners

#endif
