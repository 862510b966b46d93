#include "agrisuit/learners/scaler.hpp"

namespace agrisuit::learners {

MaxAbsScaler MaxAbsScaler::fit(const Matrix& X) {
    if (X.rows() == 0) {
        throw DataError("EmptyData", "MaxAbsScaler needs at least one row");
    }
    MaxAbsScaler scaler;
    scaler.max_abs_ = X.cwiseAbs().colwise().maxCoeff();
    scaler.divisors_ = scaler.max_abs_;
    for (Eigen::Index j = 0; j < scaler.divisors_.size(); ++j) {
        if (scaler.divisors_[j] == 0.0) {
            scaler.divisors_[j] = 1.0;
        }
    }
    return scaler;
}

Matrix MaxAbsScaler::transform(const Matrix& X) const {
    if (X.cols() != divisors_.size()) {
        throw DataError("DimensionMismatch", "scaler fitted on different width");
    }
    return X.array().rowwise() / divisors_.transpose().array();
}

Matrix MaxAbsScaler::inverse_transform(const Matrix& X) const {
    if (X.cols() != divisors_.size()) {
        throw DataError("DimensionMismatch", "scaler fitted on different width");
    }
    return X.array().rowwise() * divisors_.transpose().array();
}

} // namespace agrisuit::learners
