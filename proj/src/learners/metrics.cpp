#include "agrisuit/learners/metrics.hpp"

namespace agrisuit::learners {

double r2_score(const Vector& y, const Vector& y_hat) {
    if (y.size() == 0 || y.size() != y_hat.size()) {
        throw DataError("EmptyData", "r2_score requires matching non-empty vectors");
    }
    double mean = y.mean();
    double ss_tot = (y.array() - mean).square().sum();
    if (ss_tot <= 0.0) {
        throw EstimationError("ZeroVariance", "r2_score undefined for constant y");
    }
    double ss_res = (y - y_hat).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

double f1_score(const Vector& t, const Vector& t_hat) {
    if (t.size() == 0 || t.size() != t_hat.size()) {
        throw DataError("EmptyData", "f1_score requires matching non-empty vectors");
    }
    long tp = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        bool actual = t[i] > 0.5;
        bool predicted = t_hat[i] > 0.5;
        if (predicted && actual) {
            ++tp;
        } else if (predicted && !actual) {
            ++fp;
        } else if (!predicted && actual) {
            ++fn;
        }
    }
    if (tp + fp + fn == 0) {
        throw EstimationError("UndefinedF1", "no positive labels in truth or prediction");
    }
    // Equivalent to 2PR/(P+R) and well defined whenever any positive exists.
    return 2.0 * tp / (2.0 * tp + fp + fn);
}

} // namespace agrisuit::learners
