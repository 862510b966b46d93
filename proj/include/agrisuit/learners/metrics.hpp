#ifndef AGRISUIT_LEARNERS_METRICS_HPP
#define AGRISUIT_LEARNERS_METRICS_HPP

#include "agrisuit/common.hpp"

namespace agrisuit::learners {

// R^2 = 1 - SS_res / SS_tot. Throws ZeroVariance when y is constant.
double r2_score(const Vector& y, const Vector& y_hat);

// F1 for the positive class (label 1): 2PR/(P+R). Inputs are 0/1 vectors.
// Throws UndefinedF1 when there is no positive anywhere in truth or
// prediction.
double f1_score(const Vector& t, const Vector& t_hat);

} // namespace agrisuit::learners

#endif
