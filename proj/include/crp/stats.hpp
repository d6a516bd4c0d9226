#pragma once

#include <span>
#include <vector>

namespace crp::stats {

struct MannWhitneyResult {
    double u = 0.0;  // min(U1, U2)
    double u1 = 0.0; // U of the first sample
    double pValue = 1.0;
    bool exact = false;
    double medianA = 0.0;
    double medianB = 0.0;
};

/// Two-sided Mann-Whitney U. Exact when n*m <= 400 (rank-sum distribution
/// without ties, full subset enumeration with ties while feasible), otherwise
/// the normal approximation with tie correction. Throws TooFewSamples below 3
/// observations per side.
MannWhitneyResult mannWhitney(std::span<const double> a, std::span<const double> b);

double median(std::vector<double> values);

/// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> x, std::span<const double> y);

} // namespace crp::stats
