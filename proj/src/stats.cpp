#include "crp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "crp/error.hpp"

namespace crp::stats {

namespace {

/// Midranks of the pooled sample, then U1 = R1 - n(n+1)/2.
double rankU1(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::pair<double, int>> pooled; // (value, 0 = from a)
    pooled.reserve(n + m);
    for (double v : a)
        pooled.emplace_back(v, 0);
    for (double v : b)
        pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    double r1 = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first)
            ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].second == 0)
                r1 += midrank;
        i = j;
    }
    return r1 - static_cast<double>(n) * (n + 1) / 2.0;
}

bool hasTies(std::vector<double> pooled) {
    std::sort(pooled.begin(), pooled.end());
    return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

/// Exact two-sided p over the rank-sum distribution (valid without ties):
/// P(|U - nm/2| >= |u1 - nm/2|).
double exactNoTies(std::size_t n, std::size_t m, double u1) {
    const std::size_t total = n + m;
    const std::size_t maxSum = total * (total + 1) / 2;
    // ways[k][s] = subsets of size k of {1..i} with rank sum s
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(maxSum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t item = 1; item <= total; ++item)
        for (std::size_t k = std::min(item, n); k >= 1; --k)
            for (std::size_t s = maxSum; s >= item; --s)
                if (ways[k - 1][s - item] != 0.0)
                    ways[k][s] += ways[k - 1][s - item];

    const double offset = static_cast<double>(n) * (n + 1) / 2.0;
    const double center = static_cast<double>(n * m) / 2.0;
    const double threshold = std::abs(u1 - center);
    double matching = 0.0, all = 0.0;
    for (std::size_t s = 0; s <= maxSum; ++s) {
        const double count = ways[n][s];
        if (count == 0.0)
            continue;
        all += count;
        const double u = static_cast<double>(s) - offset;
        if (std::abs(u - center) >= threshold - 1e-12)
            matching += count;
    }
    return std::min(1.0, matching / all);
}

/// Exact permutation p with ties: enumerate every n-subset of the pooled
/// values as "sample A". Caller guarantees the count is small enough.
double exactEnumerate(std::span<const double> a, std::span<const double> b, double u1) {
    const std::size_t n = a.size(), m = b.size(), total = n + m;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());

    const double center = static_cast<double>(n * m) / 2.0;
    const double threshold = std::abs(u1 - center);
    std::vector<std::size_t> pick(n);
    for (std::size_t i = 0; i < n; ++i)
        pick[i] = i;

    long long matching = 0, all = 0;
    while (true) {
        // U1 of this assignment by pairwise comparison over the complement
        std::vector<char> inA(total, 0);
        for (std::size_t i : pick)
            inA[i] = 1;
        double u = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            if (!inA[i])
                continue;
            for (std::size_t j = 0; j < total; ++j) {
                if (inA[j])
                    continue;
                if (pooled[i] > pooled[j])
                    u += 1.0;
                else if (pooled[i] == pooled[j])
                    u += 0.5;
            }
        }
        ++all;
        if (std::abs(u - center) >= threshold - 1e-12)
            ++matching;

        // next combination
        std::size_t k = n;
        while (k > 0 && pick[k - 1] == total - n + k - 1)
            --k;
        if (k == 0)
            break;
        ++pick[k - 1];
        for (std::size_t i = k; i < n; ++i)
            pick[i] = pick[i - 1] + 1;
    }
    return std::min(1.0, static_cast<double>(matching) / static_cast<double>(all));
}

double choose(std::size_t n, std::size_t k) {
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

double normalApprox(std::span<const double> a, std::span<const double> b, double u1) {
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    const double total = n + m;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tieTerm = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i])
            ++j;
        const double t = static_cast<double>(j - i);
        tieTerm += t * t * t - t;
        i = j;
    }
    const double mu = n * m / 2.0;
    const double variance = n * m / 12.0 * (total + 1.0 - tieTerm / (total * (total - 1.0)));
    if (variance <= 0.0)
        return 1.0;
    const double z = (std::abs(u1 - mu) - 0.5) / std::sqrt(variance); // continuity-corrected
    if (z <= 0.0)
        return 1.0;
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

} // namespace

MannWhitneyResult mannWhitney(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 3 || b.size() < 3)
        throw Error(ErrorKind::TooFewSamples, "Mann-Whitney needs at least 3 observations per side");

    MannWhitneyResult result;
    result.u1 = rankU1(a, b);
    const double u2 = static_cast<double>(a.size() * b.size()) - result.u1;
    result.u = std::min(result.u1, u2);
    result.medianA = median({a.begin(), a.end()});
    result.medianB = median({b.begin(), b.end()});

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const bool ties = hasTies(pooled);

    if (a.size() * b.size() <= 400) {
        if (!ties) {
            result.exact = true;
            result.pValue = exactNoTies(a.size(), b.size(), result.u1);
            return result;
        }
        if (choose(a.size() + b.size(), a.size()) <= 250'000.0) {
            result.exact = true;
            result.pValue = exactEnumerate(a, b, result.u1);
            return result;
        }
    }
    result.exact = false;
    result.pValue = normalApprox(a, b, result.u1);
    return result;
}

double median(std::vector<double> values) {
    if (values.empty())
        throw Error(ErrorKind::TooFewSamples, "median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

std::vector<double> averageRanks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]])
            ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = midrank;
        i = j;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorKind::TooFewSamples, "Spearman needs two equally sized samples");
    const auto rx = averageRanks(x), ry = averageRanks(y);
    const std::size_t n = rx.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace crp::stats
