#pragma once

#include <vector>

#include "rfmesh/errors.hpp"

namespace rfmesh::dsp {

/// Binary complementary pair, entries +1/-1.
struct GolayPair {
    std::vector<int> a;
    std::vector<int> b;

    std::size_t size() const { return a.size(); }
};

/// Recursive construction a' = [a b], b' = [a -b] from a = b = [1].
inline GolayPair golay_pair(int log2_length)
{
    if (log2_length < 1 || log2_length > 16) throw ParameterError("golay_pair: log2_length must be in [1, 16]");
    GolayPair g{{1}, {1}};
    for (int m = 0; m < log2_length; ++m) {
        std::vector<int> a = g.a;
        a.insert(a.end(), g.b.begin(), g.b.end());
        std::vector<int> b = g.a;
        for (int v : g.b) b.push_back(-v);
        g.a = std::move(a);
        g.b = std::move(b);
    }
    return g;
}

/// Aperiodic autocorrelation at a non-negative lag.
inline long long aperiodic_autocorrelation(const std::vector<int>& s, std::size_t lag)
{
    long long acc = 0;
    for (std::size_t i = 0; i + lag < s.size(); ++i) acc += static_cast<long long>(s[i]) * s[i + lag];
    return acc;
}

} // namespace rfmesh::dsp
