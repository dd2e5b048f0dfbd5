#include "thinhom/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <map>
#include <mutex>

#include "thinhom/error.hpp"

namespace thinhom {

const GaussRule& gauss_legendre(int n)
{
    if (n < 1) {
        throw DomainError("Gauss-Legendre rule needs at least one point");
    }
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    // boost returns the non-negative zeros in increasing order
    const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
    GaussRule rule;
    auto weight = [n](double x) {
        const double dp = boost::math::legendre_p_prime<double>(n, x);
        return 2.0 / ((1.0 - x * x) * dp * dp);
    };
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
        if (*it == 0.0) continue;
        rule.nodes.push_back(-*it);
        rule.weights.push_back(weight(*it));
    }
    for (double z : zeros) {
        rule.nodes.push_back(z);
        rule.weights.push_back(weight(z));
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace thinhom
