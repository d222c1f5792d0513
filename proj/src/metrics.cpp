#include "coevo/metrics.hpp"

#include <cmath>

#include "coevo/error.hpp"

namespace coevo {

ConfusionCounts confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
    if (predicted.size() != actual.size()) {
        throw ValidationError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                              std::to_string(actual.size()) + " labels");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool a = actual[i] != 0;
        if (p && a) ++c.tp;
        else if (p && !a) ++c.fp;
        else if (!p && !a) ++c.tn;
        else ++c.fn;
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    const auto n = c.total();
    return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

double balanced_accuracy(const ConfusionCounts& c) {
    const auto pos = c.tp + c.fn;
    const auto neg = c.tn + c.fp;
    if (pos == 0 && neg == 0) return 0.0;
    if (pos == 0) return static_cast<double>(c.tn) / static_cast<double>(neg);
    if (neg == 0) return static_cast<double>(c.tp) / static_cast<double>(pos);
    const double tpr = static_cast<double>(c.tp) / static_cast<double>(pos);
    const double tnr = static_cast<double>(c.tn) / static_cast<double>(neg);
    return 0.5 * (tpr + tnr);
}

double balanced_error(const ConfusionCounts& c) { return 1.0 - balanced_accuracy(c); }

double mcc(const ConfusionCounts& c) {
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(den);
}

}  // namespace coevo
