#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace coevo {

/// Binary confusion counts with "up" (label 1) as the positive class.
struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

/// Throws ValidationError on length mismatch.
ConfusionCounts confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

/// (tp + tn) / total; 0 for an empty set.
double accuracy(const ConfusionCounts& c);

/// Mean of the per-class recalls over classes present in the actual labels.
double balanced_accuracy(const ConfusionCounts& c);
double balanced_error(const ConfusionCounts& c);

/// Matthews correlation; 0 when any marginal is empty.
double mcc(const ConfusionCounts& c);

}  // namespace coevo
