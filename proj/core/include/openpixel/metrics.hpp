#pragma once

#include <optional>

#include "openpixel/dataset.hpp"
#include "openpixel/maps.hpp"

namespace openpixel {

// Square tally over known training ids plus UNKNOWN (last row/column);
// rows are ground truth, columns are predictions.
struct ConfusionMatrix {
    int64_t n_known = 0;
    std::vector<uint64_t> counts;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int64_t known)
        : n_known(known), counts(static_cast<size_t>((known + 1) * (known + 1)), 0) {
        if (known < 1) throw std::invalid_argument("confusion matrix needs >= 1 known class");
    }

    int64_t side() const { return n_known + 1; }
    uint64_t cell(int64_t truth, int64_t pred) const {
        return counts[static_cast<size_t>(truth * side() + pred)];
    }
    uint64_t& cell(int64_t truth, int64_t pred) {
        return counts[static_cast<size_t>(truth * side() + pred)];
    }
    uint64_t total() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

// IGNORE ground truth is skipped; the held-out class tallies into the UNKNOWN
// row. Accumulation over tiles is additive.
ConfusionMatrix accumulate(const PredictionMap& pred, const std::vector<uint8_t>& truth_dataset,
                           const ClassScheme& scheme);

double overall_accuracy(const ConfusionMatrix& cm);

// Mean per-class recall over rows with ground-truth pixels.
double normalized_accuracy(const ConfusionMatrix& cm);

// (p_o - p_e) / (1 - p_e) with p_e from the row/column marginals.
double cohen_kappa(const ConfusionMatrix& cm);

struct RotationExperiment {
    std::string unknown_name;
    ClassScheme scheme;
    ConfusionMatrix cm;
};

// Rows = one held-out-class experiment each, columns = dataset classes;
// entry = 1 - recall of that class, absent when the class has no pixels.
struct ErrorRateMatrix {
    std::vector<std::string> class_names;
    std::vector<std::string> row_names;
    std::vector<std::vector<std::optional<double>>> rates;
};

ErrorRateMatrix per_class_error_rates(const std::vector<RotationExperiment>& experiments);

void write_error_rate_csv(const ErrorRateMatrix& m, const std::string& path);
void write_confusion_csv(const ConfusionMatrix& cm, const ClassScheme& scheme,
                         const std::string& path);

}  // namespace openpixel
