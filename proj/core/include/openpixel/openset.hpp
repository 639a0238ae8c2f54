#pragma once

#include <optional>

#include "openpixel/dataset.hpp"
#include "openpixel/maps.hpp"

namespace openpixel {

struct OpenSetConfig {
    double tau = 0.7;
    int64_t window = 3;              // structuring element side, odd and >= 3
    bool accept_at_equality = true;  // max >= tau keeps the argmax class; false uses strict >

    void validate() const {
        if (!(tau >= 0.0 && tau <= 1.0))
            throw std::invalid_argument("threshold must be in [0, 1], got " + std::to_string(tau));
        if (window < 3 || window % 2 == 0)
            throw std::invalid_argument("structuring element side must be odd and >= 3, got " +
                                        std::to_string(window));
    }
};

// Per pixel: argmax class (ties to the lowest class id) when the max
// probability passes the threshold, otherwise UNKNOWN. tau = 0 recovers plain
// closed-set argmax decoding.
PredictionMap threshold_reject(const ProbabilityMap& probs, double tau,
                               bool accept_at_equality = true);

struct SweepPoint {
    double tau = 0.0;
    std::optional<double> acc_all;      // normalized accuracy over known + unknown classes
    std::optional<double> acc_known;    // normalized accuracy over known classes
    std::optional<double> acc_unknown;  // fraction of unknown pixels rejected
    std::optional<double> acc_mean;     // mean of the known and unknown accuracies
};

struct SweepCurve {
    std::vector<SweepPoint> points;  // strictly increasing tau
};

// One evaluation tile: its probability map and per-pixel ground truth in
// dataset class ids (remapped through the scheme; IGNORE pixels excluded).
struct SweepSample {
    const ProbabilityMap* probs = nullptr;
    const std::vector<uint8_t>* truth_dataset = nullptr;
};

SweepCurve sweep_thresholds(const std::vector<SweepSample>& samples, const ClassScheme& scheme,
                            std::vector<double> grid, bool accept_at_equality = true);

SweepCurve sweep_thresholds(const ProbabilityMap& probs, const std::vector<uint8_t>& truth_dataset,
                            const ClassScheme& scheme, std::vector<double> grid,
                            bool accept_at_equality = true);

// argmax of the mean accuracy column; ties resolved to the smallest tau.
double select_threshold(const SweepCurve& curve);

// Restricted multi-class erosion over a frozen snapshot: an UNKNOWN pixel with
// at least one known-labeled in-bounds neighbor in the window takes the
// neighborhood's majority known class (ties to the lowest class id); an
// UNKNOWN pixel surrounded only by UNKNOWN stays UNKNOWN; known pixels are
// never modified.
PredictionMap morph_filter(const PredictionMap& pred, int64_t window);

// CSV: tau,acc_all,acc_known,acc_unknown,acc_mean (absent values empty).
void write_sweep_csv(const SweepCurve& curve, const std::string& path);
SweepCurve read_sweep_csv(const std::string& path);

}  // namespace openpixel
