#include "openpixel/metrics.hpp"

#include <cstdio>
#include <fstream>

namespace openpixel {

uint64_t ConfusionMatrix::total() const {
    uint64_t t = 0;
    for (uint64_t v : counts) t += v;
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (n_known != other.n_known)
        throw std::invalid_argument("confusion matrix size mismatch: " + std::to_string(n_known) +
                                    " vs " + std::to_string(other.n_known) + " known classes");
    for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
}

ConfusionMatrix accumulate(const PredictionMap& pred, const std::vector<uint8_t>& truth_dataset,
                           const ClassScheme& scheme) {
    if (static_cast<int64_t>(truth_dataset.size()) != pred.h * pred.w)
        throw std::invalid_argument("accumulate: prediction map covers " +
                                    std::to_string(pred.h * pred.w) + " pixels, ground truth " +
                                    std::to_string(truth_dataset.size()));
    ConfusionMatrix cm(scheme.n_known());
    for (size_t i = 0; i < truth_dataset.size(); ++i) {
        const uint8_t truth = scheme.to_training(truth_dataset[i]);
        if (truth == kIgnoreLabel) continue;
        const int64_t row = truth == kUnknownLabel ? cm.n_known : truth;
        const uint8_t p = pred.labels[i];
        int64_t col;
        if (p == kUnknownLabel) {
            col = cm.n_known;
        } else if (p < scheme.n_known()) {
            col = p;
        } else {
            throw std::invalid_argument("accumulate: prediction label " + std::to_string(p) +
                                        " invalid for a " + std::to_string(scheme.n_known()) +
                                        "-class scheme");
        }
        ++cm.cell(row, col);
    }
    return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
    const uint64_t t = cm.total();
    if (t == 0)
        throw std::runtime_error("overall_accuracy: empty confusion matrix (no counted pixels)");
    uint64_t trace = 0;
    for (int64_t i = 0; i < cm.side(); ++i) trace += cm.cell(i, i);
    return static_cast<double>(trace) / static_cast<double>(t);
}

double normalized_accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0)
        throw std::runtime_error("normalized_accuracy: empty confusion matrix (no counted pixels)");
    double sum = 0.0;
    int64_t rows = 0;
    for (int64_t i = 0; i < cm.side(); ++i) {
        uint64_t row_total = 0;
        for (int64_t j = 0; j < cm.side(); ++j) row_total += cm.cell(i, j);
        if (row_total == 0) continue;  // classes absent from the ground truth are excluded
        sum += static_cast<double>(cm.cell(i, i)) / static_cast<double>(row_total);
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("normalized_accuracy: every class row is empty");
    return sum / static_cast<double>(rows);
}

double cohen_kappa(const ConfusionMatrix& cm) {
    const uint64_t t = cm.total();
    if (t == 0) throw std::runtime_error("cohen_kappa: empty confusion matrix (no counted pixels)");
    const double total = static_cast<double>(t);
    double trace = 0.0, pe = 0.0;
    for (int64_t i = 0; i < cm.side(); ++i) {
        trace += static_cast<double>(cm.cell(i, i));
        uint64_t row = 0, col = 0;
        for (int64_t j = 0; j < cm.side(); ++j) {
            row += cm.cell(i, j);
            col += cm.cell(j, i);
        }
        pe += static_cast<double>(row) * static_cast<double>(col) / (total * total);
    }
    const double po = trace / total;
    if (1.0 - pe < 1e-12)
        throw std::runtime_error(
            "cohen_kappa: chance agreement is 1 (degenerate single-cell matrix)");
    return (po - pe) / (1.0 - pe);
}

ErrorRateMatrix per_class_error_rates(const std::vector<RotationExperiment>& experiments) {
    if (experiments.empty())
        throw std::invalid_argument("per_class_error_rates: no experiments given");
    ErrorRateMatrix m;
    m.class_names = experiments.front().scheme.class_names;
    for (const auto& exp : experiments) {
        if (exp.scheme.class_names != m.class_names)
            throw std::invalid_argument(
                "per_class_error_rates: experiments disagree on the dataset classes");
        if (exp.cm.n_known != exp.scheme.n_known())
            throw std::invalid_argument(
                "per_class_error_rates: confusion matrix does not match its scheme");
        m.row_names.push_back(exp.unknown_name.empty() ? "none" : exp.unknown_name);
        std::vector<std::optional<double>> row;
        for (size_t j = 0; j < m.class_names.size(); ++j) {
            const uint8_t training = exp.scheme.to_training(static_cast<uint8_t>(j));
            const int64_t idx = training == kUnknownLabel ? exp.cm.n_known : training;
            uint64_t row_total = 0;
            for (int64_t k = 0; k < exp.cm.side(); ++k) row_total += exp.cm.cell(idx, k);
            if (row_total == 0) {
                row.emplace_back();
            } else {
                row.emplace_back(1.0 - static_cast<double>(exp.cm.cell(idx, idx)) /
                                           static_cast<double>(row_total));
            }
        }
        m.rates.push_back(std::move(row));
    }
    return m;
}

void write_error_rate_csv(const ErrorRateMatrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << "unknown_class";
    for (const auto& name : m.class_names) os << "," << name;
    os << "\n";
    char buf[32];
    for (size_t i = 0; i < m.rates.size(); ++i) {
        os << m.row_names[i];
        for (const auto& v : m.rates[i]) {
            os << ",";
            if (v) {
                std::snprintf(buf, sizeof(buf), "%.6f", *v);
                os << buf;
            }
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

void write_confusion_csv(const ConfusionMatrix& cm, const ClassScheme& scheme,
                         const std::string& path) {
    if (cm.n_known != scheme.n_known())
        throw std::invalid_argument("write_confusion_csv: matrix does not match the scheme");
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << "truth\\pred";
    for (int64_t j = 0; j < cm.n_known; ++j)
        os << "," << scheme.class_names[scheme.training_to_dataset(static_cast<uint8_t>(j))];
    os << ",UNKNOWN\n";
    for (int64_t i = 0; i < cm.side(); ++i) {
        if (i < cm.n_known)
            os << scheme.class_names[scheme.training_to_dataset(static_cast<uint8_t>(i))];
        else
            os << "UNKNOWN";
        for (int64_t j = 0; j < cm.side(); ++j) os << "," << cm.cell(i, j);
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace openpixel
