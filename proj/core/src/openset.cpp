#include "openpixel/openset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace openpixel {

PredictionMap threshold_reject(const ProbabilityMap& probs, double tau, bool accept_at_equality) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw std::invalid_argument("threshold_reject: tau must be in [0, 1], got " +
                                    std::to_string(tau));
    if (probs.n_classes < 1 || probs.n_classes >= kIgnoreLabel)
        throw std::invalid_argument("threshold_reject: unsupported class count " +
                                    std::to_string(probs.n_classes));
    PredictionMap pred(probs.h, probs.w);
    const int64_t pixels = probs.h * probs.w;
    for (int64_t i = 0; i < pixels; ++i) {
        const float* row = probs.p.data() + i * probs.n_classes;
        int64_t best = 0;
        for (int64_t c = 1; c < probs.n_classes; ++c)
            if (row[c] > row[best]) best = c;
        const double max_p = static_cast<double>(row[best]);
        const bool accept = accept_at_equality ? max_p >= tau : max_p > tau;
        pred.labels[static_cast<size_t>(i)] =
            accept ? static_cast<uint8_t>(best) : kUnknownLabel;
    }
    return pred;
}

namespace {

struct SweepTallies {
    // per known class: total ground-truth pixels and the sorted max-probs of
    // pixels whose argmax equals the class
    std::vector<int64_t> known_total;
    std::vector<std::vector<double>> known_correct;
    std::vector<double> unknown_maxp;  // sorted
    int64_t unknown_total = 0;
};

SweepTallies build_tallies(const std::vector<SweepSample>& samples, const ClassScheme& scheme) {
    SweepTallies t;
    t.known_total.assign(static_cast<size_t>(scheme.n_known()), 0);
    t.known_correct.resize(static_cast<size_t>(scheme.n_known()));
    for (const auto& s : samples) {
        if (!s.probs || !s.truth_dataset)
            throw std::invalid_argument("sweep: null sample");
        const auto& probs = *s.probs;
        const auto& truth = *s.truth_dataset;
        if (static_cast<int64_t>(truth.size()) != probs.h * probs.w)
            throw std::invalid_argument("sweep: ground truth has " + std::to_string(truth.size()) +
                                        " pixels, probability map " +
                                        std::to_string(probs.h * probs.w));
        if (probs.n_classes != scheme.n_known())
            throw std::invalid_argument("sweep: probability map has " +
                                        std::to_string(probs.n_classes) +
                                        " classes, scheme knows " +
                                        std::to_string(scheme.n_known()));
        for (int64_t i = 0; i < probs.h * probs.w; ++i) {
            const uint8_t label = scheme.to_training(truth[static_cast<size_t>(i)]);
            if (label == kIgnoreLabel) continue;
            const float* row = probs.p.data() + i * probs.n_classes;
            int64_t best = 0;
            for (int64_t c = 1; c < probs.n_classes; ++c)
                if (row[c] > row[best]) best = c;
            const double max_p = static_cast<double>(row[best]);
            if (label == kUnknownLabel) {
                ++t.unknown_total;
                t.unknown_maxp.push_back(max_p);
            } else {
                ++t.known_total[label];
                if (best == label) t.known_correct[label].push_back(max_p);
            }
        }
    }
    for (auto& v : t.known_correct) std::sort(v.begin(), v.end());
    std::sort(t.unknown_maxp.begin(), t.unknown_maxp.end());
    return t;
}

}  // namespace

SweepCurve sweep_thresholds(const std::vector<SweepSample>& samples, const ClassScheme& scheme,
                            std::vector<double> grid, bool accept_at_equality) {
    if (grid.empty()) throw std::invalid_argument("sweep: threshold grid is empty");
    for (double tau : grid)
        if (!(tau >= 0.0 && tau <= 1.0))
            throw std::invalid_argument("sweep: grid value " + std::to_string(tau) +
                                        " outside [0, 1]");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const SweepTallies t = build_tallies(samples, scheme);

    SweepCurve curve;
    for (double tau : grid) {
        SweepPoint pt;
        pt.tau = tau;
        double known_sum = 0.0;
        int64_t known_classes = 0;
        double all_sum = 0.0;
        int64_t all_classes = 0;
        for (int64_t c = 0; c < scheme.n_known(); ++c) {
            const int64_t total = t.known_total[static_cast<size_t>(c)];
            if (total == 0) continue;
            const auto& v = t.known_correct[static_cast<size_t>(c)];
            // accepted correct pixels: max-prob passes the threshold
            const auto it = accept_at_equality ? std::lower_bound(v.begin(), v.end(), tau)
                                               : std::upper_bound(v.begin(), v.end(), tau);
            const double recall =
                static_cast<double>(v.end() - it) / static_cast<double>(total);
            known_sum += recall;
            ++known_classes;
            all_sum += recall;
            ++all_classes;
        }
        if (known_classes > 0) pt.acc_known = known_sum / static_cast<double>(known_classes);
        if (t.unknown_total > 0) {
            const auto& v = t.unknown_maxp;
            // rejected pixels: max-prob fails the threshold
            const auto it = accept_at_equality ? std::lower_bound(v.begin(), v.end(), tau)
                                               : std::upper_bound(v.begin(), v.end(), tau);
            const double recall = static_cast<double>(it - v.begin()) /
                                  static_cast<double>(t.unknown_total);
            pt.acc_unknown = recall;
            all_sum += recall;
            ++all_classes;
        }
        if (all_classes > 0) pt.acc_all = all_sum / static_cast<double>(all_classes);
        if (pt.acc_known && pt.acc_unknown) pt.acc_mean = (*pt.acc_known + *pt.acc_unknown) / 2.0;
        curve.points.push_back(pt);
    }
    return curve;
}

SweepCurve sweep_thresholds(const ProbabilityMap& probs, const std::vector<uint8_t>& truth_dataset,
                            const ClassScheme& scheme, std::vector<double> grid,
                            bool accept_at_equality) {
    std::vector<SweepSample> samples{{&probs, &truth_dataset}};
    return sweep_thresholds(samples, scheme, std::move(grid), accept_at_equality);
}

double select_threshold(const SweepCurve& curve) {
    if (curve.points.empty()) throw std::invalid_argument("select_threshold: empty sweep curve");
    const SweepPoint* best = nullptr;
    for (const auto& pt : curve.points) {
        if (!pt.acc_mean) continue;
        if (!best || *pt.acc_mean > *best->acc_mean) best = &pt;  // ties keep the smaller tau
    }
    if (!best)
        throw std::runtime_error(
            "select_threshold: no sweep entry defines the mean accuracy "
            "(missing known or unknown pixels)");
    return best->tau;
}

PredictionMap morph_filter(const PredictionMap& pred, int64_t window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("morph_filter: window side must be odd and >= 3, got " +
                                    std::to_string(window));
    if (static_cast<int64_t>(pred.labels.size()) != pred.h * pred.w)
        throw std::invalid_argument("morph_filter: malformed prediction map");
    const int64_t half = window / 2;
    PredictionMap out = pred;  // single pass over the frozen input snapshot
    std::vector<int64_t> votes(256, 0);
    for (int64_t y = 0; y < pred.h; ++y) {
        for (int64_t x = 0; x < pred.w; ++x) {
            if (pred.at(y, x) != kUnknownLabel) continue;
            std::fill(votes.begin(), votes.end(), 0);
            bool any_known = false;
            for (int64_t dy = -half; dy <= half; ++dy) {
                const int64_t ny = y + dy;
                if (ny < 0 || ny >= pred.h) continue;
                for (int64_t dx = -half; dx <= half; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const int64_t nx = x + dx;
                    if (nx < 0 || nx >= pred.w) continue;
                    const uint8_t n = pred.at(ny, nx);
                    if (n == kUnknownLabel || n == kIgnoreLabel) continue;
                    ++votes[n];
                    any_known = true;
                }
            }
            if (!any_known) continue;  // interior of an unknown region stays unknown
            int64_t best = 0;
            for (int64_t c = 1; c < kIgnoreLabel; ++c)
                if (votes[static_cast<size_t>(c)] > votes[static_cast<size_t>(best)]) best = c;
            out.at(y, x) = static_cast<uint8_t>(best);
        }
    }
    return out;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
}

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    return std::stod(field);
}

}  // namespace

void write_sweep_csv(const SweepCurve& curve, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << "tau,acc_all,acc_known,acc_unknown,acc_mean\n";
    char buf[32];
    for (const auto& pt : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.6f", pt.tau);
        os << buf << "," << fmt_opt(pt.acc_all) << "," << fmt_opt(pt.acc_known) << ","
           << fmt_opt(pt.acc_unknown) << "," << fmt_opt(pt.acc_mean) << "\n";
    }
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

SweepCurve read_sweep_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open sweep curve '" + path + "'");
    std::string line;
    if (!std::getline(is, line) || line.rfind("tau,", 0) != 0)
        throw std::runtime_error("'" + path + "' is not a sweep curve CSV");
    SweepCurve curve;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        while (fields.size() < 5) fields.emplace_back();
        SweepPoint pt;
        pt.tau = std::stod(fields[0]);
        pt.acc_all = parse_opt(fields[1]);
        pt.acc_known = parse_opt(fields[2]);
        pt.acc_unknown = parse_opt(fields[3]);
        pt.acc_mean = parse_opt(fields[4]);
        curve.points.push_back(pt);
    }
    return curve;
}

}  // namespace openpixel
