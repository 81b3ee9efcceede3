#pragma once

#include <cstdint>
#include <vector>

namespace colearn {

// Square count matrix; rows are actual classes, columns predicted, so row
// sums equal per-class support.
struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<long> counts;

    explicit ConfusionMatrix(int classes = 0)
        : num_classes(classes),
          counts(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {}

    long& at(int actual, int predicted) {
        return counts[static_cast<std::size_t>(actual) * num_classes + predicted];
    }
    long at(int actual, int predicted) const {
        return counts[static_cast<std::size_t>(actual) * num_classes + predicted];
    }
    long support(int cls) const;
};

// F1 per class: 2*TP / (2*TP + FP + FN), defined as 0 when the denominator
// is 0.
std::vector<double> per_class_f1(const ConfusionMatrix& confusion);

// Unweighted mean of per-class F1 over the classes that actually occur in
// the evaluated set (support > 0); absent classes do not dilute the score.
// Throws usage_error on an empty matrix.
double macro_f1(const ConfusionMatrix& confusion);

// One agent's evaluation result at one epoch.
struct MetricsRecord {
    int agent_id = 0;
    long epoch = 0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    ConfusionMatrix confusion;
    double mean_loss = 0.0;
};

}  // namespace colearn
