#include "colearn/metrics.hpp"

#include "colearn/error.hpp"

namespace colearn {

long ConfusionMatrix::support(int cls) const {
    long s = 0;
    for (int p = 0; p < num_classes; ++p) s += at(cls, p);
    return s;
}

std::vector<double> per_class_f1(const ConfusionMatrix& confusion) {
    const int n = confusion.num_classes;
    std::vector<double> f1(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c) {
        const long tp = confusion.at(c, c);
        long fn = 0;
        long fp = 0;
        for (int k = 0; k < n; ++k) {
            if (k == c) continue;
            fn += confusion.at(c, k);
            fp += confusion.at(k, c);
        }
        const long denom = 2 * tp + fp + fn;
        f1[static_cast<std::size_t>(c)] =
            denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
    return f1;
}

double macro_f1(const ConfusionMatrix& confusion) {
    if (confusion.num_classes == 0) throw usage_error("macro_f1: empty confusion matrix");
    const auto f1 = per_class_f1(confusion);
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < confusion.num_classes; ++c) {
        if (confusion.support(c) == 0) continue;
        sum += f1[static_cast<std::size_t>(c)];
        ++present;
    }
    if (present == 0) throw usage_error("macro_f1: no class has support");
    return sum / static_cast<double>(present);
}

}  // namespace colearn
