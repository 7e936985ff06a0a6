#pragma once

// Post-hoc temperature scaling: pick T minimizing validation NLL of
// softmax(z / T) by golden-section search on [0.05, 20]. Scaling by a
// positive temperature never changes the argmax, so accuracy is invariant.

#include <cmath>
#include <utility>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/nn/model.hpp"

namespace intentsim {

struct Calibration {
    double temperature = 1.0;
};

inline double calibration_nll(const std::vector<std::pair<VectorXd, int>>& data,
                              double temperature) {
    if (temperature <= 0) throw SimError("calibration: temperature must be > 0");
    double nll = 0.0;
    for (const auto& [logits, label] : data)
        nll += cross_entropy(logits / temperature, label);
    return nll / std::max<std::size_t>(1, data.size());
}

inline Calibration calibrate_temperature(
    const std::vector<std::pair<VectorXd, int>>& validation,
    double lo = 0.05, double hi = 20.0) {
    if (validation.empty())
        throw ConfigError("calibrate_temperature: empty validation set");
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = calibration_nll(validation, c);
    double fd = calibration_nll(validation, d);
    for (int it = 0; it < 80 && (b - a) > 1e-5; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = calibration_nll(validation, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = calibration_nll(validation, d);
        }
    }
    Calibration cal;
    cal.temperature = 0.5 * (a + b);
    return cal;
}

// Calibrated class distribution and the confidence of its top class.
inline VectorXd calibrated_probs(const VectorXd& logits, double temperature) {
    return softmax_vec(logits / temperature);
}

inline double calibrated_confidence(const VectorXd& logits, double temperature) {
    return calibrated_probs(logits, temperature).maxCoeff();
}

}  // namespace intentsim
