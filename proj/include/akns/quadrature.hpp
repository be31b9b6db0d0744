#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace akns::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre on [-1,1] by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
    Rule r{std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        double w = 2.0 / ((1 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

// Composite Gauss-Legendre on [a,b] with `panels` equal panels of `order` points each.
inline Rule composite(double a, double b, int panels, int order = 10) {
    Rule base = gauss_legendre(order);
    Rule r;
    r.nodes.reserve(panels * order);
    r.weights.reserve(panels * order);
    double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * w;
        for (int k = 0; k < order; ++k) {
            r.nodes.push_back(c + 0.5 * w * base.nodes[k]);
            r.weights.push_back(0.5 * w * base.weights[k]);
        }
    }
    return r;
}

}  // namespace akns::quad
