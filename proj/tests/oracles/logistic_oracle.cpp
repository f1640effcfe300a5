#include "oracles/logistic_oracle.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace oracle {

namespace {

double objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& theta, double lambda) {
    const Eigen::VectorXd s = a * theta;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double m = y(i) * s(i);
        loss += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    const Eigen::Index d = theta.size() - 1;
    return loss / static_cast<double>(s.size()) + 0.5 * lambda * theta.head(d).squaredNorm();
}

}  // namespace

LogisticOptimum logistic_newton(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                                double lambda) {
    const Eigen::Index n = static_cast<Eigen::Index>(x.size()), d = static_cast<Eigen::Index>(x[0].size());
    Eigen::MatrixXd a(n, d + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = x[i][j];
        a(i, d) = 1.0;
        y(i) = labels[i] == 1 ? 1.0 : -1.0;
    }
    Eigen::MatrixXd reg = Eigen::MatrixXd::Identity(d + 1, d + 1) * lambda;
    reg(d, d) = 0.0;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd s = a * theta;
        Eigen::VectorXd g = reg * theta;
        Eigen::MatrixXd h = reg;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(y(i) * s(i)));  // sigma(-m)
            g -= a.row(i).transpose() * (y(i) * p / static_cast<double>(n));
            h += a.row(i).transpose() * a.row(i) * (p * (1 - p) / static_cast<double>(n));
        }
        const Eigen::VectorXd step = h.ldlt().solve(g);
        double t = 1.0;
        const double f0 = objective(a, y, theta, lambda);
        while (objective(a, y, theta - t * step, lambda) > f0 && t > 1e-10) t *= 0.5;
        theta -= t * step;
        if (g.norm() < 1e-14) break;
    }
    LogisticOptimum out;
    out.w.assign(theta.data(), theta.data() + d);
    out.b = theta(d);
    out.objective = objective(a, y, theta, lambda);
    return out;
}

}  // namespace oracle
