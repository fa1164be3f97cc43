/*
   Copyright 2026 The rwre Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rwre::linalg {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDenseLimit = 512;
inline constexpr double kResidualTolerance = 1e-10;

/// Square matrix with equal lower/upper bandwidth, row-major band storage.
class BandMatrix {
public:
    BandMatrix(std::size_t n, std::size_t bandwidth)
        : n_(n)
        , bw_(bandwidth)
        , data_(n * (2 * bandwidth + 1), 0.0)
    {}

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return bw_; }

    bool in_band(std::size_t i, std::size_t j) const { return (i > j ? i - j : j - i) <= bw_; }

    double operator()(std::size_t i, std::size_t j) const { return in_band(i, j) ? data_[slot(i, j)] : 0.0; }

    double& at(std::size_t i, std::size_t j)
    {
        if (!in_band(i, j)) throw std::out_of_range("entry outside band");
        return data_[slot(i, j)];
    }

    std::vector<double> multiply(const std::vector<double>& x) const
    {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t lo = i > bw_ ? i - bw_ : 0;
            const std::size_t hi = std::min(n_ - 1, i + bw_);
            double acc = 0.0;
            for (std::size_t j = lo; j <= hi; ++j) acc += data_[slot(i, j)] * x[j];
            y[i] = acc;
        }
        return y;
    }

private:
    std::size_t slot(std::size_t i, std::size_t j) const { return i * (2 * bw_ + 1) + (j + bw_ - i); }

    std::size_t n_;
    std::size_t bw_;
    std::vector<double> data_;
};

// Elimination without pivoting. Every system assembled here is I - P on a
// transient set with P substochastic and irreducibly leaking, i.e. a
// nonsingular M-matrix, for which pivoting is unnecessary.
inline std::vector<std::vector<double>> solve_banded(BandMatrix a, std::vector<std::vector<double>> rhs)
{
    const std::size_t n = a.size();
    const std::size_t bw = a.bandwidth();
    for (std::size_t k = 0; k < n; ++k) {
        const double pivot = a(k, k);
        if (!(std::abs(pivot) > 0.0)) throw SolveError("zero pivot in banded elimination at row " + std::to_string(k));
        const std::size_t last = std::min(n - 1, k + bw);
        for (std::size_t i = k + 1; i <= last; ++i) {
            const double f = a(i, k) / pivot;
            if (f == 0.0) continue;
            for (std::size_t j = k; j <= last; ++j) a.at(i, j) -= f * a(k, j);
            for (auto& b : rhs) b[i] -= f * b[k];
        }
    }
    for (auto& b : rhs) {
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = b[ii];
            const std::size_t last = std::min(n - 1, ii + bw);
            for (std::size_t j = ii + 1; j <= last; ++j) acc -= a(ii, j) * b[j];
            b[ii] = acc / a(ii, ii);
        }
    }
    return rhs;
}

inline std::vector<std::vector<double>> solve_dense(const BandMatrix& a, const std::vector<std::vector<double>>& rhs)
{
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    Eigen::MatrixXd b(n, static_cast<Eigen::Index>(rhs.size()));
    for (std::size_t c = 0; c < rhs.size(); ++c)
        for (Eigen::Index i = 0; i < n; ++i) b(i, static_cast<Eigen::Index>(c)) = rhs[c][static_cast<std::size_t>(i)];
    const Eigen::MatrixXd x = m.partialPivLu().solve(b);
    std::vector<std::vector<double>> out(rhs.size(), std::vector<double>(a.size()));
    for (std::size_t c = 0; c < rhs.size(); ++c)
        for (Eigen::Index i = 0; i < n; ++i) out[c][static_cast<std::size_t>(i)] = x(i, static_cast<Eigen::Index>(c));
    return out;
}

enum class Method { automatic, dense, banded };

/// Solves A x = b for every right-hand side and certifies the result:
/// ||A x - b||_inf <= 1e-10 * max(1, ||x||_inf), otherwise SolveError.
inline std::vector<std::vector<double>> solve(const BandMatrix& a, const std::vector<std::vector<double>>& rhs,
                                              Method method = Method::automatic)
{
    if (a.size() == 0) return std::vector<std::vector<double>>(rhs.size());
    if (method == Method::automatic) method = a.size() <= kDenseLimit ? Method::dense : Method::banded;
    auto x = method == Method::dense ? solve_dense(a, rhs) : solve_banded(a, rhs);
    for (std::size_t c = 0; c < rhs.size(); ++c) {
        const auto ax = a.multiply(x[c]);
        double res = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            res = std::max(res, std::abs(ax[i] - rhs[c][i]));
            scale = std::max(scale, std::abs(x[c][i]));
        }
        if (!(res <= kResidualTolerance * scale))
            throw SolveError("linear solve residual " + std::to_string(res) + " exceeds tolerance");
    }
    return x;
}

inline std::vector<double> solve(const BandMatrix& a, const std::vector<double>& rhs, Method method = Method::automatic)
{
    return solve(a, std::vector<std::vector<double>>{rhs}, method).front();
}

} // namespace rwre::linalg
