#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snrisk {

// Sequence norms satisfying the sandwich ||.||_inf <= ||.|| <= ||.||_1.
class Norm {
public:
    enum class Kind { L1, Linf, Lp };

    static Norm l1() { return Norm(Kind::L1, 1.0); }
    static Norm linf() { return Norm(Kind::Linf, 0.0); }
    static Norm lp(double p) {
        if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("Lp norm: p must lie in (1,inf)");
        return Norm(Kind::Lp, p);
    }

    Kind kind() const { return kind_; }
    double p() const { return p_; }

    double operator()(std::span<const double> u) const {
        switch (kind_) {
            case Kind::L1: {
                double s = 0.0;
                for (double v : u) s += std::abs(v);
                return s;
            }
            case Kind::Linf: {
                double m = 0.0;
                for (double v : u) m = std::max(m, std::abs(v));
                return m;
            }
            case Kind::Lp: {
                double m = 0.0;
                for (double v : u) m = std::max(m, std::abs(v));
                if (m == 0.0) return 0.0;
                double s = 0.0;
                for (double v : u) s += std::pow(std::abs(v) / m, p_);
                return m * std::pow(s, 1.0 / p_);
            }
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind_) {
            case Kind::L1: return "l1";
            case Kind::Linf: return "linf";
            case Kind::Lp: return "lp(" + std::to_string(p_) + ")";
        }
        return "";
    }

private:
    Norm(Kind k, double p) : kind_(k), p_(p) {}
    Kind kind_;
    double p_;
};

// Row-major dense square matrix, used for user-supplied entry laws and tests.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a;  // n*n entries

    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
};

struct InducedNormBound {
    double value = 0.0;
    bool exact = true;  // Lp is reported as an interpolation upper bound only
};

// Operator norm induced by the sequence norm. Exact for l1 (max column sum)
// and linf (max row sum); the Lp value is the Riesz-Thorin interpolation
// bound ||A||_1^{1/p} ||A||_inf^{1-1/p}.
InducedNormBound induced_matrix_norm(const Norm& norm, const DenseMatrix& m);

} // namespace snrisk
